use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{dot, par_ranges, Matrix};
use crate::scalar::Scalar;

/// Tolerance on `|y_hat|` below which the relative error is undefined.
pub const DELTA_F_TOLERANCE: f64 = 1e-12;

/// `y_hat_k = (1/n) sum_i y_i exp(-i 2 pi i k / n)` for `k = 0..n-1`, by direct summation.
pub fn dft_1d<T: Scalar>(samples: &[T]) -> Result<Vec<Complex<T>>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Empty("dft samples"));
    }
    let two_pi_over_n = T::TAU() / T::from_usize_lossy(n);
    let inv_n = T::one() / T::from_usize_lossy(n);
    // twiddles indexed by (i * k) mod n keep every angle in [0, 2 pi)
    let twiddles: Vec<(T, T)> = (0..n)
        .map(|m| {
            let a = two_pi_over_n * T::from_usize_lossy(m);
            (a.cos(), a.sin())
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (mut re, mut im) = (T::zero(), T::zero());
        let mut m = 0usize;
        for &y in samples {
            let (c, s) = twiddles[m];
            re += y * c;
            im -= y * s;
            m += k;
            if m >= n {
                m -= n;
            }
        }
        out.push(Complex::new(re * inv_n, im * inv_n));
    }
    Ok(out)
}

/// One-dimensional non-uniform transform `(1/n) sum_i y_i exp(-i 2 pi x_i k)` on a frequency grid.
pub fn nonuniform_ft_1d<T: Scalar>(xs: &[T], ys: &[T], frequencies: &[T]) -> Result<Vec<Complex<T>>> {
    if xs.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if frequencies.is_empty() {
        return Err(Error::Empty("frequency grid"));
    }
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            context: "labels",
            expected: xs.len(),
            actual: ys.len(),
        });
    }
    if xs.iter().chain(ys).chain(frequencies).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("non-uniform transform input"));
    }
    let inv_n = T::one() / T::from_usize_lossy(xs.len());
    let chunks = par_ranges(frequencies.len(), |range| {
        range
            .map(|j| {
                let k = frequencies[j];
                let (mut re, mut im) = (T::zero(), T::zero());
                for (&x, &y) in xs.iter().zip(ys) {
                    let a = T::TAU() * x * k;
                    re += y * a.cos();
                    im -= y * a.sin();
                }
                Complex::new(re * inv_n, im * inv_n)
            })
            .collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Precomputed `exp(-i 2 pi x_i k)` table for repeated transforms on fixed points.
#[derive(Debug, Clone)]
pub struct FourierBasis<T> {
    frequencies: Vec<T>,
    n: usize,
    cos: Vec<T>,
    sin: Vec<T>,
}

impl<T: Scalar> FourierBasis<T> {
    pub fn new(xs: &[T], frequencies: &[T]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Empty("dataset"));
        }
        if frequencies.is_empty() {
            return Err(Error::Empty("frequency grid"));
        }
        let mut cos = Vec::with_capacity(xs.len() * frequencies.len());
        let mut sin = Vec::with_capacity(xs.len() * frequencies.len());
        for &k in frequencies {
            for &x in xs {
                let a = T::TAU() * x * k;
                cos.push(a.cos());
                sin.push(a.sin());
            }
        }
        Ok(Self {
            frequencies: frequencies.to_vec(),
            n: xs.len(),
            cos,
            sin,
        })
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    /// Same summation order as [`nonuniform_ft_1d`], so results agree bit for bit.
    pub fn transform(&self, ys: &[T]) -> Result<Vec<Complex<T>>> {
        if ys.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "labels",
                expected: self.n,
                actual: ys.len(),
            });
        }
        let inv_n = T::one() / T::from_usize_lossy(self.n);
        Ok((0..self.frequencies.len())
            .map(|j| {
                let c = &self.cos[j * self.n..(j + 1) * self.n];
                let s = &self.sin[j * self.n..(j + 1) * self.n];
                let (mut re, mut im) = (T::zero(), T::zero());
                for i in 0..self.n {
                    re += ys[i] * c[i];
                    im -= ys[i] * s[i];
                }
                Complex::new(re * inv_n, im * inv_n)
            })
            .collect())
    }
}

/// Projects each input row onto `direction`.
pub fn project<T: Scalar>(inputs: &Matrix<T>, direction: &[T]) -> Result<Vec<T>> {
    if direction.len() != inputs.cols() {
        return Err(Error::DimensionMismatch {
            context: "projection direction",
            expected: inputs.cols(),
            actual: direction.len(),
        });
    }
    Ok((0..inputs.rows()).map(|i| dot(inputs.row(i), direction)).collect())
}

/// Non-uniform transform of scalar labels along `direction`, which must be a unit vector.
pub fn nonuniform_ft<T: Scalar>(
    inputs: &Matrix<T>,
    labels: &[T],
    direction: &[T],
    frequencies: &[T],
) -> Result<Vec<Complex<T>>> {
    let norm = dot(direction, direction).sqrt();
    if (norm - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::invalid(format!(
            "projection direction must have unit norm, got {norm}"
        )));
    }
    let xs = project(inputs, direction)?;
    nonuniform_ft_1d(&xs, labels, frequencies)
}

/// `Delta_F = |h_hat - y_hat| / |y_hat|`.
pub fn delta_f<T: Scalar>(y_hat: Complex<T>, h_hat: Complex<T>) -> Result<T> {
    let denom = y_hat.norm();
    if !(denom > T::lit(DELTA_F_TOLERANCE)) {
        return Err(Error::UndefinedFrequency(denom.as_f64()));
    }
    Ok((h_hat - y_hat).norm() / denom)
}

/// Indices of the `count` largest strict local maxima of `magnitudes`, ascending.
///
/// Endpoints count as maxima when they exceed their single neighbour. Ties in
/// magnitude go to the lower index. The global maximum is always included,
/// even when it sits on a plateau.
pub fn select_peaks<T: Scalar>(magnitudes: &[T], count: usize) -> Result<Vec<usize>> {
    let n = magnitudes.len();
    if n == 0 {
        return Err(Error::Empty("spectrum"));
    }
    if count == 0 {
        return Err(Error::invalid("peak count must be at least 1"));
    }
    let m = magnitudes;
    let mut candidates: Vec<usize> = (0..n)
        .filter(|&i| {
            let left = i == 0 || m[i] > m[i - 1];
            let right = i + 1 == n || m[i] > m[i + 1];
            left && right
        })
        .collect();
    let mut global = 0;
    for i in 1..n {
        if m[i] > m[global] {
            global = i;
        }
    }
    if !candidates.contains(&global) {
        candidates.push(global);
    }
    if count > candidates.len() {
        return Err(Error::invalid(format!(
            "requested {count} peaks but the spectrum has only {} local maxima",
            candidates.len()
        )));
    }
    candidates.sort_by(|&a, &b| m[b].partial_cmp(&m[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = candidates[..count].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// `count` frequencies `0, 1/L, 2/L, ...` for projected inputs spanning a range of length `L`.
pub fn frequency_grid<T: Scalar>(range_length: T, count: usize) -> Result<Vec<T>> {
    if !(range_length > T::zero()) || !range_length.is_finite() {
        return Err(Error::invalid("frequency grid range must be positive"));
    }
    Ok((0..count).map(|j| T::from_usize_lossy(j) / range_length).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dft_of_constant_and_cosine() {
        let c = dft_1d(&[2.5f64; 7]).unwrap();
        assert!((c[0].re - 2.5).abs() < 1e-12 && c[0].im.abs() < 1e-12);
        assert!(c[1..].iter().all(|z| z.norm() < 1e-12));
        let y: Vec<f64> = (0..8).map(|i| (std::f64::consts::TAU * i as f64 / 8.0).cos()).collect();
        let c = dft_1d(&y).unwrap();
        for (k, z) in c.iter().enumerate() {
            let expect = if k == 1 || k == 7 { 0.5 } else { 0.0 };
            assert!((z.norm() - expect).abs() < 1e-12, "k={k}");
        }
        assert!(dft_1d::<f64>(&[]).is_err());
    }

    #[test]
    fn nonuniform_single_sample() {
        let x = Matrix::new(1, 3, vec![0.0f64; 3]).unwrap();
        let p = [1.0, 0.0, 0.0];
        let c = nonuniform_ft(&x, &[1.0], &p, &[0.0, 0.7, 3.0]).unwrap();
        assert!(c.iter().all(|z| (z.re - 1.0).abs() < 1e-15 && z.im.abs() < 1e-15));
    }

    #[test]
    fn nonuniform_sine() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (std::f64::consts::TAU * x).sin()).collect();
        let c = nonuniform_ft_1d(&xs, &ys, &[1.0]).unwrap();
        assert!((c[0].norm() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn delta_f_cases() {
        let one = Complex::new(1.0, 0.0);
        assert_eq!(delta_f(one, one).unwrap(), 0.0);
        assert_eq!(delta_f(one, Complex::new(0.0, 0.0)).unwrap(), 1.0);
        assert_eq!(delta_f(one, Complex::new(1.0, 1.0)).unwrap(), 1.0);
        assert!(matches!(
            delta_f(Complex::new(1e-13, 0.0), one),
            Err(Error::UndefinedFrequency(_))
        ));
    }

    #[test]
    fn peak_selection_rules() {
        assert!(select_peaks(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
        assert_eq!(select_peaks(&[1.0, 2.0, 3.0, 4.0], 1).unwrap(), vec![3]);
        assert_eq!(select_peaks(&[0.0, 5.0, 0.0, 5.0, 0.0], 1).unwrap(), vec![1]);
        assert_eq!(select_peaks(&[0.0, 5.0, 0.0, 5.0, 0.0], 2).unwrap(), vec![1, 3]);
        assert_eq!(select_peaks(&[0.0, 2.0, 2.0, 0.0], 1).unwrap(), vec![1]);
    }

    #[test]
    fn three_sine_peaks() {
        let n = 201;
        let ys: Vec<f64> = (0..n)
            .map(|i| {
                let x = -3.14 + 6.28 * i as f64 / (n - 1) as f64;
                x.sin() + (3.0 * x).sin() + (5.0 * x).sin()
            })
            .collect();
        let c = dft_1d(&ys).unwrap();
        let mags: Vec<f64> = c[..=n / 2].iter().map(|z| z.norm()).collect();
        assert_eq!(select_peaks(&mags, 3).unwrap(), vec![1, 3, 5]);
    }

    #[test]
    fn basis_matches_direct_transform() {
        let xs: Vec<f64> = (0..37).map(|i| (i as f64 * 0.731).sin()).collect();
        let ys: Vec<f64> = (0..37).map(|i| (i as f64 * 0.19).cos()).collect();
        let ks = [0.0, 0.4, 1.7, 3.2];
        let basis = FourierBasis::new(&xs, &ks).unwrap();
        assert_eq!(basis.transform(&ys).unwrap(), nonuniform_ft_1d(&xs, &ys, &ks).unwrap());
        assert!(basis.transform(&ys[1..]).is_err());
    }

    proptest! {
        #[test]
        fn parseval(ys in prop::collection::vec(-10.0f64..10.0, 1..64)) {
            let c = dft_1d(&ys).unwrap();
            let lhs = ys.iter().map(|y| y * y).sum::<f64>() / ys.len() as f64;
            let rhs: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs));
        }

        #[test]
        fn nonuniform_reproduces_dft_on_uniform_grid(ys in prop::collection::vec(-3.0f64..3.0, 1..40)) {
            let n = ys.len();
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
            let ks: Vec<f64> = (0..n).map(|k| k as f64).collect();
            let a = nonuniform_ft_1d(&xs, &ys, &ks).unwrap();
            let b = dft_1d(&ys).unwrap();
            for (p, q) in a.iter().zip(&b) {
                prop_assert!((p - q).norm() < 1e-12);
            }
        }

        #[test]
        fn delta_f_is_scale_invariant(
            yr in -5.0f64..5.0, yi in -5.0f64..5.0,
            hr in -5.0f64..5.0, hi in -5.0f64..5.0,
            sr in -3.0f64..3.0, si in -3.0f64..3.0,
        ) {
            let y = Complex::new(yr, yi);
            let h = Complex::new(hr, hi);
            let s = Complex::new(sr, si);
            prop_assume!(y.norm() > 1e-3 && s.norm() > 1e-3);
            let a = delta_f(y, h).unwrap();
            let b = delta_f(y * s, h * s).unwrap();
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a));
        }

        #[test]
        fn peaks_invariant_under_positive_scaling(
            m in prop::collection::vec(0.0f64..1.0, 3..30),
            scale in 1e-3f64..1e3,
        ) {
            let scaled: Vec<f64> = m.iter().map(|v| v * scale).collect();
            prop_assert_eq!(select_peaks(&m, 1).unwrap(), select_peaks(&scaled, 1).unwrap());
        }
    }
}
