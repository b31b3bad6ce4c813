use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalDirection<T> {
    /// Unit vector; its largest-magnitude entry is positive.
    pub direction: Vec<T>,
    /// Top eigenvalue of the (1/n-normalised) input covariance.
    pub eigenvalue: T,
}

/// Mean-centred covariance `(1/n) X_c^T X_c`.
pub fn covariance<T: Scalar>(inputs: &Matrix<T>) -> Result<Matrix<T>> {
    let (n, d) = (inputs.rows(), inputs.cols());
    if n == 0 || d == 0 {
        return Err(Error::Empty("inputs"));
    }
    let mut mean = vec![T::zero(); d];
    for i in 0..n {
        for (m, &x) in mean.iter_mut().zip(inputs.row(i)) {
            *m += x;
        }
    }
    let inv_n = T::one() / T::from_usize_lossy(n);
    for m in &mut mean {
        *m *= inv_n;
    }
    let mut cov = Matrix::zeros(d, d);
    let mut centred = vec![T::zero(); d];
    for i in 0..n {
        for ((c, &x), &m) in centred.iter_mut().zip(inputs.row(i)).zip(&mean) {
            *c = x - m;
        }
        for a in 0..d {
            let ca = centred[a];
            if ca == T::zero() {
                continue;
            }
            let row = cov.row_mut(a);
            for b in a..d {
                row[b] += ca * centred[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov.get(a, b) * inv_n;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    Ok(cov)
}

/// First principal component by power iteration on the covariance matrix.
pub fn principal_direction<T: Scalar>(inputs: &Matrix<T>) -> Result<PrincipalDirection<T>> {
    if inputs.rows() < 2 {
        return Err(Error::Degenerate("need at least two input points".into()));
    }
    if !inputs.all_finite() {
        return Err(Error::NonFinite("inputs"));
    }
    let cov = covariance(inputs)?;
    let d = cov.rows();
    let trace: T = (0..d).map(|i| cov.get(i, i)).sum();
    if !(trace > T::zero()) {
        return Err(Error::Degenerate("all input points are identical".into()));
    }
    // start from a deterministic, generic-looking vector
    let mut v: Vec<T> = (0..d)
        .map(|i| T::one() + T::lit(0.618_033_988_7) * T::from_usize_lossy(i % 7))
        .collect();
    normalize(&mut v);
    let mut w = vec![T::zero(); d];
    let mut lambda = T::zero();
    let tol = T::epsilon() * T::lit(16.0);
    for _ in 0..100_000 {
        for (a, wa) in w.iter_mut().enumerate() {
            *wa = dot(cov.row(a), &v);
        }
        lambda = dot(&w, &v);
        let norm = normalize(&mut w);
        if norm == T::zero() {
            // start vector orthogonal to the range; fall back to a coordinate axis
            let mut best = 0;
            for i in 1..d {
                if cov.get(i, i) > cov.get(best, best) {
                    best = i;
                }
            }
            v.iter_mut().for_each(|x| *x = T::zero());
            v[best] = T::one();
            continue;
        }
        let change = w
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        std::mem::swap(&mut v, &mut w);
        if change < tol {
            break;
        }
    }
    let mut big = 0;
    for i in 1..d {
        if v[i].abs() > v[big].abs() {
            big = i;
        }
    }
    if v[big] < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(PrincipalDirection { direction: v, eigenvalue: lambda })
}

fn normalize<T: Scalar>(v: &mut [T]) -> T {
    let n = dot(v, v).sqrt();
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn axis_aligned_points() {
        let rows: Vec<Vec<f64>> = (1..=10).map(|t| vec![t as f64, 0.0]).collect();
        let p = principal_direction(&Matrix::from_rows(&rows).unwrap()).unwrap();
        assert!((p.direction[0] - 1.0).abs() < 1e-12 && p.direction[1].abs() < 1e-12);
    }

    #[test]
    fn diagonal_points() {
        let x = Matrix::from_rows(&[vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        let p = principal_direction(&x).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.direction[0] - s).abs() < 1e-12 && (p.direction[1] - s).abs() < 1e-12);
        assert!((p.eigenvalue - 2.0).abs() < 1e-12);
    }

    #[test]
    fn identical_points_error() {
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
        assert!(matches!(principal_direction(&x), Err(Error::Degenerate(_))));
    }

    #[test]
    fn unit_norm() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = Matrix::new(50, 7, (0..350).map(|_| rng.random::<f64>()).collect()).unwrap();
        let p = principal_direction(&x).unwrap();
        assert!((dot(&p.direction, &p.direction).sqrt() - 1.0).abs() < 1e-12);
    }
}
