use num_complex::Complex;

use super::problem::{Grid, PoissonProblem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::spectral::FourierBasis;

/// Central-difference system `A u = rhs` on the `n - 1` interior nodes.
///
/// `A` has 2 on the diagonal and -1 off it; `rhs_i = dx^2 g(x_i)` with the
/// Dirichlet values folded into the first and last entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
    pub rhs: Vec<T>,
}

pub fn assemble_system<T: Scalar>(problem: &PoissonProblem<T>, n: usize) -> Result<(Grid<T>, TridiagonalSystem<T>)> {
    let grid = problem.grid(n)?;
    let dx = grid.dx();
    let m = n - 1;
    let mut rhs: Vec<T> = (1..n).map(|i| dx * dx * problem.source(grid.node(i))).collect();
    rhs[0] += problem.left;
    rhs[m - 1] += problem.right;
    Ok((
        grid,
        TridiagonalSystem {
            diag: vec![T::lit(2.0); m],
            off: vec![-T::one(); m.saturating_sub(1)],
            rhs,
        },
    ))
}

impl<T: Scalar> TridiagonalSystem<T> {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let m = self.size();
        let mut a = Matrix::zeros(m, m);
        for i in 0..m {
            a.set(i, i, self.diag[i]);
            if i + 1 < m {
                a.set(i, i + 1, self.off[i]);
                a.set(i + 1, i, self.off[i]);
            }
        }
        a
    }

    pub fn apply(&self, u: &[T]) -> Vec<T> {
        let m = self.size();
        (0..m)
            .map(|i| {
                let mut v = self.diag[i] * u[i];
                if i > 0 {
                    v += self.off[i - 1] * u[i - 1];
                }
                if i + 1 < m {
                    v += self.off[i] * u[i + 1];
                }
                v
            })
            .collect()
    }

    /// `max_i |(A u - rhs)_i|`.
    pub fn residual_sup(&self, u: &[T]) -> T {
        self.apply(u)
            .iter()
            .zip(&self.rhs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max)
    }

    /// Direct solve by forward elimination and back substitution.
    pub fn solve(&self) -> Result<Vec<T>> {
        let m = self.size();
        let mut c = vec![T::zero(); m];
        let mut d = vec![T::zero(); m];
        let mut denom = self.diag[0];
        if denom == T::zero() {
            return Err(Error::Degenerate("zero pivot".into()));
        }
        c[0] = if m > 1 { self.off[0] / denom } else { T::zero() };
        d[0] = self.rhs[0] / denom;
        for i in 1..m {
            denom = self.diag[i] - self.off[i - 1] * c[i - 1];
            if denom == T::zero() {
                return Err(Error::Degenerate("zero pivot".into()));
            }
            c[i] = if i + 1 < m { self.off[i] / denom } else { T::zero() };
            d[i] = (self.rhs[i] - self.off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            let next = d[i + 1];
            d[i] -= c[i] * next;
        }
        Ok(d)
    }
}

/// Jacobi iterate on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiState<T> {
    pub u: Vec<T>,
    pub t: usize,
    rhs: Vec<T>,
    scratch: Vec<T>,
}

impl<T: Scalar> JacobiState<T> {
    pub fn new(system: &TridiagonalSystem<T>, initial: Vec<T>) -> Result<Self> {
        if initial.len() != system.size() {
            return Err(Error::DimensionMismatch {
                context: "jacobi initial iterate",
                expected: system.size(),
                actual: initial.len(),
            });
        }
        Ok(Self {
            scratch: vec![T::zero(); initial.len()],
            u: initial,
            t: 0,
            rhs: system.rhs.clone(),
        })
    }

    pub fn zero(system: &TridiagonalSystem<T>) -> Self {
        Self::new(system, vec![T::zero(); system.size()]).expect("matching length")
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    /// One synchronous sweep `u_i <- (u_{i-1} + u_{i+1} + rhs_i) / 2`.
    pub fn sweep(&mut self) {
        let m = self.u.len();
        let half = T::lit(0.5);
        let u = &self.u;
        let out = &mut self.scratch;
        if m == 1 {
            out[0] = half * self.rhs[0];
        } else {
            out[0] = half * (u[1] + self.rhs[0]);
            for i in 1..m - 1 {
                out[i] = half * (u[i - 1] + u[i + 1] + self.rhs[i]);
            }
            out[m - 1] = half * (u[m - 2] + self.rhs[m - 1]);
        }
        std::mem::swap(&mut self.u, &mut self.scratch);
        self.t += 1;
    }
}

/// Functional form of a single sweep.
pub fn jacobi_iterate<T: Scalar>(state: &JacobiState<T>) -> JacobiState<T> {
    let mut next = state.clone();
    next.sweep();
    next
}

/// Eigenpairs of the Jacobi iteration matrix `D^{-1}(L + U)` for `n` intervals.
#[derive(Debug, Clone)]
pub struct JacobiSpectrum<T> {
    pub n: usize,
    /// `lambda_k = cos(k pi / n)` for `k = 1..n-1` (entry `k - 1`).
    pub eigenvalues: Vec<T>,
}

impl<T: Scalar> JacobiSpectrum<T> {
    /// `v_{k,i} = sin(i k pi / n)` for `i = 1..n-1`.
    pub fn eigenvector(&self, k: usize) -> Vec<T> {
        let n = T::from_usize_lossy(self.n);
        (1..self.n)
            .map(|i| (T::from_usize_lossy(i * k % (2 * self.n)) * T::PI() / n).sin())
            .collect()
    }

    /// Coefficients `alpha_k` of `e = sum_k alpha_k v_k` (the `v_k` are orthogonal with norm^2 `n/2`).
    pub fn mode_coefficients(&self, e: &[T]) -> Result<Vec<T>> {
        if e.len() != self.n - 1 {
            return Err(Error::DimensionMismatch {
                context: "interior vector",
                expected: self.n - 1,
                actual: e.len(),
            });
        }
        let scale = T::lit(2.0) / T::from_usize_lossy(self.n);
        Ok((1..self.n)
            .map(|k| {
                let v = self.eigenvector(k);
                scale * v.iter().zip(e).map(|(&a, &b)| a * b).sum::<T>()
            })
            .collect())
    }
}

/// Low frequencies converge slowest: `|lambda_k|` falls with `k` for `k < n/2`.
pub fn jacobi_spectrum<T: Scalar>(n: usize) -> Result<JacobiSpectrum<T>> {
    if n < 2 {
        return Err(Error::invalid(format!("jacobi spectrum needs n >= 2, got {n}")));
    }
    let nn = T::from_usize_lossy(n);
    Ok(JacobiSpectrum {
        n,
        eigenvalues: (1..n).map(|k| (T::from_usize_lossy(k) * T::PI() / nn).cos()).collect(),
    })
}

/// Upper bound on how far Jacobi sweeps can move `Delta_F` at one frequency.
///
/// With the error at handoff expanded as `sum_m alpha_m v_m`, after `t` sweeps
/// `|Delta_F^t - Delta_F^0| <= sum_m |alpha_m| |1 - lambda_m^t| |v_hat_m(k)| / |y_hat(k)|`.
#[derive(Debug, Clone)]
pub struct ContractionBound<T> {
    weights: Vec<T>,
    eigenvalues: Vec<T>,
    target_magnitude: T,
}

impl<T: Scalar> ContractionBound<T> {
    /// `initial` and `fixed_point` are interior vectors; `xs` are all grid nodes.
    pub fn new(
        spectrum: &JacobiSpectrum<T>,
        initial: &[T],
        fixed_point: &[T],
        xs: &[T],
        frequency: T,
        target: Complex<T>,
    ) -> Result<Self> {
        let e: Vec<T> = initial.iter().zip(fixed_point).map(|(&a, &b)| a - b).collect();
        let alpha = spectrum.mode_coefficients(&e)?;
        let basis = FourierBasis::new(xs, &[frequency])?;
        let mut padded = vec![T::zero(); spectrum.n + 1];
        let mut weights = Vec::with_capacity(alpha.len());
        for (m, &a) in alpha.iter().enumerate() {
            let v = spectrum.eigenvector(m + 1);
            padded[1..spectrum.n].copy_from_slice(&v);
            let vhat = basis.transform(&padded)?[0].norm();
            weights.push(a.abs() * vhat);
        }
        Ok(Self {
            weights,
            eigenvalues: spectrum.eigenvalues.clone(),
            target_magnitude: target.norm(),
        })
    }

    pub fn bound(&self, sweeps: usize) -> T {
        let t = sweeps.min(i32::MAX as usize) as i32;
        let s: T = self
            .weights
            .iter()
            .zip(&self.eigenvalues)
            .map(|(&w, &l)| w * (T::one() - l.powi(t)).abs())
            .sum();
        s / self.target_magnitude
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_source(n: usize) -> (Grid<f64>, TridiagonalSystem<f64>) {
        let p = PoissonProblem::new("ones", -1.0, 1.0, 0.0, 0.0, |_| 1.0).unwrap();
        assemble_system(&p, n).unwrap()
    }

    #[test]
    fn small_systems() {
        let (_, s) = unit_source(2);
        assert_eq!(s.to_dense().as_slice(), &[2.0]);
        let (_, s) = unit_source(4);
        assert_eq!(
            s.to_dense().as_slice(),
            &[2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]
        );
        assert_eq!(s.rhs, vec![0.25; 3]);
        let p = PoissonProblem::new("ones", -1.0, 1.0, 0.0, 0.0, |_| 1.0).unwrap();
        assert!(assemble_system(&p, 1).is_err());
    }

    #[test]
    fn single_unknown_converges_in_one_sweep() {
        let (_, s) = unit_source(2);
        let next = jacobi_iterate(&JacobiState::zero(&s));
        assert_eq!(next.u, vec![s.rhs[0] / 2.0]);
    }

    #[test]
    fn exact_solution_is_a_fixed_point() {
        let (_, s) = unit_source(50);
        let u = s.solve().unwrap();
        assert!(s.residual_sup(&u) < 1e-14);
        let next = jacobi_iterate(&JacobiState::new(&s, u.clone()).unwrap());
        for (a, b) in next.u.iter().zip(&u) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_for_n4() {
        let sp = jacobi_spectrum::<f64>(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in sp.eigenvalues.iter().zip([h, 0.0, -h]) {
            assert!((a - b).abs() < 1e-15);
        }
        let sp = jacobi_spectrum::<f64>(20).unwrap();
        for k in 1..20 {
            assert!((sp.eigenvalues[k - 1] + sp.eigenvalues[20 - k - 1]).abs() < 1e-15);
        }
        for k in 1..9 {
            assert!(sp.eigenvalues[k - 1].abs() > sp.eigenvalues[k].abs());
        }
    }

    #[test]
    fn mode_coefficients_invert_expansion() {
        let sp = jacobi_spectrum::<f64>(9).unwrap();
        let alpha: Vec<f64> = (1..9).map(|k| (k as f64).sqrt() - 1.5).collect();
        let mut e = vec![0.0; 8];
        for (k, &a) in alpha.iter().enumerate() {
            for (ei, vi) in e.iter_mut().zip(sp.eigenvector(k + 1)) {
                *ei += a * vi;
            }
        }
        let back = sp.mode_coefficients(&e).unwrap();
        for (a, b) in alpha.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
