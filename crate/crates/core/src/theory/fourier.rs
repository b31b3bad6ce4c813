//! Closed-form Fourier analysis of `h(x) = sum_j a_j tanh(w_j x + b_j)`.
//!
//! Transforms use the angular convention `f_hat(k) = int f(x) exp(-i k x) dx`.
//! Each unit's transform carries a factor `exp(-|pi k / 2 w_j|)` that
//! underflows for tiny `w_j`, so values can also be produced as a mantissa
//! times that factor, kept separately in log form.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, Network, OutputHead};
use crate::scalar::Scalar;

/// Parameters `theta = {a_j, w_j, b_j}` of the one-hidden-layer tanh network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneHiddenParams<T> {
    pub a: Vec<T>,
    pub w: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> OneHiddenParams<T> {
    pub fn new(a: Vec<T>, w: Vec<T>, b: Vec<T>) -> Result<Self> {
        if a.len() != w.len() || a.len() != b.len() {
            return Err(Error::invalid("a, w and b must have equal length"));
        }
        if a.is_empty() {
            return Err(Error::Empty("hidden units"));
        }
        Ok(Self { a, w, b })
    }

    pub fn units(&self) -> usize {
        self.a.len()
    }

    /// Reads `a, w, b` out of a `[1, m, 1]` tanh network; the output bias only
    /// affects `k = 0` and is ignored.
    pub fn from_network(net: &Network<T>) -> Result<Self> {
        let w = net.widths();
        if w.len() != 3 || w[0] != 1 || w[2] != 1 || net.activations()[0] != Activation::Tanh {
            return Err(Error::invalid("expected a [1, m, 1] tanh network"));
        }
        if net.head() != OutputHead::Linear {
            return Err(Error::invalid("expected a linear output head"));
        }
        Self::new(net.weights(1).to_vec(), net.weights(0).to_vec(), net.biases(0).to_vec())
    }

    pub fn to_network(&self) -> Result<Network<T>> {
        Network::one_hidden_tanh(&self.a, &self.w, &self.b)
    }

    fn check(&self, k: T) -> Result<()> {
        if k == T::zero() {
            return Err(Error::invalid("k = 0 is distributional and excluded"));
        }
        if self.w.iter().any(|&w| w == T::zero()) {
            return Err(Error::invalid("w_j = 0 makes the unit constant in x"));
        }
        Ok(())
    }
}

/// `z = pi k / (2 w)`.
fn z_of<T: Scalar>(k: T, w: T) -> T {
    T::PI() * k / (T::lit(2.0) * w)
}

/// Stable mantissa of `1 / (2 sinh z)`: returns `m` with `1/(2 sinh z) = m exp(-|z|)`.
fn inv_two_sinh_mantissa<T: Scalar>(z: T) -> T {
    z.signum() / (T::one() - (-T::lit(2.0) * z.abs()).exp())
}

/// `1 / (2 sinh z)`, without overflow for large `|z|`.
pub fn inv_two_sinh<T: Scalar>(z: T) -> T {
    inv_two_sinh_mantissa(z) * (-z.abs()).exp()
}

/// Mantissa of one unit's transform; the full value is `m * exp(-|z|)`.
fn unit_mantissa<T: Scalar>(a: T, w: T, b: T, k: T) -> Complex<T> {
    let z = z_of(k, w);
    let phase = Complex::from_polar(T::one(), b * k / w);
    // -(2 pi i a / |w|) e^{i b k / w} / (2 sinh z)
    let scale = -T::TAU() * a / w.abs() * inv_two_sinh_mantissa(z);
    Complex::new(T::zero(), scale) * phase
}

/// Transform of `a tanh(w x + b)` at `k != 0`.
pub fn tanh_unit_ft<T: Scalar>(a: T, w: T, b: T, k: T) -> Result<Complex<T>> {
    if w == T::zero() {
        return Err(Error::invalid("w = 0 makes the unit constant in x"));
    }
    if k == T::zero() {
        return Err(Error::invalid("k = 0 is distributional and excluded"));
    }
    Ok(unit_mantissa(a, w, b, k) * (-z_of(k, w).abs()).exp())
}

/// `h_hat(k)` of the whole network, the sum of the unit transforms.
pub fn network_ft<T: Scalar>(params: &OneHiddenParams<T>, k: T) -> Result<Complex<T>> {
    params.check(k)?;
    let mut s = Complex::new(T::zero(), T::zero());
    for j in 0..params.units() {
        s = s + tanh_unit_ft(params.a[j], params.w[j], params.b[j], k)?;
    }
    Ok(s)
}

/// Deviation `D(k) = h_hat(k) - f_hat(k)` in amplitude/phase form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqLossState<T> {
    pub k: T,
    pub h_hat: Complex<T>,
    pub target: Complex<T>,
    pub deviation: Complex<T>,
    pub amplitude: T,
    pub phase: T,
    /// `L(k) = |D(k)|^2 / 2`.
    pub loss: T,
}

impl<T: Scalar> FreqLossState<T> {
    pub fn new(params: &OneHiddenParams<T>, k: T, target: Complex<T>) -> Result<Self> {
        let h_hat = network_ft(params, k)?;
        let deviation = h_hat - target;
        let amplitude = deviation.norm();
        let phase = if amplitude > T::zero() { deviation.arg() } else { T::zero() };
        Ok(Self {
            k,
            h_hat,
            target,
            deviation,
            amplitude,
            phase,
            loss: T::lit(0.5) * amplitude * amplitude,
        })
    }
}

/// Per-unit gradients of `L(k)`, each stored as `mantissa * exp(-log_scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledFreqGrads<T> {
    pub da: Vec<T>,
    pub dw: Vec<T>,
    pub db: Vec<T>,
    /// `|pi k / 2 w_j|` for each unit.
    pub log_scale: Vec<T>,
}

impl<T: Scalar> ScaledFreqGrads<T> {
    /// Plain values (may underflow to zero).
    pub fn unscaled(&self) -> FreqGrads<T> {
        let f = |m: &[T]| -> Vec<T> {
            m.iter()
                .zip(&self.log_scale)
                .map(|(&v, &s)| v * (-s).exp())
                .collect()
        };
        FreqGrads {
            da: f(&self.da),
            dw: f(&self.dw),
            db: f(&self.db),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqGrads<T> {
    pub da: Vec<T>,
    pub dw: Vec<T>,
    pub db: Vec<T>,
}

/// Closed-form gradients in mantissa/scale form.
///
/// With `beta_j = b_j k / w_j`, `z_j = pi k / (2 w_j)`,
/// `E0 = sgn(w_j) A / (2 sinh z_j)` and `E1 = coth z_j`:
///
/// * `dL/da_j = (2 pi / w_j) sin(beta_j - phi) E0`
/// * `dL/dw_j = (2 pi a_j / w_j^2) E0 [ (z_j E1 - 1) sin(beta_j - phi) - (b_j k / w_j) cos(beta_j - phi) ]`
/// * `dL/db_j = (2 pi a_j k / w_j^2) cos(beta_j - phi) E0`
///
/// At `A = 0` the phase is undefined and every gradient is zero.
pub fn freq_grads_scaled<T: Scalar>(params: &OneHiddenParams<T>, state: &FreqLossState<T>) -> Result<ScaledFreqGrads<T>> {
    let k = state.k;
    params.check(k)?;
    let m = params.units();
    let mut out = ScaledFreqGrads {
        da: Vec::with_capacity(m),
        dw: Vec::with_capacity(m),
        db: Vec::with_capacity(m),
        log_scale: Vec::with_capacity(m),
    };
    let two_pi = T::TAU();
    for j in 0..m {
        let (a, w, b) = (params.a[j], params.w[j], params.b[j]);
        let z = z_of(k, w);
        out.log_scale.push(z.abs());
        if state.amplitude == T::zero() {
            out.da.push(T::zero());
            out.dw.push(T::zero());
            out.db.push(T::zero());
            continue;
        }
        let e0 = w.signum() * state.amplitude * inv_two_sinh_mantissa(z);
        let e1 = T::one() / z.tanh();
        let beta = b * k / w;
        let (s, c) = (beta - state.phase).sin_cos();
        out.da.push(two_pi / w * s * e0);
        out.dw.push(two_pi * a / (w * w) * e0 * ((z * e1 - T::one()) * s - b * k / w * c));
        out.db.push(two_pi * a * k / (w * w) * c * e0);
    }
    Ok(out)
}

/// `L(k)` and its gradients with respect to every `a_j, w_j, b_j`.
pub fn freq_loss_and_grads<T: Scalar>(
    params: &OneHiddenParams<T>,
    k: T,
    target: Complex<T>,
) -> Result<(FreqLossState<T>, FreqGrads<T>)> {
    let state = FreqLossState::new(params, k, target)?;
    let g = freq_grads_scaled(params, &state)?.unscaled();
    Ok((state, g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn standard_tanh_transform() {
        for k in [0.3, 1.0, 2.5, -1.7] {
            let v = tanh_unit_ft(1.0, 1.0, 0.0, k).unwrap();
            let expect = Complex::new(0.0, -std::f64::consts::PI / (std::f64::consts::PI * k / 2.0).sinh());
            assert!((v - expect).norm() < 1e-14 * expect.norm(), "k={k}");
        }
    }

    #[test]
    fn conjugate_symmetry_and_linearity() {
        let p = OneHiddenParams::new(vec![0.4, -1.1], vec![0.7, -1.3], vec![0.2, 0.9]).unwrap();
        let h = network_ft(&p, 1.3).unwrap();
        let hm = network_ft(&p, -1.3).unwrap();
        assert!((h.conj() - hm).norm() < 1e-15);
        let p2 = OneHiddenParams::new(vec![0.8, -2.2], p.w.clone(), p.b.clone()).unwrap();
        assert!((network_ft(&p2, 1.3).unwrap() - h * 2.0).norm() < 1e-15);
    }

    #[test]
    fn singular_arguments() {
        assert!(tanh_unit_ft(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(tanh_unit_ft(1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tiny_widths_do_not_overflow() {
        let v = tanh_unit_ft(1.0f64, 1e-4, 0.3, 2.0).unwrap();
        assert_eq!(v, Complex::new(0.0, 0.0));
        let p = OneHiddenParams::new(vec![1.0f64], vec![1e-4], vec![0.3]).unwrap();
        let st = FreqLossState::new(&p, 2.0, Complex::new(1.0, 0.0)).unwrap();
        let g = freq_grads_scaled(&p, &st).unwrap();
        assert!(g.da[0].is_finite() && g.da[0] != 0.0);
        assert!((g.log_scale[0] - std::f64::consts::PI * 2.0 / 2e-4).abs() < 1e-6);
    }

    fn loss_at(p: &OneHiddenParams<f64>, k: f64, f: Complex<f64>) -> f64 {
        FreqLossState::new(p, k, f).unwrap().loss
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let m = 4;
            let w: Vec<f64> = (0..m)
                .map(|_| rng.random_range(0.2..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let a: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = OneHiddenParams::new(a, w, b).unwrap();
            let k = [0.5, 1.0, 2.0][rng.random_range(0..3)];
            let h = network_ft(&p, k).unwrap();
            let f = h * Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (_, g) = freq_loss_and_grads(&p, k, f).unwrap();
            let eps = 1e-6;
            let check = |an: f64, mut bump: Box<dyn FnMut(&mut OneHiddenParams<f64>, f64)>| {
                let mut hi = p.clone();
                bump(&mut hi, eps);
                let mut lo = p.clone();
                bump(&mut lo, -eps);
                let fd = (loss_at(&hi, k, f) - loss_at(&lo, k, f)) / (2.0 * eps);
                assert!((fd - an).abs() <= 1e-6 * fd.abs().max(an.abs()) + 1e-14, "{fd} vs {an}");
            };
            for j in 0..m {
                check(g.da[j], Box::new(move |q, e| q.a[j] += e));
                check(g.dw[j], Box::new(move |q, e| q.w[j] += e));
                check(g.db[j], Box::new(move |q, e| q.b[j] += e));
            }
        }
    }

    #[test]
    fn zero_deviation_gives_zero_gradients() {
        let p = OneHiddenParams::new(vec![0.5, 1.0], vec![0.3, -0.6], vec![0.1, 0.2]).unwrap();
        let h = network_ft(&p, 1.0).unwrap();
        let (st, g) = freq_loss_and_grads(&p, 1.0, h).unwrap();
        assert_eq!(st.loss, 0.0);
        assert!(g.da.iter().chain(&g.dw).chain(&g.db).all(|&v| v == 0.0));
    }

    #[test]
    fn shrinking_widths_recover_target_amplitude() {
        let f = Complex::new(0.6, -0.8);
        let mut prev = f64::INFINITY;
        for s in [1.0f64, 0.3, 0.1, 0.03] {
            let p = OneHiddenParams::new(vec![1.0f64; 3], vec![s, -0.7 * s, 0.5 * s], vec![0.5; 3]).unwrap();
            let st = FreqLossState::new(&p, 1.0, f).unwrap();
            let gap = (st.amplitude - 1.0).abs();
            assert!(gap <= prev);
            prev = gap;
        }
        assert!(prev < 1e-12);
    }
}
