use serde::{Deserialize, Serialize};

use super::network::{Network, OutputHead};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `1/(2N) * sum_i |h(x_i) - y_i|^2`.
    Mse,
    /// `-1/N * sum_i log p_{y_i}(x_i)`; requires a softmax head.
    CrossEntropySoftmax,
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mse" => Ok(LossKind::Mse),
            "cross_entropy_softmax" | "cross_entropy" | "ce" => Ok(LossKind::CrossEntropySoftmax),
            other => Err(Error::invalid(format!("unknown loss '{other}'"))),
        }
    }
}

/// Training labels: real-valued rows, or class indices for a softmax head.
#[derive(Debug, Clone, Copy)]
pub enum Targets<'a, T> {
    Values(&'a Matrix<T>),
    Classes(&'a [usize]),
}

impl<T: Scalar> Targets<'_, T> {
    pub fn len(&self) -> usize {
        match self {
            Targets::Values(m) => m.rows(),
            Targets::Classes(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Gradient with respect to the flat parameter vector of a [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T>(pub Vec<T>);

impl<T: Scalar> Gradient<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> T {
        norm2(&self.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

fn check_targets<T: Scalar>(net: &Network<T>, n: usize, targets: &Targets<'_, T>, kind: LossKind) -> Result<()> {
    if targets.len() != n {
        return Err(Error::DimensionMismatch {
            context: "number of targets",
            expected: n,
            actual: targets.len(),
        });
    }
    match (kind, targets) {
        (LossKind::Mse, Targets::Values(y)) => {
            if y.cols() != net.output_dim() {
                return Err(Error::DimensionMismatch {
                    context: "target width",
                    expected: net.output_dim(),
                    actual: y.cols(),
                });
            }
            if !y.all_finite() {
                return Err(Error::NonFinite("targets"));
            }
        }
        (LossKind::Mse, Targets::Classes(_)) => {
            return Err(Error::invalid("mse loss needs real-valued targets"));
        }
        (LossKind::CrossEntropySoftmax, t) => {
            if net.head() != OutputHead::Softmax {
                return Err(Error::invalid("cross-entropy loss requires a softmax output head"));
            }
            match t {
                Targets::Classes(c) => {
                    if let Some(&bad) = c.iter().find(|&&c| c >= net.output_dim()) {
                        return Err(Error::invalid(format!(
                            "class index {bad} out of range for {} outputs",
                            net.output_dim()
                        )));
                    }
                }
                Targets::Values(y) => {
                    if y.cols() != net.output_dim() {
                        return Err(Error::DimensionMismatch {
                            context: "one-hot target width",
                            expected: net.output_dim(),
                            actual: y.cols(),
                        });
                    }
                    if !y.all_finite() {
                        return Err(Error::NonFinite("targets"));
                    }
                }
            }
        }
    }
    Ok(())
}

fn target_row<T: Scalar>(targets: &Targets<'_, T>, i: usize, width: usize, buf: &mut Vec<T>) {
    buf.clear();
    match targets {
        Targets::Values(y) => buf.extend_from_slice(y.row(i)),
        Targets::Classes(c) => {
            buf.resize(width, T::zero());
            buf[c[i]] = T::one();
        }
    }
}

/// Loss only.
pub fn loss<T: Scalar>(
    net: &Network<T>,
    inputs: &Matrix<T>,
    targets: &Targets<'_, T>,
    kind: LossKind,
) -> Result<T> {
    net.check_inputs(inputs)?;
    if inputs.rows() == 0 {
        return Err(Error::Empty("batch"));
    }
    check_targets(net, inputs.rows(), targets, kind)?;
    let cache = net.forward_cache(inputs);
    let (value, _) = evaluate(net, cache.output(), cache.pre.last().unwrap(), targets, kind, false);
    Ok(value)
}

/// Loss and exact gradient with respect to all parameters.
pub fn loss_and_grad<T: Scalar>(
    net: &Network<T>,
    inputs: &Matrix<T>,
    targets: &Targets<'_, T>,
    kind: LossKind,
) -> Result<(T, Gradient<T>)> {
    net.check_inputs(inputs)?;
    if inputs.rows() == 0 {
        return Err(Error::Empty("batch"));
    }
    check_targets(net, inputs.rows(), targets, kind)?;
    let cache = net.forward_cache(inputs);
    let (value, logits_bar) = evaluate(net, cache.output(), cache.pre.last().unwrap(), targets, kind, true);
    let grad = net.backprop(&cache, logits_bar.expect("requested"));
    Ok((value, Gradient(grad)))
}

/// Returns the loss and, if requested, `d loss / d logits`.
fn evaluate<T: Scalar>(
    net: &Network<T>,
    out: &Matrix<T>,
    logits: &Matrix<T>,
    targets: &Targets<'_, T>,
    kind: LossKind,
    want_grad: bool,
) -> (T, Option<Matrix<T>>) {
    let n = out.rows();
    let width = out.cols();
    let inv_n = T::one() / T::from_usize_lossy(n);
    let mut bar = if want_grad { Some(Matrix::zeros(n, width)) } else { None };
    let mut per_sample = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(width);
    for i in 0..n {
        target_row(targets, i, width, &mut y);
        let h = out.row(i);
        match kind {
            LossKind::Mse => {
                let mut s = T::zero();
                for o in 0..width {
                    let r = h[o] - y[o];
                    s += r * r;
                }
                per_sample.push(T::lit(0.5) * s);
                if let Some(bar) = bar.as_mut() {
                    let row = bar.row_mut(i);
                    for o in 0..width {
                        row[o] = (h[o] - y[o]) * inv_n;
                    }
                    if net.head() == OutputHead::Softmax {
                        // back through the softmax Jacobian: p * (g - <g, p>)
                        let gp: T = (0..width).map(|o| row[o] * h[o]).sum();
                        for o in 0..width {
                            row[o] = h[o] * (row[o] - gp);
                        }
                    }
                }
            }
            LossKind::CrossEntropySoftmax => {
                let z = logits.row(i);
                let max = z.iter().copied().fold(T::neg_infinity(), T::max);
                let lse = max + z.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
                let ysum: T = y.iter().copied().sum();
                let mut s = T::zero();
                for o in 0..width {
                    if y[o] != T::zero() {
                        s -= y[o] * (z[o] - lse);
                    }
                }
                per_sample.push(s);
                if let Some(bar) = bar.as_mut() {
                    let row = bar.row_mut(i);
                    for o in 0..width {
                        row[o] = (h[o] * ysum - y[o]) * inv_n;
                    }
                }
            }
        }
    }
    (crate::linalg::pairwise_sum(&per_sample) * inv_n, bar)
}

#[cfg(test)]
mod tests {
    use super::super::network::Activation;
    use super::*;

    fn numeric_grad(
        net: &Network<f64>,
        x: &Matrix<f64>,
        t: &Targets<'_, f64>,
        kind: LossKind,
    ) -> Vec<f64> {
        let eps = 1e-6;
        (0..net.num_params())
            .map(|p| {
                let mut plus = net.clone();
                plus.params_mut()[p] += eps;
                let mut minus = net.clone();
                minus.params_mut()[p] -= eps;
                (loss(&plus, x, t, kind).unwrap() - loss(&minus, x, t, kind).unwrap()) / (2.0 * eps)
            })
            .collect()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            let scale = x.abs().max(y.abs()).max(1e-3);
            assert!((x - y).abs() / scale < tol, "param {i}: {x} vs {y}");
        }
    }

    #[test]
    fn mse_gradient_matches_finite_differences() {
        for act in [Activation::Tanh, Activation::Relu] {
            let net = Network::<f64>::init(&[3, 6, 4, 2], act, OutputHead::Linear, 0.7, 11).unwrap();
            let x = Matrix::new(5, 3, (0..15).map(|i| ((i * 7) % 11) as f64 * 0.2 - 1.0).collect()).unwrap();
            let y = Matrix::new(5, 2, (0..10).map(|i| (i as f64).sin()).collect()).unwrap();
            let t = Targets::Values(&y);
            let (_, g) = loss_and_grad(&net, &x, &t, LossKind::Mse).unwrap();
            assert_close(g.as_slice(), &numeric_grad(&net, &x, &t, LossKind::Mse), 1e-5);
        }
    }

    #[test]
    fn cross_entropy_gradient_matches_finite_differences() {
        let net = Network::<f64>::init(&[4, 7, 3], Activation::Tanh, OutputHead::Softmax, 0.8, 5).unwrap();
        let x = Matrix::new(6, 4, (0..24).map(|i| ((i * 5) % 9) as f64 * 0.25 - 1.0).collect()).unwrap();
        let classes = [0, 2, 1, 1, 0, 2];
        let t = Targets::Classes(&classes);
        let (_, g) = loss_and_grad(&net, &x, &t, LossKind::CrossEntropySoftmax).unwrap();
        assert_close(g.as_slice(), &numeric_grad(&net, &x, &t, LossKind::CrossEntropySoftmax), 1e-5);
    }

    #[test]
    fn mse_through_softmax_gradient() {
        let net = Network::<f64>::init(&[2, 5, 3], Activation::Tanh, OutputHead::Softmax, 0.9, 2).unwrap();
        let x = Matrix::new(3, 2, vec![0.1, -0.4, 0.8, 0.3, -0.9, 0.5]).unwrap();
        let y = Matrix::new(3, 3, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]).unwrap();
        let t = Targets::Values(&y);
        let (_, g) = loss_and_grad(&net, &x, &t, LossKind::Mse).unwrap();
        assert_close(g.as_slice(), &numeric_grad(&net, &x, &t, LossKind::Mse), 1e-5);
    }

    #[test]
    fn exact_fit_has_zero_loss_and_gradient() {
        let net = Network::<f64>::init(&[1, 4, 1], Activation::Tanh, OutputHead::Linear, 0.5, 0).unwrap();
        let x = Matrix::column_vector(&[-1.0, 0.0, 0.5]);
        let y = net.forward(&x).unwrap();
        let (l, g) = loss_and_grad(&net, &x, &Targets::Values(&y), LossKind::Mse).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_targets_are_rejected() {
        let net = Network::<f64>::init(&[1, 4, 1], Activation::Tanh, OutputHead::Linear, 0.5, 0).unwrap();
        let x = Matrix::column_vector(&[0.0, 1.0]);
        let y = Matrix::column_vector(&[0.0]);
        assert!(matches!(
            loss_and_grad(&net, &x, &Targets::Values(&y), LossKind::Mse),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(loss_and_grad(&net, &x, &Targets::Classes(&[0, 0]), LossKind::CrossEntropySoftmax).is_err());
        assert!(loss_and_grad(&net, &x, &Targets::Classes(&[0, 0]), LossKind::Mse).is_err());
    }
}
