use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(T::zero()),
        }
    }

    /// sigma'(z), given the pre-activation `z` and the activation value `a = sigma(z)`.
    #[inline]
    pub fn derivative<T: Scalar>(self, z: T, a: T) -> T {
        match self {
            Activation::Tanh => T::one() - a * a,
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// sigma''(z); zero almost everywhere for ReLU.
    #[inline]
    pub fn second_derivative<T: Scalar>(self, _z: T, a: T) -> T {
        match self {
            Activation::Tanh => -T::lit(2.0) * a * (T::one() - a * a),
            Activation::Relu => T::zero(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::invalid(format!("unknown activation '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputHead {
    Linear,
    Softmax,
}

impl std::str::FromStr for OutputHead {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(OutputHead::Linear),
            "softmax" => Ok(OutputHead::Softmax),
            other => Err(Error::invalid(format!("unknown output head '{other}'"))),
        }
    }
}

/// Fully-connected feed-forward network with all parameters in one flat buffer.
///
/// Layout, per layer `l` in order: the `(width[l+1] x width[l])` weight matrix
/// (row-major), followed by the `width[l+1]` biases. Gradients and optimizer
/// state share this layout.
///
/// For the one-hidden-layer theory case (`[1, m, 1]`, tanh, linear head) the
/// hidden weights are `w_j`, hidden biases `b_j` and output weights `a_j`; the
/// output bias is an extra scalar offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    widths: Vec<usize>,
    activations: Vec<Activation>,
    head: OutputHead,
    params: Vec<T>,
    offsets: Vec<usize>,
}

fn layout(widths: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(widths.len() - 1);
    let mut total = 0;
    for w in widths.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    (offsets, total)
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.is_empty() {
        return Err(Error::Empty("layer widths"));
    }
    if widths.len() < 2 {
        return Err(Error::invalid("a network needs an input and an output width"));
    }
    if widths.iter().any(|&w| w == 0) {
        return Err(Error::invalid("layer widths must be positive"));
    }
    Ok(())
}

impl<T: Scalar> Network<T> {
    /// Network with every parameter zero.
    pub fn zeros(widths: &[usize], activation: Activation, head: OutputHead) -> Result<Self> {
        check_widths(widths)?;
        let (offsets, total) = layout(widths);
        Ok(Self {
            widths: widths.to_vec(),
            activations: vec![activation; widths.len() - 2],
            head,
            params: vec![T::zero(); total],
            offsets,
        })
    }

    /// Gaussian initialisation: every weight and bias i.i.d. `Normal(0, init_std^2)`.
    pub fn init(
        widths: &[usize],
        activation: Activation,
        head: OutputHead,
        init_std: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(init_std > 0.0) || !init_std.is_finite() {
            return Err(Error::invalid(format!(
                "init_std must be positive and finite, got {init_std}"
            )));
        }
        let mut net = Self::zeros(widths, activation, head)?;
        let normal = Normal::new(0.0, init_std).map_err(|e| Error::invalid(e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in &mut net.params {
            *p = T::lit(normal.sample(&mut rng));
        }
        Ok(net)
    }

    /// Builds a network from an explicit flat parameter vector.
    pub fn from_params(
        widths: &[usize],
        activations: Vec<Activation>,
        head: OutputHead,
        params: Vec<T>,
    ) -> Result<Self> {
        check_widths(widths)?;
        if activations.len() != widths.len() - 2 {
            return Err(Error::DimensionMismatch {
                context: "hidden activations",
                expected: widths.len() - 2,
                actual: activations.len(),
            });
        }
        let (offsets, total) = layout(widths);
        if params.len() != total {
            return Err(Error::DimensionMismatch {
                context: "parameter vector",
                expected: total,
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        Ok(Self {
            widths: widths.to_vec(),
            activations,
            head,
            params,
            offsets,
        })
    }

    /// One-hidden-layer tanh net `h(x) = sum_j a_j tanh(w_j x + b_j)` with zero output bias.
    pub fn one_hidden_tanh(a: &[T], w: &[T], b: &[T]) -> Result<Self> {
        let m = a.len();
        if w.len() != m || b.len() != m {
            return Err(Error::invalid("a, w, b must have equal length"));
        }
        let mut params = Vec::with_capacity(3 * m + 1);
        params.extend_from_slice(w);
        params.extend_from_slice(b);
        params.extend_from_slice(a);
        params.push(T::zero());
        Self::from_params(&[1, m, 1], vec![Activation::Tanh], OutputHead::Linear, params)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn head(&self) -> OutputHead {
        self.head
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().expect("non-empty widths")
    }

    pub fn num_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Number of multiply-adds in the weight matrices (no biases).
    pub fn num_weights(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn weights(&self, layer: usize) -> &[T] {
        let o = self.offsets[layer];
        &self.params[o..o + self.widths[layer] * self.widths[layer + 1]]
    }

    pub fn biases(&self, layer: usize) -> &[T] {
        let o = self.offsets[layer] + self.widths[layer] * self.widths[layer + 1];
        &self.params[o..o + self.widths[layer + 1]]
    }

    pub(crate) fn weight_range(&self, layer: usize) -> std::ops::Range<usize> {
        let o = self.offsets[layer];
        o..o + self.widths[layer] * self.widths[layer + 1]
    }

    pub(crate) fn bias_range(&self, layer: usize) -> std::ops::Range<usize> {
        let o = self.offsets[layer] + self.widths[layer] * self.widths[layer + 1];
        o..o + self.widths[layer + 1]
    }

    pub(crate) fn check_inputs(&self, inputs: &Matrix<T>) -> Result<()> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "network input",
                expected: self.input_dim(),
                actual: inputs.cols(),
            });
        }
        if !inputs.all_finite() {
            return Err(Error::NonFinite("network input"));
        }
        Ok(())
    }

    /// `out[i, :] = W a[i, :] + b` for one layer.
    pub(crate) fn affine(&self, layer: usize, a: &Matrix<T>) -> Matrix<T> {
        let w = self.weights(layer);
        let b = self.biases(layer);
        let (fan_in, fan_out) = (self.widths[layer], self.widths[layer + 1]);
        let mut z = Matrix::zeros(a.rows(), fan_out);
        for i in 0..a.rows() {
            let ai = a.row(i);
            let zi = z.row_mut(i);
            for o in 0..fan_out {
                zi[o] = dot(&w[o * fan_in..(o + 1) * fan_in], ai) + b[o];
            }
        }
        z
    }

    /// `out[i, :] = W v[i, :]` (no bias), used for tangents.
    pub(crate) fn linear(&self, layer: usize, v: &Matrix<T>) -> Matrix<T> {
        let w = self.weights(layer);
        let (fan_in, fan_out) = (self.widths[layer], self.widths[layer + 1]);
        let mut z = Matrix::zeros(v.rows(), fan_out);
        for i in 0..v.rows() {
            let vi = v.row(i);
            let zi = z.row_mut(i);
            for o in 0..fan_out {
                zi[o] = dot(&w[o * fan_in..(o + 1) * fan_in], vi);
            }
        }
        z
    }

    /// Accumulates `W^T`-products: returns `upstream W` (shape batch x fan_in).
    pub(crate) fn backprop_input(&self, layer: usize, upstream: &Matrix<T>) -> Matrix<T> {
        let w = self.weights(layer);
        let (fan_in, fan_out) = (self.widths[layer], self.widths[layer + 1]);
        let mut out = Matrix::zeros(upstream.rows(), fan_in);
        for i in 0..upstream.rows() {
            let ui = upstream.row(i);
            let oi = out.row_mut(i);
            for o in 0..fan_out {
                let u = ui[o];
                if u != T::zero() {
                    axpy(u, &w[o * fan_in..(o + 1) * fan_in], oi);
                }
            }
        }
        out
    }

    /// Adds `upstream^T a` into the weight gradient and column sums into the bias gradient.
    pub(crate) fn accumulate_param_grad(
        &self,
        layer: usize,
        upstream: &Matrix<T>,
        a: &Matrix<T>,
        with_bias: bool,
        grad: &mut [T],
    ) {
        let fan_in = self.widths[layer];
        let fan_out = self.widths[layer + 1];
        let wr = self.weight_range(layer);
        let br = self.bias_range(layer);
        for i in 0..upstream.rows() {
            let ui = upstream.row(i);
            let ai = a.row(i);
            let gw = &mut grad[wr.clone()];
            for o in 0..fan_out {
                let u = ui[o];
                if u != T::zero() {
                    axpy(u, ai, &mut gw[o * fan_in..(o + 1) * fan_in]);
                }
            }
            if with_bias {
                let gb = &mut grad[br.clone()];
                for o in 0..fan_out {
                    gb[o] += ui[o];
                }
            }
        }
    }

    /// Pre-activations and activations of every layer; `acts[0]` is the input.
    pub(crate) fn forward_cache(&self, inputs: &Matrix<T>) -> ForwardCache<T> {
        let mut pre = Vec::with_capacity(self.num_layers());
        let mut acts = Vec::with_capacity(self.num_layers() + 1);
        acts.push(inputs.clone());
        for l in 0..self.num_layers() {
            let z = self.affine(l, &acts[l]);
            let a = if l + 1 < self.num_layers() {
                let act = self.activations[l];
                z.map(|v| act.apply(v))
            } else {
                match self.head {
                    OutputHead::Linear => z.clone(),
                    OutputHead::Softmax => softmax_rows(&z),
                }
            };
            pre.push(z);
            acts.push(a);
        }
        ForwardCache { pre, acts }
    }

    /// Batched forward pass; rows of `inputs` are samples.
    pub fn forward(&self, inputs: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_inputs(inputs)?;
        let mut a = inputs.clone();
        for l in 0..self.num_layers() {
            let z = self.affine(l, &a);
            a = if l + 1 < self.num_layers() {
                let act = self.activations[l];
                z.map(|v| act.apply(v))
            } else {
                match self.head {
                    OutputHead::Linear => z,
                    OutputHead::Softmax => softmax_rows(&z),
                }
            };
        }
        Ok(a)
    }

    /// Forward pass for scalar-input, scalar-output networks.
    pub fn forward_scalar(&self, xs: &[T]) -> Result<Vec<T>> {
        if self.output_dim() != 1 {
            return Err(Error::DimensionMismatch {
                context: "scalar network output",
                expected: 1,
                actual: self.output_dim(),
            });
        }
        Ok(self.forward(&Matrix::column_vector(xs))?.into_vec())
    }

    /// Backpropagates `d loss / d logits` of the last layer into a parameter gradient.
    pub(crate) fn backprop(&self, cache: &ForwardCache<T>, logits_bar: Matrix<T>) -> Vec<T> {
        let mut grad = vec![T::zero(); self.num_params()];
        let mut upstream = logits_bar;
        for l in (0..self.num_layers()).rev() {
            self.accumulate_param_grad(l, &upstream, &cache.acts[l], true, &mut grad);
            if l == 0 {
                break;
            }
            let mut a_bar = self.backprop_input(l, &upstream);
            let act = self.activations[l - 1];
            let z = &cache.pre[l - 1];
            let a = &cache.acts[l];
            for ((g, &zv), &av) in a_bar
                .as_mut_slice()
                .iter_mut()
                .zip(z.as_slice())
                .zip(a.as_slice())
            {
                *g *= act.derivative(zv, av);
            }
            upstream = a_bar;
        }
        grad
    }
}

pub(crate) struct ForwardCache<T> {
    pub(crate) pre: Vec<Matrix<T>>,
    pub(crate) acts: Vec<Matrix<T>>,
}

impl<T: Scalar> ForwardCache<T> {
    pub(crate) fn output(&self) -> &Matrix<T> {
        self.acts.last().expect("at least the input")
    }
}

/// Row-wise numerically stable softmax.
pub fn softmax_rows<T: Scalar>(z: &Matrix<T>) -> Matrix<T> {
    let mut out = z.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = Network::<f64>::init(&[2, 5, 3], Activation::Tanh, OutputHead::Linear, 0.1, 7).unwrap();
        let b = Network::<f64>::init(&[2, 5, 3], Activation::Tanh, OutputHead::Linear, 0.1, 7).unwrap();
        let c = Network::<f64>::init(&[2, 5, 3], Activation::Tanh, OutputHead::Linear, 0.1, 8).unwrap();
        assert_eq!(a.params(), b.params());
        assert_ne!(a.params(), c.params());
        assert_eq!(a.num_params(), 2 * 5 + 5 + 5 * 3 + 3);
    }

    #[test]
    fn init_rejects_bad_arguments() {
        assert!(matches!(
            Network::<f64>::init(&[], Activation::Tanh, OutputHead::Linear, 0.1, 0),
            Err(Error::Empty(_))
        ));
        assert!(Network::<f64>::init(&[1, 0, 1], Activation::Tanh, OutputHead::Linear, 0.1, 0).is_err());
        assert!(Network::<f64>::init(&[1, 3, 1], Activation::Tanh, OutputHead::Linear, 0.0, 0).is_err());
        assert!(Network::<f64>::init(&[1, 3, 1], Activation::Tanh, OutputHead::Linear, -1.0, 0).is_err());
    }

    #[test]
    fn tiny_init_gives_zero_output() {
        let net = Network::<f64>::init(&[1, 20, 1], Activation::Tanh, OutputHead::Linear, 1e-300, 3).unwrap();
        let out = net.forward_scalar(&[-1.0, 0.0, 2.5]).unwrap();
        assert!(out.iter().all(|&v| v.abs() < 1e-290));
        let zero = Network::<f64>::zeros(&[1, 20, 1], Activation::Tanh, OutputHead::Linear).unwrap();
        assert!(zero.forward_scalar(&[0.3]).unwrap()[0] == 0.0);
    }

    #[test]
    fn hidden_weight_std_matches_init_std() {
        let net = Network::<f64>::init(&[1, 200, 1], Activation::Tanh, OutputHead::Linear, 0.1, 1).unwrap();
        let w = net.weights(0);
        let n = w.len() as f64;
        let mean = w.iter().sum::<f64>() / n;
        let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - 0.1).abs() < 0.01, "std {}", var.sqrt());
    }

    #[test]
    fn single_unit_values() {
        let net = Network::<f64>::one_hidden_tanh(&[1.0], &[1.0], &[0.0]).unwrap();
        assert_eq!(net.forward_scalar(&[0.0]).unwrap(), vec![0.0]);
        let big = Network::<f64>::one_hidden_tanh(&[2.0], &[1.0], &[0.0]).unwrap();
        let h = big.forward_scalar(&[50.0]).unwrap()[0];
        assert!((h - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_per_term_tanh_sum() {
        let a = [0.3, -1.2, 0.7];
        let w = [1.5, -0.4, 2.2];
        let b = [0.1, 0.9, -0.5];
        let net = Network::<f64>::one_hidden_tanh(&a, &w, &b).unwrap();
        let x = 0.5;
        let oracle: f64 = (0..3).map(|j| a[j] * (w[j] * x + b[j]).tanh()).sum();
        let h = net.forward_scalar(&[x]).unwrap()[0];
        assert!((h - oracle).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_bad_input() {
        let net = Network::<f64>::init(&[2, 3, 1], Activation::Relu, OutputHead::Linear, 0.1, 0).unwrap();
        let bad = Matrix::new(1, 3, vec![0.0; 3]).unwrap();
        assert!(matches!(net.forward(&bad), Err(Error::DimensionMismatch { .. })));
        let nan = Matrix::new(1, 2, vec![f64::NAN, 0.0]).unwrap();
        assert!(matches!(net.forward(&nan), Err(Error::NonFinite(_))));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let net = Network::<f64>::init(&[3, 8, 5], Activation::Tanh, OutputHead::Softmax, 2.0, 4).unwrap();
        let x = Matrix::new(4, 3, (0..12).map(|i| i as f64 * 0.3 - 1.0).collect()).unwrap();
        let p = net.forward(&x).unwrap();
        for i in 0..p.rows() {
            let s: f64 = p.row(i).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(p.row(i).iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let net = Network::<f32>::init(&[1, 4, 1], Activation::Tanh, OutputHead::Linear, 0.5, 2).unwrap();
        let out = net.forward_scalar(&[0.25f32]).unwrap();
        assert!(out[0].is_finite());
    }
}
