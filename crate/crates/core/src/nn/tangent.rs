//! Forward-mode input derivatives and reverse-mode gradients through them.
//!
//! Losses that depend on `h'(x)` (the variational Poisson loss) need
//! `d/dtheta` of both `h` and its directional derivative `v . grad_x h`.

use super::loss::Gradient;
use super::network::{Network, OutputHead};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Cached primal and tangent values for a batch.
#[derive(Debug, Clone)]
pub struct TangentPass<T> {
    pre: Vec<Matrix<T>>,
    acts: Vec<Matrix<T>>,
    dpre: Vec<Matrix<T>>,
    dacts: Vec<Matrix<T>>,
}

impl<T: Scalar> TangentPass<T> {
    pub fn output(&self) -> &Matrix<T> {
        self.acts.last().expect("non-empty")
    }

    /// Directional derivative of the output along the input direction.
    pub fn tangent(&self) -> &Matrix<T> {
        self.dacts.last().expect("non-empty")
    }
}

impl<T: Scalar> Network<T> {
    /// Runs the network and its tangent along `direction` for every input row.
    pub fn tangent_pass(&self, inputs: &Matrix<T>, direction: &[T]) -> Result<TangentPass<T>> {
        self.check_inputs(inputs)?;
        if self.head() != OutputHead::Linear {
            return Err(Error::invalid("input tangents are only supported for a linear head"));
        }
        if direction.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "tangent direction",
                expected: self.input_dim(),
                actual: direction.len(),
            });
        }
        let n = inputs.rows();
        let mut d0 = Matrix::zeros(n, self.input_dim());
        for i in 0..n {
            d0.row_mut(i).copy_from_slice(direction);
        }
        let layers = self.num_layers();
        let mut pass = TangentPass {
            pre: Vec::with_capacity(layers),
            acts: vec![inputs.clone()],
            dpre: Vec::with_capacity(layers),
            dacts: vec![d0],
        };
        for l in 0..layers {
            let z = self.affine(l, &pass.acts[l]);
            let dz = self.linear(l, &pass.dacts[l]);
            if l + 1 < layers {
                let act = self.activations()[l];
                let a = z.map(|v| act.apply(v));
                let mut da = dz.clone();
                for ((d, &zv), &av) in da.as_mut_slice().iter_mut().zip(z.as_slice()).zip(a.as_slice()) {
                    *d *= act.derivative(zv, av);
                }
                pass.acts.push(a);
                pass.dacts.push(da);
            } else {
                pass.acts.push(z.clone());
                pass.dacts.push(dz.clone());
            }
            pass.pre.push(z);
            pass.dpre.push(dz);
        }
        Ok(pass)
    }

    /// Outputs and their directional derivatives.
    pub fn forward_with_tangent(&self, inputs: &Matrix<T>, direction: &[T]) -> Result<(Matrix<T>, Matrix<T>)> {
        let pass = self.tangent_pass(inputs, direction)?;
        Ok((pass.output().clone(), pass.tangent().clone()))
    }

    /// Gradient of a loss `L(h, h')` given `dL/dh` and `dL/dh'` for every batch row.
    pub fn tangent_backprop(
        &self,
        pass: &TangentPass<T>,
        out_bar: &Matrix<T>,
        dout_bar: &Matrix<T>,
    ) -> Result<Gradient<T>> {
        let n = pass.acts[0].rows();
        for m in [out_bar, dout_bar] {
            if m.rows() != n || m.cols() != self.output_dim() {
                return Err(Error::DimensionMismatch {
                    context: "tangent cotangent shape",
                    expected: n * self.output_dim(),
                    actual: m.rows() * m.cols(),
                });
            }
        }
        let mut grad = vec![T::zero(); self.num_params()];
        let mut z_bar = out_bar.clone();
        let mut dz_bar = dout_bar.clone();
        for l in (0..self.num_layers()).rev() {
            self.accumulate_param_grad(l, &z_bar, &pass.acts[l], true, &mut grad);
            self.accumulate_param_grad(l, &dz_bar, &pass.dacts[l], false, &mut grad);
            if l == 0 {
                break;
            }
            let a_bar = self.backprop_input(l, &z_bar);
            let da_bar = self.backprop_input(l, &dz_bar);
            let act = self.activations()[l - 1];
            let z = &pass.pre[l - 1];
            let dz = &pass.dpre[l - 1];
            let a = &pass.acts[l];
            let mut next_z = a_bar;
            let mut next_dz = da_bar.clone();
            for idx in 0..next_z.as_slice().len() {
                let (zv, av, dzv) = (z.as_slice()[idx], a.as_slice()[idx], dz.as_slice()[idx]);
                let s1 = act.derivative(zv, av);
                let s2 = act.second_derivative(zv, av);
                let dab = da_bar.as_slice()[idx];
                let zb = &mut next_z.as_mut_slice()[idx];
                *zb = *zb * s1 + dab * s2 * dzv;
                next_dz.as_mut_slice()[idx] = dab * s1;
            }
            z_bar = next_z;
            dz_bar = next_dz;
        }
        Ok(Gradient(grad))
    }
}
