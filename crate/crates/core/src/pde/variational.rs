use super::problem::{Grid, PoissonProblem};
use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, Matrix};
use crate::nn::{Gradient, Network, Objective};
use crate::scalar::Scalar;

/// Empirical energy on grid nodes `x_0..x_n`:
/// `sum_{i=1}^{n-1} (h'(x_i)^2 / 2 - g(x_i) h(x_i)) dx + beta ((h(x_0) - u_a)^2 + (h(x_n) - u_b)^2)`.
///
/// `h'` is the exact input derivative of the network; the sum is a plain
/// Riemann sum over interior nodes.
#[derive(Debug, Clone)]
pub struct VariationalObjective<T> {
    nodes: Matrix<T>,
    source: Vec<T>,
    dx: T,
    beta: T,
    left: T,
    right: T,
}

impl<T: Scalar> VariationalObjective<T> {
    pub fn new(problem: &PoissonProblem<T>, grid: &Grid<T>, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::invalid(format!("penalty beta must be non-negative, got {beta}")));
        }
        let xs: Vec<T> = grid.nodes().collect();
        let source = xs.iter().map(|&x| problem.source(x)).collect();
        Ok(Self {
            nodes: Matrix::column_vector(&xs),
            source,
            dx: grid.dx(),
            beta: T::lit(beta),
            left: problem.left,
            right: problem.right,
        })
    }

    pub fn nodes(&self) -> &Matrix<T> {
        &self.nodes
    }

    /// `(I_emp, dI/dtheta)`.
    pub fn loss_and_grad(&self, net: &Network<T>) -> Result<(T, Gradient<T>)> {
        if net.input_dim() != 1 || net.output_dim() != 1 {
            return Err(Error::DimensionMismatch {
                context: "variational network (1-d in, 1-d out)",
                expected: 1,
                actual: if net.input_dim() != 1 { net.input_dim() } else { net.output_dim() },
            });
        }
        let pass = net.tangent_pass(&self.nodes, &[T::one()])?;
        let h = pass.output().as_slice();
        let dh = pass.tangent().as_slice();
        let last = h.len() - 1;
        let mut terms = Vec::with_capacity(last - 1);
        let mut out_bar = Matrix::zeros(h.len(), 1);
        let mut dout_bar = Matrix::zeros(h.len(), 1);
        let half = T::lit(0.5);
        for i in 1..last {
            terms.push((half * dh[i] * dh[i] - self.source[i] * h[i]) * self.dx);
            out_bar.set(i, 0, -self.source[i] * self.dx);
            dout_bar.set(i, 0, dh[i] * self.dx);
        }
        let (r0, rn) = (h[0] - self.left, h[last] - self.right);
        let value = pairwise_sum(&terms) + self.beta * (r0 * r0 + rn * rn);
        let two = T::lit(2.0);
        out_bar.set(0, 0, two * self.beta * r0);
        out_bar.set(last, 0, two * self.beta * rn);
        let grad = net.tangent_backprop(&pass, &out_bar, &dout_bar)?;
        Ok((value, grad))
    }
}

impl<T: Scalar> Objective<T> for VariationalObjective<T> {
    fn len(&self) -> usize {
        self.nodes.rows()
    }

    fn loss_and_grad(&self, net: &Network<T>, batch: Option<&[usize]>) -> Result<(T, Gradient<T>)> {
        if batch.is_some() {
            return Err(Error::invalid("the variational loss is defined on the full grid only"));
        }
        VariationalObjective::loss_and_grad(self, net)
    }
}

/// Convenience wrapper: `(I_emp, gradient)` for one network on one grid.
pub fn variational_loss<T: Scalar>(
    net: &Network<T>,
    problem: &PoissonProblem<T>,
    grid: &Grid<T>,
    beta: f64,
) -> Result<(T, Gradient<T>)> {
    VariationalObjective::new(problem, grid, beta)?.loss_and_grad(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, OutputHead};

    #[test]
    fn zero_network_has_zero_energy() {
        let p = PoissonProblem::<f64>::paper();
        let g = p.grid(100).unwrap();
        let net = Network::zeros(&[1, 10, 1], Activation::Tanh, OutputHead::Linear).unwrap();
        assert_eq!(variational_loss(&net, &p, &g, 10.0).unwrap().0, 0.0);
    }

    #[test]
    fn constant_network() {
        let p = PoissonProblem::<f64>::paper();
        let g = p.grid(64).unwrap();
        let mut net = Network::zeros(&[1, 3, 1], Activation::Tanh, OutputHead::Linear).unwrap();
        let c = 0.7;
        *net.params_mut().last_mut().unwrap() = c;
        let (value, _) = variational_loss(&net, &p, &g, 0.0).unwrap();
        let expect: f64 = -c * (1..64).map(|i| p.source(g.node(i))).sum::<f64>() * g.dx();
        assert!((value - expect).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let p = PoissonProblem::<f64>::paper();
        let g = p.grid(40).unwrap();
        let net = Network::<f64>::init(&[1, 10, 1], Activation::Tanh, OutputHead::Linear, 0.8, 3).unwrap();
        let obj = VariationalObjective::new(&p, &g, 10.0).unwrap();
        let (_, grad) = obj.loss_and_grad(&net).unwrap();
        let eps = 1e-6;
        for k in 0..net.num_params() {
            let mut a = net.clone();
            a.params_mut()[k] += eps;
            let mut b = net.clone();
            b.params_mut()[k] -= eps;
            let fd = (obj.loss_and_grad(&a).unwrap().0 - obj.loss_and_grad(&b).unwrap().0) / (2.0 * eps);
            let an = grad.as_slice()[k];
            assert!((fd - an).abs() <= 1e-5 * fd.abs().max(an.abs()).max(1e-3), "param {k}: {fd} vs {an}");
        }
    }
}
