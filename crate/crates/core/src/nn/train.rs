use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{self, Gradient, LossKind, Targets};
use super::network::Network;
use super::optim::{Optimizer, OptimizerKind};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Anything that can produce a loss and a parameter gradient for a network.
pub trait Objective<T: Scalar> {
    /// Number of samples available for minibatching.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loss and gradient on a subset of samples, or on all of them.
    fn loss_and_grad(&self, net: &Network<T>, batch: Option<&[usize]>) -> Result<(T, Gradient<T>)>;

    /// Full-data loss.
    fn loss(&self, net: &Network<T>) -> Result<T> {
        Ok(self.loss_and_grad(net, None)?.0)
    }
}

/// Plain supervised regression or classification.
#[derive(Debug, Clone, Copy)]
pub struct Supervised<'a, T> {
    pub inputs: &'a Matrix<T>,
    pub targets: Targets<'a, T>,
    pub kind: LossKind,
}

impl<'a, T: Scalar> Supervised<'a, T> {
    pub fn new(inputs: &'a Matrix<T>, targets: Targets<'a, T>, kind: LossKind) -> Self {
        Self { inputs, targets, kind }
    }
}

impl<T: Scalar> Objective<T> for Supervised<'_, T> {
    fn len(&self) -> usize {
        self.inputs.rows()
    }

    fn loss_and_grad(&self, net: &Network<T>, batch: Option<&[usize]>) -> Result<(T, Gradient<T>)> {
        match batch {
            None => loss::loss_and_grad(net, self.inputs, &self.targets, self.kind),
            Some(idx) => {
                let x = self.inputs.select_rows(idx);
                match self.targets {
                    Targets::Values(y) => {
                        let y = y.select_rows(idx);
                        loss::loss_and_grad(net, &x, &Targets::Values(&y), self.kind)
                    }
                    Targets::Classes(c) => {
                        let c: Vec<usize> = idx.iter().map(|&i| c[i]).collect();
                        loss::loss_and_grad(net, &x, &Targets::Classes(&c), self.kind)
                    }
                }
            }
        }
    }

    fn loss(&self, net: &Network<T>) -> Result<T> {
        loss::loss(net, self.inputs, &self.targets, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    /// `None` means full batch.
    pub batch_size: Option<usize>,
    pub epochs: usize,
    pub init_std: f64,
    pub seed: u64,
    pub record_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Mse,
            optimizer: OptimizerKind::Adam,
            learning_rate: 1e-3,
            batch_size: None,
            epochs: 1000,
            init_std: 0.1,
            seed: 0,
            record_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, num_samples: usize) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        if self.record_every == 0 {
            return Err(Error::invalid("record_every must be at least 1"));
        }
        if !(self.init_std > 0.0) {
            return Err(Error::invalid("init_std must be positive"));
        }
        if let Some(b) = self.batch_size {
            if b == 0 || b > num_samples {
                return Err(Error::invalid(format!(
                    "batch_size {b} must be in 1..={num_samples}"
                )));
            }
        }
        if self.optimizer == OptimizerKind::Gd && self.batch_size.is_some_and(|b| b != num_samples) {
            return Err(Error::invalid("gd is full-batch; use sgd or adam for minibatches"));
        }
        Ok(())
    }

    pub fn is_recorded(&self, epoch: usize) -> bool {
        epoch % self.record_every == 0 || epoch == self.epochs
    }
}

/// What a probe asks the trainer to do after observing an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Observer called at every recorded epoch, before that epoch's update.
///
/// `snapshot` holds the network outputs on the trainer's probe inputs, if any.
pub trait Probe<T: Scalar> {
    fn observe(&mut self, epoch: usize, net: &Network<T>, snapshot: Option<&Matrix<T>>) -> Result<Control>;
}

impl<T, F> Probe<T> for F
where
    T: Scalar,
    F: FnMut(usize, &Network<T>, Option<&Matrix<T>>) -> Result<Control>,
{
    fn observe(&mut self, epoch: usize, net: &Network<T>, snapshot: Option<&Matrix<T>>) -> Result<Control> {
        self(epoch, net, snapshot)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub epochs: Vec<usize>,
    pub losses: Vec<f64>,
    /// Set when a probe stopped training early.
    pub stopped_at: Option<usize>,
}

impl TrainingTrace {
    pub fn final_loss(&self) -> Option<f64> {
        self.losses.last().copied()
    }

    pub fn last_epoch(&self) -> Option<usize> {
        self.epochs.last().copied()
    }
}

/// Trains `net` in place.
///
/// Epoch `e` is recorded (loss, probes) before its update, so the trace always
/// begins with the untrained state at epoch 0 and ends at `epochs` unless a
/// probe stops early.
pub fn train<T: Scalar>(
    net: &mut Network<T>,
    objective: &dyn Objective<T>,
    config: &TrainConfig,
    probe_inputs: Option<&Matrix<T>>,
    probes: &mut [&mut dyn Probe<T>],
) -> Result<TrainingTrace> {
    let n = objective.len();
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    config.validate(n)?;
    let mut opt = Optimizer::new(config.optimizer, config.learning_rate, net.num_params())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut trace = TrainingTrace::default();
    let minibatch = config.batch_size.filter(|&b| b < n);

    for epoch in 0..=config.epochs {
        let recorded = config.is_recorded(epoch);
        let full = if minibatch.is_none() && epoch < config.epochs {
            Some(objective.loss_and_grad(net, None)?)
        } else {
            None
        };
        if recorded {
            let value = match &full {
                Some((l, _)) => *l,
                None => objective.loss(net)?,
            };
            let value = value.as_f64();
            if !value.is_finite() {
                return Err(Error::NonFinite("training loss"));
            }
            trace.epochs.push(epoch);
            trace.losses.push(value);
            let snapshot = match probe_inputs {
                Some(x) => Some(net.forward(x)?),
                None => None,
            };
            let mut stop = false;
            for p in probes.iter_mut() {
                if p.observe(epoch, net, snapshot.as_ref())? == Control::Stop {
                    stop = true;
                }
            }
            if stop {
                trace.stopped_at = Some(epoch);
                break;
            }
        }
        if epoch == config.epochs {
            break;
        }
        match (full, minibatch) {
            (Some((_, g)), _) => opt.step(net.params_mut(), g.as_slice())?,
            (None, Some(b)) => {
                order.shuffle(&mut rng);
                for chunk in order.chunks(b) {
                    let (_, g) = objective.loss_and_grad(net, Some(chunk))?;
                    opt.step(net.params_mut(), g.as_slice())?;
                }
            }
            (None, None) => unreachable!("full-batch gradient computed above"),
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::super::network::{Activation, OutputHead};
    use super::*;

    fn setup() -> (Network<f64>, Matrix<f64>, Matrix<f64>) {
        let net = Network::init(&[1, 16, 1], Activation::Tanh, OutputHead::Linear, 0.5, 1).unwrap();
        let xs: Vec<f64> = (0..21).map(|i| -1.0 + 0.1 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (2.0 * x).sin()).collect();
        (net, Matrix::column_vector(&xs), Matrix::column_vector(&ys))
    }

    #[test]
    fn zero_epochs_leaves_parameters_untouched() {
        let (mut net, x, y) = setup();
        let before = net.clone();
        let obj = Supervised::new(&x, Targets::Values(&y), LossKind::Mse);
        let cfg = TrainConfig { epochs: 0, ..Default::default() };
        let trace = train(&mut net, &obj, &cfg, None, &mut []).unwrap();
        assert_eq!(trace.epochs, vec![0]);
        assert_eq!(net, before);
    }

    #[test]
    fn adam_reduces_loss_and_is_deterministic() {
        let (net0, x, y) = setup();
        let obj = Supervised::new(&x, Targets::Values(&y), LossKind::Mse);
        let cfg = TrainConfig {
            epochs: 300,
            learning_rate: 1e-2,
            record_every: 50,
            ..Default::default()
        };
        let mut a = net0.clone();
        let ta = train(&mut a, &obj, &cfg, None, &mut []).unwrap();
        let mut b = net0.clone();
        let tb = train(&mut b, &obj, &cfg, None, &mut []).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a, b);
        assert_eq!(ta.epochs, vec![0, 50, 100, 150, 200, 250, 300]);
        assert!(ta.final_loss().unwrap() < 0.1 * ta.losses[0]);
    }

    #[test]
    fn minibatch_sgd_is_seeded() {
        let (net0, x, y) = setup();
        let obj = Supervised::new(&x, Targets::Values(&y), LossKind::Mse);
        let cfg = TrainConfig {
            optimizer: OptimizerKind::Sgd,
            batch_size: Some(5),
            epochs: 20,
            learning_rate: 0.05,
            ..Default::default()
        };
        let mut a = net0.clone();
        train(&mut a, &obj, &cfg, None, &mut []).unwrap();
        let mut b = net0.clone();
        train(&mut b, &obj, &cfg, None, &mut []).unwrap();
        assert_eq!(a, b);
        let mut c = net0.clone();
        train(&mut c, &obj, &TrainConfig { seed: 9, ..cfg }, None, &mut []).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn probe_can_stop_training() {
        let (mut net, x, y) = setup();
        let obj = Supervised::new(&x, Targets::Values(&y), LossKind::Mse);
        let cfg = TrainConfig { epochs: 100, ..Default::default() };
        let mut seen = Vec::new();
        let mut probe = |e: usize, _: &Network<f64>, s: Option<&Matrix<f64>>| {
            assert_eq!(s.unwrap().rows(), 21);
            seen.push(e);
            Ok(if e == 7 { Control::Stop } else { Control::Continue })
        };
        let trace = train(&mut net, &obj, &cfg, Some(&x), &mut [&mut probe]).unwrap();
        assert_eq!(trace.stopped_at, Some(7));
        assert_eq!(seen, (0..=7).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_configs() {
        let (mut net, x, y) = setup();
        let obj = Supervised::new(&x, Targets::Values(&y), LossKind::Mse);
        for cfg in [
            TrainConfig { batch_size: Some(0), ..Default::default() },
            TrainConfig { batch_size: Some(100), ..Default::default() },
            TrainConfig { record_every: 0, ..Default::default() },
            TrainConfig { learning_rate: -1.0, ..Default::default() },
        ] {
            assert!(train(&mut net, &obj, &cfg, None, &mut []).is_err());
        }
    }
}
