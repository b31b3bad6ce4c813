//! Fully-connected networks, losses, optimizers and the training loop.

mod io;
mod loss;
mod network;
mod optim;
mod tangent;
mod train;

pub use io::{load_network, read_network, save_network, write_network};
pub use loss::{loss, loss_and_grad, Gradient, LossKind, Targets};
pub use network::{softmax_rows, Activation, Network, OutputHead};
pub use optim::{Optimizer, OptimizerKind};
pub use tangent::TangentPass;
pub use train::{train, Control, Objective, Probe, Supervised, TrainConfig, TrainingTrace};
