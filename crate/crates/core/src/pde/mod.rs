//! One-dimensional Poisson problem: closed-form reference, central-difference
//! Jacobi iteration with its eigen-analysis, the variational network solver
//! and the network-then-Jacobi hybrid.

mod jacobi;
mod problem;
mod solve;
mod variational;

pub use jacobi::{
    assemble_system, jacobi_iterate, jacobi_spectrum, ContractionBound, JacobiSpectrum, JacobiState,
    TridiagonalSystem,
};
pub use problem::{sup_norm_error, Grid, GridField, PoissonProblem};
pub use solve::{
    dnn_solve, hybrid_sweep, jacobi_run, jacobi_solve, network_field, CostModel, Handoff, HybridConfig, HybridRun,
    PeakDiagnostics, Phase, SolverNetConfig, SolverRecord, SolverTrace,
};
pub use variational::{variational_loss, VariationalObjective};
