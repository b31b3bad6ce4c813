//! Closed-form Fourier analysis of one-hidden-layer tanh networks, Monte-Carlo
//! checks of low-frequency gradient dominance, and the ideal convergence model.

mod fourier;
mod ideal;
mod montecarlo;

pub use fourier::{
    freq_grads_scaled, freq_loss_and_grads, inv_two_sinh, network_ft, tanh_unit_ft, FreqGrads, FreqLossState,
    OneHiddenParams, ScaledFreqGrads,
};
pub use ideal::{ideal_distances, is_unimodal, IdealDistance, IdealModel, PAPER_AMPLITUDES, PAPER_RATES};
pub use montecarlo::{
    sample_events, theorem_ratios, theory_csv, wilson_interval, BallSampler, SampleEvents, TheoremEstimate,
    TheoremSetup, MIN_ABS_COMPONENT,
};
