//! Poisson problem: variational network solver against Jacobi iteration.

use anyhow::Result;
use fpl_core::nn::{Activation, Control};
use fpl_core::pde::{dnn_solve, jacobi_solve, Phase, PoissonProblem, SolverNetConfig, SolverRecord, SolverTrace};
use serde_json::json;

use super::common::{crosses_before, opt_epoch, parse_enum, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-poisson", doc: "hyperparameter bundle" },
    KeySpec { key: "problem", default: "paper-poisson", doc: "Poisson problem preset" },
    KeySpec { key: "intervals", default: "1000", doc: "grid intervals (nodes = intervals + 1)" },
    KeySpec { key: "peaks", default: "3", doc: "number of reference spectral peaks to follow" },
    KeySpec { key: "oversample", default: "2", doc: "frequency grid oversampling factor for the diagnostics" },
    KeySpec { key: "widths", default: "1-400-100-1", doc: "solver network widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.02", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.0005", doc: "Adam step size" },
    KeySpec { key: "beta", default: "10", doc: "boundary penalty weight" },
    KeySpec { key: "epochs", default: "5000", doc: "maximum training epochs" },
    KeySpec { key: "record_every", default: "10", doc: "epochs between records" },
    KeySpec { key: "sweeps", default: "200000", doc: "maximum Jacobi sweeps" },
    KeySpec { key: "sweep_record_every", default: "100", doc: "sweeps between records" },
    KeySpec { key: "dnn_threshold", default: "0.2", doc: "Delta_F crossing level for the network" },
    KeySpec { key: "jacobi_threshold", default: "0.1", doc: "Delta_F crossing level for Jacobi" },
    KeySpec { key: "stop_when_ordered", default: "true", doc: "stop training once the lowest or highest peak has crossed" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-poisson",
        doc: "widths 1-400-100-1 (full scale 1-4000-500-400-1); 1001 nodes, Adam lr 5e-4, beta 10, init std 0.02 as at full scale",
        values: &[],
    },
    Preset {
        name: "paper-poisson",
        doc: "widths 1-4000-500-400-1, 1001 nodes, full batch Adam lr 5e-4, beta 10, init std 0.02",
        values: &[("widths", "1-4000-500-400-1")],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "poisson",
    summary: "Delta_F at the reference peaks for the network solver and for Jacobi",
    keys: KEYS,
    presets: PRESETS,
};

pub struct PoissonOutcome {
    pub peaks: Vec<f64>,
    pub dnn: SolverTrace,
    pub jacobi: SolverTrace,
    pub dnn_crossings: Vec<Option<usize>>,
    pub jacobi_crossings: Vec<Option<usize>>,
}

impl PoissonOutcome {
    /// Jacobi fixes the highest peak before the lowest.
    pub fn jacobi_high_first(&self) -> bool {
        crosses_before(*self.jacobi_crossings.last().expect("peaks"), self.jacobi_crossings[0])
    }

    /// The network fixes the lowest peak before the highest.
    pub fn dnn_low_first(&self) -> bool {
        crosses_before(self.dnn_crossings[0], *self.dnn_crossings.last().expect("peaks"))
    }
}

pub fn net_config(cfg: &Config) -> Result<SolverNetConfig> {
    Ok(SolverNetConfig {
        widths: cfg.widths("widths")?,
        activation: parse_enum::<Activation>(cfg, "activation")?,
        init_std: cfg.f64("init_std")?,
        learning_rate: cfg.f64("learning_rate")?,
        beta: cfg.f64("beta")?,
        seed: cfg.u64("seed")?,
    })
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<PoissonOutcome> {
    let problem = PoissonProblem::<f64>::from_preset(cfg.str("problem")?)?;
    let n = cfg.usize("intervals")?;
    let grid = problem.grid(n)?;
    let peaks = problem.peak_frequencies(&grid, cfg.usize("peaks")?, cfg.usize("oversample")?)?;
    ctx.note(format!("poisson: peaks at k = {peaks:?}"));
    let jt = cfg.f64("jacobi_threshold")?;
    let dt = cfg.f64("dnn_threshold")?;

    let jacobi = jacobi_solve(&problem, n, &peaks, cfg.usize("sweeps")?, cfg.usize("sweep_record_every")?)?;
    let jacobi_crossings: Vec<Option<usize>> =
        (0..peaks.len()).map(|j| jacobi.crossing_step(Phase::Jacobi, j, jt)).collect();

    let stop = cfg.bool("stop_when_ordered")?;
    let last = peaks.len() - 1;
    let mut on_record = |r: &SolverRecord| {
        ctx.note(format!("epoch {}: sup {:.4} dF {:?}", r.step, r.sup_norm_err, r.delta_f));
        let crossed = |j: usize| r.delta_f[j].is_some_and(|d| d < dt);
        if stop && (crossed(0) || crossed(last)) {
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let (_, dnn) = dnn_solve(
        &problem,
        &grid,
        &peaks,
        &net_config(cfg)?,
        cfg.usize("epochs")?,
        cfg.usize("record_every")?,
        &mut on_record,
    )?;
    let dnn_crossings = (0..peaks.len()).map(|j| dnn.crossing_step(Phase::Dnn, j, dt)).collect();
    Ok(PoissonOutcome { peaks, dnn, jacobi, dnn_crossings, jacobi_crossings })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("poisson_dnn.csv", &o.dnn.to_csv())?;
    w.text("poisson_jacobi.csv", &o.jacobi.to_csv())?;
    w.text("poisson_dnn_timing.csv", &o.dnn.timing_csv())?;
    w.text("poisson_jacobi_timing.csv", &o.jacobi.timing_csv())?;
    w.svg("poisson_dnn_delta_f.svg", || plots::solver_delta_f("network solver", &o.dnn, Phase::Dnn))?;
    w.svg("poisson_jacobi_delta_f.svg", || plots::solver_delta_f("Jacobi iteration", &o.jacobi, Phase::Jacobi))?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.outputs = w.files;
    m.summary = json!({
        "peaks": o.peaks,
        "dnn_crossing_epochs": o.dnn_crossings.iter().map(|&e| opt_epoch(e)).collect::<Vec<_>>(),
        "jacobi_crossing_sweeps": o.jacobi_crossings.iter().map(|&e| opt_epoch(e)).collect::<Vec<_>>(),
        "dnn_low_first": o.dnn_low_first(),
        "jacobi_high_first": o.jacobi_high_first(),
        "dnn_final_sup_norm": o.dnn.records.last().map(|r| r.sup_norm_err),
        "jacobi_final_sup_norm": o.jacobi.records.last().map(|r| r.sup_norm_err),
    });
    Ok(m)
}
