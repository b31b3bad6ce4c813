//! Network-then-Jacobi hybrid: cost to reach a sup-norm target per handoff epoch.

use anyhow::{bail, Result};
use fpl_core::pde::{hybrid_sweep, CostModel, Handoff, HybridConfig, HybridRun, PoissonProblem};
use serde_json::json;

use super::common::{RunContext, Writer};
use super::poisson::net_config;
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-hybrid", doc: "hyperparameter bundle" },
    KeySpec { key: "problem", default: "paper-poisson", doc: "Poisson problem preset" },
    KeySpec { key: "intervals", default: "1000", doc: "grid intervals (nodes = intervals + 1)" },
    KeySpec { key: "peaks", default: "3", doc: "number of reference spectral peaks to follow" },
    KeySpec { key: "oversample", default: "2", doc: "frequency grid oversampling factor for the diagnostics" },
    KeySpec { key: "handoffs", default: "0,100,200,300,500,inf", doc: "handoff epochs M; 0 is pure Jacobi, inf pure network" },
    KeySpec { key: "target_error", default: "0.05", doc: "sup-norm error to reach" },
    KeySpec { key: "widths", default: "1-40-1", doc: "solver network widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.1", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.01", doc: "Adam step size" },
    KeySpec { key: "beta", default: "10", doc: "boundary penalty weight" },
    KeySpec { key: "max_epochs", default: "30000", doc: "training budget of the pure-network run" },
    KeySpec { key: "max_sweeps", default: "400000", doc: "Jacobi budget after each handoff" },
    KeySpec { key: "record_every", default: "10", doc: "epochs between network records" },
    KeySpec { key: "sweep_record_every", default: "100", doc: "sweeps between Jacobi records" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-hybrid",
        doc: "widths 1-40-1, Adam lr 1e-2, init std 0.1: a small network whose low-frequency phase is cheap enough for the hybrid to pay off",
        values: &[],
    },
    Preset {
        name: "paper-hybrid",
        doc: "widths 1-4000-500-400-1, Adam lr 5e-4, init std 0.02, beta 10",
        values: &[("widths", "1-4000-500-400-1"), ("learning_rate", "0.0005"), ("init_std", "0.02")],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "hybrid",
    summary: "cost to reach a sup-norm target for network-then-Jacobi handoffs",
    keys: KEYS,
    presets: PRESETS,
};

pub struct HybridOutcome {
    pub cost: CostModel,
    pub runs: Vec<HybridRun>,
}

impl HybridOutcome {
    fn endpoint(&self, h: Handoff) -> Option<&HybridRun> {
        self.runs.iter().find(|r| r.handoff == h)
    }

    /// Finite `M > 0` with the smallest cost, if it strictly beats both endpoints.
    pub fn winner(&self) -> Option<(Handoff, f64)> {
        let inf = f64::INFINITY;
        let jac = self.endpoint(Handoff::Epoch(0))?.cost_to_target.unwrap_or(inf);
        let dnn = self.endpoint(Handoff::Never)?.cost_to_target.unwrap_or(inf);
        self.runs
            .iter()
            .filter(|r| matches!(r.handoff, Handoff::Epoch(m) if m > 0))
            .filter_map(|r| r.cost_to_target.map(|c| (r.handoff, c)))
            .filter(|&(_, c)| c < jac && c < dnn)
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<HybridOutcome> {
    let problem = PoissonProblem::<f64>::from_preset(cfg.str("problem")?)?;
    let n = cfg.usize("intervals")?;
    let grid = problem.grid(n)?;
    let peaks = problem.peak_frequencies(&grid, cfg.usize("peaks")?, cfg.usize("oversample")?)?;
    let handoffs: Vec<Handoff> = cfg.list("handoffs")?;
    if handoffs.is_empty() {
        bail!("config key 'handoffs': at least one handoff is required");
    }
    let hc = HybridConfig {
        net: net_config(cfg)?,
        handoffs,
        max_epochs: cfg.usize("max_epochs")?,
        max_sweeps: cfg.usize("max_sweeps")?,
        target_error: cfg.f64("target_error")?,
        record_every_epochs: cfg.usize("record_every")?,
        record_every_sweeps: cfg.usize("sweep_record_every")?,
        stop_at_target: true,
    };
    ctx.note("hybrid: training once, then one Jacobi run per handoff");
    let (cost, runs) = hybrid_sweep(&problem, n, &peaks, &hc)?;
    for r in &runs {
        ctx.note(format!("M={}: cost to target {:?}", r.handoff, r.cost_to_target));
    }
    Ok(HybridOutcome { cost, runs })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    let mut csv = String::new();
    let mut timing = String::new();
    for (i, r) in o.runs.iter().enumerate() {
        for (j, line) in r.trace.to_csv().lines().enumerate() {
            if j == 0 {
                if i == 0 {
                    csv.push_str(&format!("handoff,{line}\n"));
                }
                continue;
            }
            csv.push_str(&format!("{},{line}\n", r.handoff));
        }
        for (j, line) in r.trace.timing_csv().lines().enumerate() {
            if j == 0 {
                if i == 0 {
                    timing.push_str(&format!("handoff,{line}\n"));
                }
                continue;
            }
            timing.push_str(&format!("{},{line}\n", r.handoff));
        }
    }
    w.text("hybrid.csv", &csv)?;
    w.text("hybrid_timing.csv", &timing)?;
    w.svg("error_cost.svg", || plots::error_cost("sup-norm error against cost", &o.runs))?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.outputs = w.files;
    m.summary = json!({
        "cost_per_epoch": o.cost.per_epoch,
        "cost_per_sweep": o.cost.per_sweep,
        "runs": o.runs.iter().map(|r| json!({
            "handoff": r.handoff.to_string(),
            "cost_to_target": r.cost_to_target,
            "contraction_bound_violations": r.bound_violations,
        })).collect::<Vec<_>>(),
        "winner": o.winner().map(|(h, c)| json!({"handoff": h.to_string(), "cost": c})),
    });
    Ok(m)
}
