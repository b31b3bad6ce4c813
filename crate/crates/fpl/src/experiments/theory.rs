//! Monte-Carlo estimates of the two-frequency gradient dominance theorems.

use anyhow::{bail, Result};
use fpl_core::theory::{theorem_ratios, theory_csv, TheoremEstimate, TheoremSetup};
use num_complex::Complex;
use serde_json::json;

use super::common::{RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;
use crate::svg::Series;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-theory", doc: "parameter bundle" },
    KeySpec { key: "units", default: "4", doc: "hidden units m" },
    KeySpec { key: "k1", default: "1", doc: "lower frequency" },
    KeySpec { key: "k2", default: "3", doc: "higher frequency" },
    KeySpec { key: "target1_amplitude", default: "1", doc: "|f_hat(k1)|" },
    KeySpec { key: "target1_phase", default: "0", doc: "arg f_hat(k1) in radians" },
    KeySpec { key: "target2_amplitude", default: "1", doc: "|f_hat(k2)|" },
    KeySpec { key: "target2_phase", default: "0", doc: "arg f_hat(k2) in radians" },
    KeySpec { key: "a", default: "1", doc: "fixed output weight of every unit" },
    KeySpec { key: "b", default: "0.5", doc: "fixed bias of every unit" },
    KeySpec { key: "delta", default: "2,1,0.5,0.25", doc: "ball radii for the hidden weights" },
    KeySpec { key: "samples", default: "100000", doc: "Monte-Carlo samples per radius" },
    KeySpec { key: "seed", default: "0", doc: "sampling seed" },
];

const PRESETS: &[Preset] = &[Preset {
    name: "desk-theory",
    doc: "m = 4, k1 = 1, k2 = 3, unit zero-phase targets, a_j = 1, b_j = 0.5, 1e5 samples per radius",
    values: &[],
}];

pub const SCHEMA: Schema = Schema {
    experiment: "theory",
    summary: "fraction of hidden weights in a ball where low-frequency gradients dominate",
    keys: KEYS,
    presets: PRESETS,
};

pub struct TheoryOutcome {
    pub setup: TheoremSetup,
    pub estimates: Vec<TheoremEstimate>,
}

impl TheoryOutcome {
    /// Ratios ordered by decreasing radius never drop beyond their confidence bands.
    pub fn non_decreasing_as_delta_shrinks(&self) -> bool {
        let mut e: Vec<&TheoremEstimate> = self.estimates.iter().collect();
        e.sort_by(|a, b| b.delta.total_cmp(&a.delta));
        e.windows(2).all(|w| w[1].ci_thm1().1 >= w[0].ci_thm1().0)
    }
}

pub fn setup(cfg: &Config) -> Result<TheoremSetup> {
    let m = cfg.usize("units")?;
    if m == 0 {
        bail!("config key 'units' must be at least 1");
    }
    let mut s = TheoremSetup::standard(m, cfg.f64("k1")?, cfg.f64("k2")?);
    s.target1 = Complex::from_polar(cfg.f64("target1_amplitude")?, cfg.f64("target1_phase")?);
    s.target2 = Complex::from_polar(cfg.f64("target2_amplitude")?, cfg.f64("target2_phase")?);
    s.a = vec![cfg.f64("a")?; m];
    s.b = vec![cfg.f64("b")?; m];
    s.validate()?;
    Ok(s)
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<TheoryOutcome> {
    let s = setup(cfg)?;
    let deltas: Vec<f64> = cfg.list("delta")?;
    if deltas.is_empty() {
        bail!("config key 'delta': at least one radius is required");
    }
    let samples = cfg.usize("samples")?;
    let seed = cfg.u64("seed")?;
    let mut estimates = Vec::new();
    for &d in &deltas {
        let e = theorem_ratios(&s, d, samples, seed)?;
        ctx.note(format!("delta {d}: ratio {:.5} {:?}", e.ratio_thm1(), e.ci_thm1()));
        estimates.push(e);
    }
    Ok(TheoryOutcome { setup: s, estimates })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("theory.csv", &theory_csv(&o.estimates))?;
    w.svg("theory.svg", || {
        let pts = |f: fn(&TheoremEstimate) -> f64| o.estimates.iter().map(|e| (e.delta, f(e))).collect();
        plots::curves(
            "dominance ratios against ball radius",
            "radius delta",
            "fraction of samples",
            false,
            vec![
                Series { name: "dominance".into(), points: pts(TheoremEstimate::ratio_thm1) },
                Series { name: "faster decay".into(), points: pts(TheoremEstimate::ratio_thm2) },
            ],
        )
    })?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("sampling".into(), cfg.u64("seed")?);
    m.outputs = w.files;
    m.summary = json!({
        "rows": o.estimates.iter().map(|e| json!({
            "delta": e.delta,
            "ratio_thm1": e.ratio_thm1(),
            "ci_thm1": e.ci_thm1(),
            "ratio_thm2": e.ratio_thm2(),
            "ci_thm2": e.ci_thm2(),
            "implication_violations": e.implication_violations,
            "dissipation_violations": e.dissipation_violations,
        })).collect::<Vec<_>>(),
        "non_decreasing_as_delta_shrinks": o.non_decreasing_as_delta_shrinks(),
    });
    Ok(m)
}
