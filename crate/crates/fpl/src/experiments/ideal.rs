//! Closed-form convergence model: filtered distance and turning times.

use anyhow::{bail, Result};
use fpl_core::spectral::{FourierBasis, SpectrumTrace};
use fpl_core::theory::{ideal_distances, IdealDistance, IdealModel};
use serde_json::json;

use super::common::{RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;
use crate::svg::Series;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-ideal", doc: "parameter bundle" },
    KeySpec { key: "amplitudes", default: "1,0.5,0.2,0.125", doc: "c_k of sin((2k-1)x)" },
    KeySpec { key: "rates", default: "200,150,5,1", doc: "convergence rates a_k" },
    KeySpec { key: "ordering", default: "f", doc: "f keeps the rates, anti reverses them" },
    KeySpec { key: "offset", default: "0", doc: "constant term c0" },
    KeySpec { key: "offset_rate", default: "1", doc: "rate a0 of the constant term" },
    KeySpec { key: "x_min", default: "-6.28", doc: "left end of the sample grid" },
    KeySpec { key: "x_max", default: "6.28", doc: "right end of the sample grid" },
    KeySpec { key: "points", default: "100", doc: "grid points" },
    KeySpec { key: "dt", default: "0.001", doc: "time step" },
    KeySpec { key: "t_max", default: "8", doc: "final time" },
    KeySpec { key: "delta", default: "0.3,0.5,1,2", doc: "filter widths" },
    KeySpec { key: "record_every", default: "10", doc: "time steps between rows of the spectrum CSV" },
];

const PRESETS: &[Preset] = &[
    Preset { name: "desk-ideal", doc: "rates 200,150,5,1 with amplitudes 1,1/2,1/5,1/8", values: &[] },
    Preset { name: "ideal-flat", doc: "equal amplitudes", values: &[("amplitudes", "1,1,1,1")] },
    Preset { name: "ideal-rising", doc: "amplitudes growing with frequency", values: &[("amplitudes", "1,2,5,8")] },
];

pub const SCHEMA: Schema = Schema {
    experiment: "ideal",
    summary: "closed-form F-Principle model: distance to filtered labels and turning times",
    keys: KEYS,
    presets: PRESETS,
};

pub struct IdealOutcome {
    pub model: IdealModel<f64>,
    pub times: Vec<f64>,
    pub distances: Vec<IdealDistance>,
    pub trace: SpectrumTrace<f64>,
}

impl IdealOutcome {
    pub fn all_unimodal(&self) -> bool {
        self.distances.iter().all(|d| d.unimodal)
    }

    /// Turning times do not increase with the filter width.
    pub fn turning_non_increasing(&self) -> bool {
        let mut d: Vec<&IdealDistance> = self.distances.iter().collect();
        d.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        d.windows(2).all(|w| w[1].turning_time <= w[0].turning_time)
    }

    pub fn predictions_hold(&self) -> bool {
        self.all_unimodal() && self.turning_non_increasing()
    }
}

pub fn execute(cfg: &Config, _ctx: &RunContext) -> Result<IdealOutcome> {
    let mut rates: Vec<f64> = cfg.list("rates")?;
    match cfg.str("ordering")? {
        "f" => {}
        "anti" => rates.reverse(),
        other => bail!("config key 'ordering': expected f or anti, got '{other}'"),
    }
    let model = IdealModel::new(cfg.list("amplitudes")?, rates, cfg.f64("offset")?, cfg.f64("offset_rate")?)?;
    let points = cfg.usize("points")?;
    if points < 2 {
        bail!("config key 'points' must be at least 2");
    }
    let (lo, hi) = (cfg.f64("x_min")?, cfg.f64("x_max")?);
    let xs: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let dt = cfg.f64("dt")?;
    let t_max = cfg.f64("t_max")?;
    if !(dt > 0.0) || !(t_max > 0.0) {
        bail!("dt and t_max must be positive");
    }
    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let distances = ideal_distances(&model, &times, &xs, &cfg.list("delta")?)?;

    // spectral coefficients at the model frequencies, in cycles per unit
    let freqs: Vec<f64> = model.frequencies().iter().map(|f| f / std::f64::consts::TAU).collect();
    let basis = FourierBasis::new(&xs, &freqs)?;
    let target: Vec<f64> = xs.iter().map(|&x| model.target(x)).collect();
    let mut trace = SpectrumTrace::new(freqs, basis.transform(&target)?)?;
    let every = cfg.usize("record_every")?.max(1);
    for (i, &t) in times.iter().enumerate() {
        if i % every == 0 || i == steps {
            let h: Vec<f64> = xs.iter().map(|&x| model.value(x, t)).collect();
            trace.push(i, basis.transform(&h)?)?;
        }
    }
    Ok(IdealOutcome { model, times, distances, trace })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("ideal_spectrum.csv", &o.trace.to_csv())?;
    let mut s = String::from("step,time,delta,dist\n");
    for d in &o.distances {
        for (i, v) in d.turning.distances.iter().enumerate() {
            s.push_str(&format!("{i},{:e},{:e},{v:e}\n", o.times[i], d.delta));
        }
    }
    w.text("ideal_dist.csv", &s)?;
    w.svg("ideal_dist.svg", || {
        let series = o
            .distances
            .iter()
            .map(|d| Series {
                name: format!("delta={}", d.delta),
                points: o.times.iter().copied().zip(d.turning.distances.iter().copied()).collect(),
            })
            .collect();
        plots::curves("distance to filtered labels", "time", "Dist(y_delta, h)", true, series)
    })?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.outputs = w.files;
    m.summary = json!({
        "rates": o.model.rates,
        "widths": o.distances.iter().map(|d| json!({
            "delta": d.delta,
            "turning_time": d.turning_time,
            "decrease_then_increase": d.unimodal,
        })).collect::<Vec<_>>(),
        "turning_non_increasing": o.turning_non_increasing(),
        "predictions_hold": o.predictions_hold(),
    });
    Ok(m)
}
