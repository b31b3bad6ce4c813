//! The named experiment pipelines.

mod common;
pub mod filter;
pub mod hybrid;
pub mod ideal;
pub mod image2d;
pub mod parity;
pub mod poisson;
pub mod project;
pub mod synth1d;
pub mod theory;

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use fpl_core::data::LabeledDataset;
use fpl_core::nn::Network;

pub use common::{crosses_before, strictly_increasing, RunContext};

use crate::config::{Config, Schema};
use crate::manifest::ExperimentManifest;

pub const EXPERIMENTS: &[&str] = &[
    "synth1d", "project", "filter", "poisson", "hybrid", "theory", "parity", "image2d", "ideal",
];

pub fn schema(name: &str) -> Option<&'static Schema> {
    Some(match name {
        "synth1d" => &synth1d::SCHEMA,
        "project" => &project::SCHEMA,
        "filter" => &filter::SCHEMA,
        "poisson" => &poisson::SCHEMA,
        "hybrid" => &hybrid::SCHEMA,
        "theory" => &theory::SCHEMA,
        "parity" => &parity::SCHEMA,
        "image2d" => &image2d::SCHEMA,
        "ideal" => &ideal::SCHEMA,
        _ => return None,
    })
}

/// Runs a resolved config and writes `manifest.json` next to its outputs.
pub fn run_experiment(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let manifest = match cfg.experiment() {
        "synth1d" => synth1d::run(cfg, ctx),
        "project" => project::run(cfg, ctx),
        "filter" => filter::run(cfg, ctx),
        "poisson" => poisson::run(cfg, ctx),
        "hybrid" => hybrid::run(cfg, ctx),
        "theory" => theory::run(cfg, ctx),
        "parity" => parity::run(cfg, ctx),
        "image2d" => image2d::run(cfg, ctx),
        "ideal" => ideal::run(cfg, ctx),
        other => bail!("unknown experiment '{other}' (expected one of {})", EXPERIMENTS.join(", ")),
    }
    .with_context(|| format!("experiment {} failed", cfg.experiment()))?;
    let path = ctx.out_dir.join("manifest.json");
    std::fs::write(&path, manifest.to_json()).with_context(|| format!("writing {}", path.display()))?;
    Ok(manifest)
}

pub fn loss_csv(losses: &[(usize, f64)]) -> String {
    let mut s = String::from("epoch,loss\n");
    for (e, l) in losses {
        let _ = writeln!(s, "{e},{l:e}");
    }
    s
}

/// Fraction of rows whose largest output matches the class label.
pub fn accuracy(net: &Network<f64>, data: &LabeledDataset<f64>) -> Result<f64> {
    let Some(classes) = &data.classes else {
        bail!("dataset {} has no class labels", data.provenance);
    };
    let out = net.forward(&data.inputs)?;
    let hits = (0..out.rows())
        .filter(|&i| {
            let row = out.row(i);
            let best = (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
            best == classes[i]
        })
        .count();
    Ok(hits as f64 / out.rows().max(1) as f64)
}
