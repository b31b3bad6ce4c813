//! Filtering method on MNIST: e_low / e_high of Gaussian-smoothed labels.

use anyhow::{bail, Result};
use fpl_core::data::DatasetInfo;
use fpl_core::nn::{train, Control, Network, Supervised, Targets};
use fpl_core::spectral::{
    e_low_e_high, filter_csv, pairwise_squared_distances, FilterRecord, FilteredDataset, GaussianFilter,
};
use fpl_core::Matrix;
use serde_json::json;

use super::common::{mnist, network, opt_epoch, train_config, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-filter", doc: "hyperparameter bundle" },
    KeySpec { key: "data_dir", default: "data", doc: "directory holding dataset files" },
    KeySpec { key: "mnist_images", default: "mnist/images-idx3-ubyte", doc: "IDX image file (relative to data_dir)" },
    KeySpec { key: "mnist_labels", default: "mnist/labels-idx1-ubyte", doc: "IDX label file (relative to data_dir)" },
    KeySpec { key: "subset", default: "5000", doc: "samples drawn from the file; 0 keeps all" },
    KeySpec { key: "data_seed", default: "0", doc: "subset sampling seed" },
    KeySpec { key: "delta", default: "3,7", doc: "filter widths (variance-like, inputs scaled to [0,1])" },
    KeySpec { key: "stop_below", default: "0.3", doc: "stop once e_low is below this for every width; 0 trains all epochs" },
    KeySpec { key: "widths", default: "784-64-32-10", doc: "layer widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.01", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.002", doc: "optimizer step size" },
    KeySpec { key: "optimizer", default: "adam", doc: "gd, sgd or adam" },
    KeySpec { key: "loss", default: "mse", doc: "mse" },
    KeySpec { key: "batch_size", default: "full", doc: "minibatch size or full" },
    KeySpec { key: "epochs", default: "1000", doc: "maximum training epochs" },
    KeySpec { key: "record_every", default: "5", doc: "epochs between recorded errors" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-filter",
        doc: "5000-sample subset, widths 784-64-32-10 (full scale 784-400-200-10), Adam lr 2e-3 (full scale 0.015 at batch 10000), init std 0.01",
        values: &[],
    },
    Preset {
        name: "paper-filter",
        doc: "all samples, widths 784-400-200-10, tanh, MSE, Adam lr 0.015, batch 10000, widths delta 3,7,10",
        values: &[
            ("subset", "0"),
            ("widths", "784-400-200-10"),
            ("learning_rate", "0.015"),
            ("batch_size", "10000"),
            ("delta", "3,7,10"),
        ],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "filter",
    summary: "e_low and e_high of Gaussian-filtered MNIST labels during training",
    keys: KEYS,
    presets: PRESETS,
};

/// Per-width verdict of the low-before-high check.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterVerdict {
    pub delta: f64,
    /// First recorded epoch with `e_low < stop_below`.
    pub low_converged_at: Option<usize>,
    /// Recorded epochs in `1..=low_converged_at` where `e_low >= e_high`.
    pub violations: Vec<usize>,
}

impl FilterVerdict {
    pub fn holds(&self) -> bool {
        self.low_converged_at.is_some() && self.violations.is_empty()
    }
}

pub struct FilterOutcome {
    pub dataset: DatasetInfo,
    pub records: Vec<FilterRecord>,
    pub verdicts: Vec<FilterVerdict>,
    pub losses: Vec<(usize, f64)>,
    pub accuracy: f64,
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<FilterOutcome> {
    let data = mnist(cfg)?;
    let deltas: Vec<f64> = cfg.list("delta")?;
    if deltas.is_empty() {
        bail!("config key 'delta': at least one filter width is required");
    }
    let stop_below = cfg.f64("stop_below")?;
    let tc = train_config(cfg)?;
    let mut net = network(cfg, &tc)?;
    ctx.note(format!("filter: pairwise distances over {} samples", data.len()));
    let sq = pairwise_squared_distances(&data.inputs)?;
    let mut filters: Vec<(GaussianFilter<f64>, FilteredDataset<f64>)> = Vec::new();
    for &d in &deltas {
        let f = GaussianFilter::from_squared_distances(&sq, d)?;
        let t = f.split(&data.labels)?;
        filters.push((f, t));
    }
    drop(sq);

    let mut records = Vec::new();
    let mut losses = Vec::new();
    {
        let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
            let h = snap.expect("probe inputs supplied");
            let mut all_low = stop_below > 0.0;
            for (f, target) in &filters {
                let out = f.split(h)?;
                let (e_low, e_high) = e_low_e_high(target, &out)?;
                let n = h.as_slice().len() as f64;
                let dist = h
                    .as_slice()
                    .iter()
                    .zip(target.low.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    / n;
                records.push(FilterRecord { epoch, delta: f.delta(), e_low, e_high, dist });
                all_low &= e_low < stop_below;
            }
            ctx.note(format!(
                "epoch {epoch}: {}",
                records[records.len() - filters.len()..]
                    .iter()
                    .map(|r| format!("d={} e_low={:.3} e_high={:.3}", r.delta, r.e_low, r.e_high))
                    .collect::<Vec<_>>()
                    .join("  ")
            ));
            Ok(if all_low { Control::Stop } else { Control::Continue })
        };
        let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
        let t = train(&mut net, &objective, &tc, Some(&data.inputs), &mut [&mut probe])?;
        losses.extend(t.epochs.iter().copied().zip(t.losses.iter().copied()));
    }
    let verdicts = deltas
        .iter()
        .map(|&d| {
            let rows: Vec<&FilterRecord> = records.iter().filter(|r| r.delta == d).collect();
            let low_converged_at = rows.iter().find(|r| r.e_low < stop_below).map(|r| r.epoch);
            let until = low_converged_at.unwrap_or(usize::MAX);
            // the untrained epoch-0 output is near constant, so both errors sit at 1
            let violations = rows
                .iter()
                .filter(|r| r.epoch >= 1 && r.epoch <= until && r.e_low >= r.e_high)
                .map(|r| r.epoch)
                .collect();
            FilterVerdict { delta: d, low_converged_at, violations }
        })
        .collect();
    let accuracy = super::accuracy(&net, &data)?;
    Ok(FilterOutcome {
        dataset: DatasetInfo::from(&data),
        records,
        verdicts,
        losses,
        accuracy,
    })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("filter.csv", &filter_csv(&o.records))?;
    w.text("loss.csv", &super::loss_csv(&o.losses))?;
    w.svg("filter_heatmap.svg", || plots::filter_heatmap("e_low / e_high during training", &o.records))?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.seeds.insert("data".into(), cfg.u64("data_seed")?);
    m.datasets.push(o.dataset.clone());
    m.outputs = w.files;
    m.summary = json!({
        "input_scaling": "pixels / 255",
        "widths": o.verdicts.iter().map(|v| json!({
            "delta": v.delta,
            "e_low_converged_at": opt_epoch(v.low_converged_at),
            "violations": v.violations,
            "low_before_high": v.holds(),
        })).collect::<Vec<_>>(),
        "train_accuracy": o.accuracy,
        "final_loss": o.losses.last().map(|l| l.1),
    });
    Ok(m)
}
