//! Projection method on MNIST: 1-d non-uniform transform of one output
//! component along the first principal direction.

use anyhow::{bail, Result};
use fpl_core::data::DatasetInfo;
use fpl_core::nn::{train, Control, Network, Supervised, Targets};
use fpl_core::spectral::{principal_direction, project, select_peaks, FourierBasis, SpectrumTrace};
use fpl_core::Matrix;
use serde_json::json;

use super::common::{mnist, network, opt_epoch, strictly_increasing, train_config, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-project", doc: "hyperparameter bundle" },
    KeySpec { key: "data_dir", default: "data", doc: "directory holding dataset files" },
    KeySpec { key: "mnist_images", default: "mnist/images-idx3-ubyte", doc: "IDX image file (relative to data_dir)" },
    KeySpec { key: "mnist_labels", default: "mnist/labels-idx1-ubyte", doc: "IDX label file (relative to data_dir)" },
    KeySpec { key: "subset", default: "5000", doc: "samples drawn from the file; 0 keeps all" },
    KeySpec { key: "data_seed", default: "0", doc: "subset sampling seed" },
    KeySpec { key: "component", default: "3", doc: "output component analysed (0-based; 3 is the fourth)" },
    KeySpec { key: "frequencies", default: "41", doc: "grid size k = j / L, j = 0..frequencies-1, L = projected range" },
    KeySpec { key: "peaks", default: "3", doc: "number of target spectral peaks to follow" },
    KeySpec { key: "threshold", default: "0.3", doc: "Delta_F level defining a crossing" },
    KeySpec { key: "widths", default: "784-64-32-10", doc: "layer widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.01", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.001", doc: "optimizer step size" },
    KeySpec { key: "optimizer", default: "adam", doc: "gd, sgd or adam" },
    KeySpec { key: "loss", default: "cross_entropy_softmax", doc: "cross_entropy_softmax (softmax head) or mse" },
    KeySpec { key: "batch_size", default: "full", doc: "minibatch size or full" },
    KeySpec { key: "epochs", default: "150", doc: "training epochs" },
    KeySpec { key: "record_every", default: "5", doc: "epochs between recorded spectra" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-project",
        doc: "5000-sample subset, widths 784-64-32-10 (full scale 784-400-200-10), Adam lr 1e-3, full batch, cross entropy",
        values: &[],
    },
    Preset {
        name: "paper-project",
        doc: "all samples, widths 784-400-200-10, tanh, softmax head, cross entropy, Adam lr 1e-3, batch 10000",
        values: &[("subset", "0"), ("widths", "784-400-200-10"), ("batch_size", "10000")],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "project",
    summary: "Delta_F of one MNIST output component along the first principal direction",
    keys: KEYS,
    presets: PRESETS,
};

pub struct ProjectOutcome {
    pub dataset: DatasetInfo,
    pub eigenvalue: f64,
    pub frequencies: Vec<f64>,
    pub target_magnitudes: Vec<f64>,
    pub trace: SpectrumTrace<f64>,
    pub crossings: Vec<Option<usize>>,
    pub losses: Vec<(usize, f64)>,
    pub accuracy: f64,
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<ProjectOutcome> {
    let data = mnist(cfg)?;
    let c = cfg.usize("component")?;
    let labels = data.label_column(c)?;
    let tc = train_config(cfg)?;
    let mut net = network(cfg, &tc)?;
    if net.output_dim() != data.label_dim() {
        bail!("network output width {} does not match {} label components", net.output_dim(), data.label_dim());
    }
    ctx.note("project: principal direction");
    let pc = principal_direction(&data.inputs)?;
    let xs = project(&data.inputs, &pc.direction)?;
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    let frequencies: Vec<f64> = (0..cfg.usize("frequencies")?).map(|j| j as f64 / range).collect();
    let full = FourierBasis::new(&xs, &frequencies)?;
    let target = full.transform(&labels)?;
    let target_magnitudes: Vec<f64> = target.iter().map(|z| z.norm()).collect();
    let peaks = select_peaks(&target_magnitudes, cfg.usize("peaks")?)?;
    let peak_freqs: Vec<f64> = peaks.iter().map(|&j| frequencies[j]).collect();
    let basis = FourierBasis::new(&xs, &peak_freqs)?;
    let mut trace = SpectrumTrace::new(peak_freqs, peaks.iter().map(|&j| target[j]).collect())?;

    let mut losses = Vec::new();
    {
        let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
            let h = snap.expect("probe inputs supplied").column(c);
            trace.push(epoch, basis.transform(&h)?)?;
            Ok(Control::Continue)
        };
        let targets = match (tc.loss, &data.classes) {
            (fpl_core::nn::LossKind::CrossEntropySoftmax, Some(cl)) => Targets::Classes(cl),
            _ => Targets::Values(&data.labels),
        };
        let objective = Supervised::new(&data.inputs, targets, tc.loss);
        let t = train(&mut net, &objective, &tc, Some(&data.inputs), &mut [&mut probe])?;
        losses.extend(t.epochs.iter().copied().zip(t.losses.iter().copied()));
    }
    let idx: Vec<usize> = (0..trace.frequencies().len()).collect();
    let crossings = trace.threshold_crossing_epochs(&idx, cfg.f64("threshold")?)?;
    let accuracy = super::accuracy(&net, &data)?;
    Ok(ProjectOutcome {
        dataset: DatasetInfo::from(&data),
        eigenvalue: pc.eigenvalue,
        frequencies,
        target_magnitudes,
        trace,
        crossings,
        losses,
        accuracy,
    })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("spectrum.csv", &o.trace.to_csv())?;
    w.text("loss.csv", &super::loss_csv(&o.losses))?;
    let mut s = String::from("k,abs_yhat\n");
    for (k, y) in o.frequencies.iter().zip(&o.target_magnitudes) {
        s.push_str(&format!("{k:e},{y:e}\n"));
    }
    w.text("target_spectrum.csv", &s)?;
    w.svg("delta_f.svg", || plots::delta_f("Delta_F along the first principal direction", &o.trace))?;
    w.svg("spectrum.svg", || plots::spectrum("target amplitude spectrum", &o.frequencies, &[("target", &o.target_magnitudes)]))?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.seeds.insert("data".into(), cfg.u64("data_seed")?);
    m.datasets.push(o.dataset.clone());
    m.outputs = w.files;
    m.summary = json!({
        "principal_eigenvalue": o.eigenvalue,
        "peaks": o.trace.frequencies(),
        "crossing_epochs": o.crossings.iter().map(|&e| opt_epoch(e)).collect::<Vec<_>>(),
        "ordered_low_to_high": strictly_increasing(&o.crossings),
        "train_accuracy": o.accuracy,
        "final_loss": o.losses.last().map(|l| l.1),
    });
    Ok(m)
}
