//! One-dimensional synthetic target: per-peak Delta_F while fitting.

use anyhow::Result;
use fpl_core::data::{synth_1d, DatasetInfo, SynthSpec};
use fpl_core::nn::{train, Control, Network, Supervised, Targets};
use fpl_core::spectral::{select_peaks, FourierBasis, SpectrumTrace};
use fpl_core::Matrix;
use serde_json::json;

use super::common::{network, opt_epoch, strictly_increasing, train_config, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-synth1d", doc: "hyperparameter bundle" },
    KeySpec { key: "target", default: "appA", doc: "synthetic target: appA (sin x + sin 3x + sin 5x) or intro (sin x + sin 2x)" },
    KeySpec { key: "samples", default: "201", doc: "evenly spaced training points on [-3.14, 3.14]" },
    KeySpec { key: "widths", default: "1-200-1", doc: "layer widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation: tanh or relu" },
    KeySpec { key: "init_std", default: "0.1", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.0002", doc: "optimizer step size" },
    KeySpec { key: "optimizer", default: "adam", doc: "gd, sgd or adam" },
    KeySpec { key: "loss", default: "mse", doc: "mse" },
    KeySpec { key: "batch_size", default: "full", doc: "minibatch size or full" },
    KeySpec { key: "epochs", default: "20000", doc: "training epochs" },
    KeySpec { key: "record_every", default: "50", doc: "epochs between recorded spectra" },
    KeySpec { key: "peaks", default: "3", doc: "number of target spectral peaks to follow" },
    KeySpec { key: "threshold", default: "0.3", doc: "Delta_F level defining a crossing" },
    KeySpec { key: "stop_when_crossed", default: "false", doc: "stop once every peak has crossed the threshold" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-synth1d",
        doc: "widths 1-200-1 (full scale 1-8000-1, width scaled by 1/40); other settings as at full scale",
        values: &[],
    },
    Preset {
        name: "paper-synth1d",
        doc: "widths 1-8000-1, tanh, init std 0.1, Adam lr 2e-4, full batch, MSE",
        values: &[("widths", "1-8000-1")],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "synth1d",
    summary: "fit a 1-d sum of sines and follow Delta_F at its spectral peaks",
    keys: KEYS,
    presets: PRESETS,
};

pub struct Synth1dOutcome {
    pub dataset: DatasetInfo,
    pub frequencies: Vec<f64>,
    pub target_magnitudes: Vec<f64>,
    pub output_magnitudes: Vec<f64>,
    pub trace: SpectrumTrace<f64>,
    pub losses: Vec<(usize, f64)>,
    pub crossings: Vec<Option<usize>>,
    pub threshold: f64,
    pub network: Network<f64>,
}

impl Synth1dOutcome {
    pub fn ordered(&self) -> bool {
        strictly_increasing(&self.crossings)
    }
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<Synth1dOutcome> {
    let mut spec = SynthSpec::preset(cfg.str("target")?)?;
    spec.n = cfg.usize("samples")?;
    let data = synth_1d::<f64>(&spec)?;
    let tc = train_config(cfg)?;
    let mut net = network(cfg, &tc)?;
    let threshold = cfg.f64("threshold")?;
    let stop_when_crossed = cfg.bool("stop_when_crossed")?;

    let xs = data.inputs.column(0);
    let ys = data.labels.column(0);
    let n = xs.len();
    // DFT frequencies of the sample spacing, in cycles per unit
    let period = n as f64 * (xs[1] - xs[0]);
    let frequencies: Vec<f64> = (0..=n / 2).map(|j| j as f64 / period).collect();
    let full = FourierBasis::new(&xs, &frequencies)?;
    let target_spec = full.transform(&ys)?;
    let target_magnitudes: Vec<f64> = target_spec.iter().map(|z| z.norm()).collect();
    let peaks = select_peaks(&target_magnitudes, cfg.usize("peaks")?)?;
    let peak_freqs: Vec<f64> = peaks.iter().map(|&j| frequencies[j]).collect();
    let basis = FourierBasis::new(&xs, &peak_freqs)?;
    let mut trace = SpectrumTrace::new(peak_freqs.clone(), peaks.iter().map(|&j| target_spec[j]).collect())?;
    ctx.note(format!("synth1d: peaks at k = {peak_freqs:?}"));

    let all: Vec<usize> = (0..peak_freqs.len()).collect();
    let mut losses = Vec::new();
    {
        let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
            let h = snap.expect("probe inputs supplied").as_slice();
            trace.push(epoch, basis.transform(h)?)?;
            if stop_when_crossed && trace.threshold_crossing_epochs(&all, threshold)?.iter().all(Option::is_some) {
                return Ok(Control::Stop);
            }
            Ok(Control::Continue)
        };
        let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
        let t = train(&mut net, &objective, &tc, Some(&data.inputs), &mut [&mut probe])?;
        losses.extend(t.epochs.iter().copied().zip(t.losses.iter().copied()));
    }
    let crossings = trace.threshold_crossing_epochs(&all, threshold)?;
    let out = net.forward(&data.inputs)?;
    let output_magnitudes = full.transform(out.as_slice())?.iter().map(|z| z.norm()).collect();
    Ok(Synth1dOutcome {
        dataset: DatasetInfo::from(&data),
        frequencies,
        target_magnitudes,
        output_magnitudes,
        trace,
        losses,
        crossings,
        threshold,
        network: net,
    })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("spectrum.csv", &o.trace.to_csv())?;
    w.text("loss.csv", &super::loss_csv(&o.losses))?;
    let mut s = String::from("k,abs_yhat,abs_hhat_final\n");
    for ((k, y), h) in o.frequencies.iter().zip(&o.target_magnitudes).zip(&o.output_magnitudes) {
        s.push_str(&format!("{k:e},{y:e},{h:e}\n"));
    }
    w.text("target_spectrum.csv", &s)?;
    w.svg("delta_f.svg", || plots::delta_f("Delta_F at target peaks", &o.trace))?;
    w.svg("spectrum.svg", || {
        plots::spectrum(
            "amplitude spectra after training",
            &o.frequencies,
            &[("target", &o.target_magnitudes), ("network", &o.output_magnitudes)],
        )
    })?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.datasets.push(o.dataset.clone());
    m.outputs = w.files;
    m.summary = json!({
        "peaks": o.trace.frequencies(),
        "threshold": o.threshold,
        "crossing_epochs": o.crossings.iter().map(|&e| opt_epoch(e)).collect::<Vec<_>>(),
        "ordered_low_to_high": o.ordered(),
        "final_loss": o.losses.last().map(|l| l.1),
    });
    Ok(m)
}
