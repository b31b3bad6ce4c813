//! Fitting a grayscale image from its odd columns; Delta_F along one row.

use anyhow::{bail, Result};
use fpl_core::data::{encode_pgm, load_pgm, DatasetInfo, GrayImage};
use fpl_core::nn::{train, Control, Network, Supervised, Targets};
use fpl_core::spectral::{select_peaks, FourierBasis, SpectrumTrace};
use fpl_core::Matrix;
use serde_json::json;

use super::common::{data_path, network, opt_epoch, strictly_increasing, train_config, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-image-small", doc: "hyperparameter bundle" },
    KeySpec { key: "data_dir", default: "data", doc: "directory holding dataset files" },
    KeySpec { key: "image", default: "images/shapes.pgm", doc: "PGM image (relative to data_dir)" },
    KeySpec { key: "row", default: "middle", doc: "image row used for the 1-d slice, or middle" },
    KeySpec { key: "peaks", default: "5", doc: "spectral peaks of the slice to follow (fewer if the slice has fewer)" },
    KeySpec { key: "threshold", default: "0.3", doc: "Delta_F level defining a crossing" },
    KeySpec { key: "widths", default: "2-100-50-1", doc: "layer widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.08", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.0002", doc: "optimizer step size" },
    KeySpec { key: "optimizer", default: "adam", doc: "gd, sgd or adam" },
    KeySpec { key: "loss", default: "mse", doc: "mse" },
    KeySpec { key: "batch_size", default: "full", doc: "minibatch size or full" },
    KeySpec { key: "epochs", default: "3000", doc: "training epochs" },
    KeySpec { key: "record_every", default: "20", doc: "epochs between recorded spectra" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-image-small",
        doc: "widths 2-100-50-1 (full scale 2-400-200-100-1), small initialisation std 0.08, Adam lr 2e-4, full batch",
        values: &[],
    },
    Preset {
        name: "desk-image-large",
        doc: "widths 2-100-50-1 (full scale 2-400-200-100-1), large initialisation std 1, Adam lr 2e-4, full batch",
        values: &[("init_std", "1")],
    },
    Preset {
        name: "paper-image-small",
        doc: "widths 2-400-200-100-1, tanh, init std 0.08, Adam lr 2e-4, full batch, MSE",
        values: &[("widths", "2-400-200-100-1"), ("epochs", "20000")],
    },
    Preset {
        name: "paper-image-large",
        doc: "widths 2-400-200-100-1, tanh, init std 1, Adam lr 2e-4, full batch, MSE",
        values: &[("widths", "2-400-200-100-1"), ("init_std", "1"), ("epochs", "20000")],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "image2d",
    summary: "fit a 2-d grayscale image from its odd columns and follow Delta_F along one row",
    keys: KEYS,
    presets: PRESETS,
};

pub struct Image2dOutcome {
    pub dataset: DatasetInfo,
    pub width: usize,
    pub height: usize,
    pub row: usize,
    /// Network output for every pixel, row-major.
    pub output: Vec<f64>,
    pub labels: Vec<f64>,
    pub train: Vec<bool>,
    pub trace: SpectrumTrace<f64>,
    pub crossings: Vec<Option<usize>>,
    pub losses: Vec<(usize, f64)>,
    pub train_mse: f64,
    pub test_mse: f64,
}

impl Image2dOutcome {
    pub fn ordered(&self) -> bool {
        strictly_increasing(&self.crossings)
    }

    /// Output mapped from `[-1, 1]` to 8-bit gray.
    pub fn output_image(&self) -> GrayImage {
        let pixels = self
            .output
            .iter()
            .map(|&v| ((v.clamp(-1.0, 1.0) + 1.0) * 127.5).round() as u16)
            .collect();
        GrayImage { width: self.width, height: self.height, maxval: 255, pixels }
    }
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<Image2dOutcome> {
    let image = load_pgm::<f64>(&data_path(cfg, "image")?)?;
    let (w, h) = (image.width, image.height);
    if w < 4 || h < 1 {
        bail!("image must be at least 4 pixels wide");
    }
    let row = match cfg.str("row")? {
        "middle" => h / 2,
        _ => cfg.usize("row")?,
    };
    if row >= h {
        bail!("config key 'row': {row} is outside an image of height {h}");
    }
    let data = image.training()?;

    // training pixels of the slice, spaced 2 columns apart
    let slice: Vec<usize> = (0..w).filter(|c| c % 2 == 1).map(|c| row * w + c).collect();
    let slice_inputs = image.all.inputs.select_rows(&slice);
    let xs: Vec<f64> = slice.iter().map(|&i| image.all.inputs.row(i)[0]).collect();
    let ys: Vec<f64> = slice.iter().map(|&i| image.all.labels.row(i)[0]).collect();
    let n = xs.len();
    let period = n as f64 * (xs[1] - xs[0]);
    let frequencies: Vec<f64> = (0..=n / 2).map(|j| j as f64 / period).collect();
    let target = FourierBasis::new(&xs, &frequencies)?.transform(&ys)?;
    let mags: Vec<f64> = target.iter().map(|z| z.norm()).collect();
    let mut count = cfg.usize("peaks")?;
    let peaks = loop {
        match select_peaks(&mags, count) {
            Ok(p) => break p,
            Err(_) if count > 1 => count -= 1,
            Err(e) => return Err(e.into()),
        }
    };
    let peak_freqs: Vec<f64> = peaks.iter().map(|&j| frequencies[j]).collect();
    ctx.note(format!("image2d: row {row}, peaks at k = {peak_freqs:?}"));
    let basis = FourierBasis::new(&xs, &peak_freqs)?;
    let mut trace = SpectrumTrace::new(peak_freqs, peaks.iter().map(|&j| target[j]).collect())?;

    let tc = train_config(cfg)?;
    let mut net = network(cfg, &tc)?;
    let mut losses = Vec::new();
    {
        let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
            trace.push(epoch, basis.transform(snap.expect("probe inputs supplied").as_slice())?)?;
            Ok(Control::Continue)
        };
        let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
        let t = train(&mut net, &objective, &tc, Some(&slice_inputs), &mut [&mut probe])?;
        losses.extend(t.epochs.iter().copied().zip(t.losses.iter().copied()));
    }
    let all: Vec<usize> = (0..trace.frequencies().len()).collect();
    let crossings = trace.threshold_crossing_epochs(&all, cfg.f64("threshold")?)?;
    let output = net.forward(&image.all.inputs)?.as_slice().to_vec();
    let labels = image.all.labels.as_slice().to_vec();
    let split = |keep: bool| -> (Vec<f64>, Vec<f64>) {
        (0..labels.len()).filter(|&i| image.train[i] == keep).map(|i| (output[i], labels[i])).unzip()
    };
    let (tr_h, tr_y) = split(true);
    let (te_h, te_y) = split(false);
    Ok(Image2dOutcome {
        dataset: DatasetInfo::from(&image.all),
        width: w,
        height: h,
        row,
        train_mse: mse(&tr_h, &tr_y),
        test_mse: mse(&te_h, &te_y),
        output,
        labels,
        train: image.train,
        trace,
        crossings,
        losses,
    })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("image_trace.csv", &o.trace.to_csv())?;
    w.text("loss.csv", &super::loss_csv(&o.losses))?;
    let mut s = String::from("column,train,target,output\n");
    for c in 0..o.width {
        let i = o.row * o.width + c;
        s.push_str(&format!("{c},{},{:e},{:e}\n", o.train[i] as u8, o.labels[i], o.output[i]));
    }
    w.text("image_slice.csv", &s)?;
    w.bytes("image_output.pgm", &encode_pgm(&o.output_image()))?;
    w.svg("delta_f.svg", || plots::delta_f("Delta_F along the image slice", &o.trace))?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.datasets.push(o.dataset.clone());
    m.outputs = w.files;
    m.summary = json!({
        "row": o.row,
        "peaks": o.trace.frequencies(),
        "crossing_epochs": o.crossings.iter().map(|&e| opt_epoch(e)).collect::<Vec<_>>(),
        "ordered_low_to_high": o.ordered(),
        "train_mse": o.train_mse,
        "test_mse": o.test_mse,
        "final_loss": o.losses.last().map(|l| l.1),
    });
    Ok(m)
}
