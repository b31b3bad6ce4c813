//! Parity on a random subset of the cube: aliasing at low frequency.

use anyhow::{bail, Result};
use fpl_core::data::{parity_dataset, parity_exact_ft, DatasetInfo, ParitySpec};
use fpl_core::nn::{train, Control, Network, Supervised, Targets};
use fpl_core::spectral::{delta_f, FourierBasis, SpectrumTrace};
use fpl_core::Matrix;
use num_complex::Complex;
use serde_json::json;

use super::common::{network, train_config, RunContext, Writer};
use crate::config::{Config, KeySpec, Preset, Schema};
use crate::manifest::ExperimentManifest;
use crate::plots;

const KEYS: &[KeySpec] = &[
    KeySpec { key: "preset", default: "desk-parity", doc: "hyperparameter bundle" },
    KeySpec { key: "dim", default: "10", doc: "cube dimension d" },
    KeySpec { key: "subset", default: "200", doc: "training points s drawn from the cube" },
    KeySpec { key: "data_seed", default: "25", doc: "subset sampling seed" },
    KeySpec { key: "k_max", default: "0.25", doc: "largest per-coordinate frequency along the all-ones direction" },
    KeySpec { key: "k_points", default: "101", doc: "frequency grid points on [0, k_max]" },
    KeySpec { key: "low_band", default: "0.125", doc: "frequencies below this count as low" },
    KeySpec { key: "dominance", default: "0.5", doc: "fraction of the low-band maximum a local peak must reach" },
    KeySpec { key: "match_threshold", default: "0.3", doc: "Delta_F against the subset spectrum at dominant low frequencies" },
    KeySpec { key: "deviation_threshold", default: "0.5", doc: "Delta_F against the true spectrum at k_max" },
    KeySpec { key: "widths", default: "10-500-100-1", doc: "layer widths" },
    KeySpec { key: "activation", default: "tanh", doc: "hidden activation" },
    KeySpec { key: "init_std", default: "0.05", doc: "Gaussian initialisation standard deviation" },
    KeySpec { key: "learning_rate", default: "0.0005", doc: "optimizer step size" },
    KeySpec { key: "optimizer", default: "adam", doc: "gd, sgd or adam" },
    KeySpec { key: "loss", default: "mse", doc: "mse" },
    KeySpec { key: "batch_size", default: "full", doc: "minibatch size or full" },
    KeySpec { key: "epochs", default: "2000", doc: "training epochs" },
    KeySpec { key: "record_every", default: "20", doc: "epochs between recorded spectra" },
    KeySpec { key: "seed", default: "0", doc: "initialisation seed" },
];

const PRESETS: &[Preset] = &[
    Preset {
        name: "desk-parity",
        doc: "d = 10, s = 200, widths 10-500-100-1, tanh, Adam lr 5e-4, init std 0.05, full batch",
        values: &[],
    },
    Preset {
        name: "paper-parity",
        doc: "d = 10, s = 200, widths 10-500-100-1, tanh, Adam lr 5e-4, init std 0.05, full batch",
        values: &[],
    },
];

pub const SCHEMA: Schema = Schema {
    experiment: "parity",
    summary: "spectrum of parity on a random subset versus the whole cube",
    keys: KEYS,
    presets: PRESETS,
};

pub struct ParityOutcome {
    pub dataset: DatasetInfo,
    pub frequencies: Vec<f64>,
    /// Spectrum of the training labels.
    pub subset_ft: Vec<Complex<f64>>,
    /// Exact spectrum over the whole cube.
    pub true_ft: Vec<Complex<f64>>,
    /// Network spectrum over the whole cube, per recorded epoch, against `subset_ft`.
    pub trace: SpectrumTrace<f64>,
    pub losses: Vec<(usize, f64)>,
    pub dominant_low: Vec<usize>,
    pub aliasing_at_zero: f64,
    pub low_delta_f: Vec<f64>,
    pub high_deviation: f64,
    pub match_threshold: f64,
    pub deviation_threshold: f64,
}

impl ParityOutcome {
    pub fn aliased(&self) -> bool {
        self.aliasing_at_zero > 0.1
    }

    pub fn low_matched(&self) -> bool {
        !self.low_delta_f.is_empty() && self.low_delta_f.iter().all(|&d| d < self.match_threshold)
    }

    pub fn high_deviates(&self) -> bool {
        self.high_deviation > self.deviation_threshold
    }
}

/// Local maxima of `mags` below `band` reaching `fraction` of the band maximum.
pub fn dominant_low_frequencies(freqs: &[f64], mags: &[f64], band: f64, fraction: f64) -> Vec<usize> {
    let low: Vec<usize> = (0..freqs.len()).filter(|&j| freqs[j] < band).collect();
    let top = low.iter().map(|&j| mags[j]).fold(0.0f64, f64::max);
    low.into_iter()
        .filter(|&j| {
            let left = j == 0 || mags[j] >= mags[j - 1];
            let right = j + 1 == mags.len() || mags[j] >= mags[j + 1];
            left && right && mags[j] >= fraction * top && mags[j] > 0.0
        })
        .collect()
}

/// Sum of coordinates: the projection onto the all-ones direction with per-coordinate frequencies.
fn coordinate_sums(inputs: &Matrix) -> Vec<f64> {
    (0..inputs.rows()).map(|i| inputs.row(i).iter().sum()).collect()
}

pub fn execute(cfg: &Config, ctx: &RunContext) -> Result<ParityOutcome> {
    let dim = cfg.usize("dim")?;
    let spec = ParitySpec::sampled(dim, cfg.usize("subset")?, cfg.u64("data_seed")?);
    let data = parity_dataset::<f64>(&spec)?;
    let cube = parity_dataset::<f64>(&ParitySpec::full(dim))?;
    let k_max = cfg.f64("k_max")?;
    let points = cfg.usize("k_points")?;
    if points < 2 || !(k_max > 0.0) {
        bail!("need k_points >= 2 and k_max > 0");
    }
    let frequencies: Vec<f64> = (0..points).map(|i| k_max * i as f64 / (points - 1) as f64).collect();

    let subset_basis = FourierBasis::new(&coordinate_sums(&data.inputs), &frequencies)?;
    let subset_ft = subset_basis.transform(data.labels.as_slice())?;
    let true_ft: Vec<Complex<f64>> = frequencies.iter().map(|&k| parity_exact_ft(&vec![k; dim])).collect();
    let cube_basis = FourierBasis::new(&coordinate_sums(&cube.inputs), &frequencies)?;

    let mags: Vec<f64> = subset_ft.iter().map(|z| z.norm()).collect();
    let dominant_low = dominant_low_frequencies(&frequencies, &mags, cfg.f64("low_band")?, cfg.f64("dominance")?);
    ctx.note(format!(
        "parity: |f_S(0)| = {:.4}, dominant low k = {:?}",
        subset_ft[0].norm(),
        dominant_low.iter().map(|&j| frequencies[j]).collect::<Vec<_>>()
    ));

    let tc = train_config(cfg)?;
    let mut net = network(cfg, &tc)?;
    let mut trace = SpectrumTrace::new(frequencies.clone(), subset_ft.clone())?;
    let mut losses = Vec::new();
    {
        let mut probe = |epoch: usize, _: &Network<f64>, snap: Option<&Matrix>| -> fpl_core::Result<Control> {
            let h = snap.expect("probe inputs supplied").as_slice();
            trace.push(epoch, cube_basis.transform(h)?)?;
            Ok(Control::Continue)
        };
        let objective = Supervised::new(&data.inputs, Targets::Values(&data.labels), tc.loss);
        let t = train(&mut net, &objective, &tc, Some(&cube.inputs), &mut [&mut probe])?;
        losses.extend(t.epochs.iter().copied().zip(t.losses.iter().copied()));
    }

    let final_ft = cube_basis.transform(net.forward(&cube.inputs)?.as_slice())?;
    let low_delta_f = dominant_low
        .iter()
        .map(|&j| delta_f(subset_ft[j], final_ft[j]))
        .collect::<fpl_core::Result<Vec<f64>>>()?;
    let last = frequencies.len() - 1;
    let high_deviation = delta_f(true_ft[last], final_ft[last])?;
    Ok(ParityOutcome {
        dataset: DatasetInfo::from(&data),
        aliasing_at_zero: (subset_ft[0] - true_ft[0]).norm(),
        frequencies,
        subset_ft,
        true_ft,
        trace,
        losses,
        dominant_low,
        low_delta_f,
        high_deviation,
        match_threshold: cfg.f64("match_threshold")?,
        deviation_threshold: cfg.f64("deviation_threshold")?,
    })
}

pub fn run(cfg: &Config, ctx: &RunContext) -> Result<ExperimentManifest> {
    let o = execute(cfg, ctx)?;
    let mut w = Writer::new(ctx)?;
    w.text("parity_trace.csv", &o.trace.to_csv())?;
    w.text("loss.csv", &super::loss_csv(&o.losses))?;
    let final_ft = o.trace.outputs().last().cloned().unwrap_or_default();
    let mut s = String::from("k,re_fS,im_fS,re_f,im_f,re_hhat,im_hhat\n");
    for (j, k) in o.frequencies.iter().enumerate() {
        let h = final_ft.get(j).copied().unwrap_or_default();
        s.push_str(&format!(
            "{k:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
            o.subset_ft[j].re, o.subset_ft[j].im, o.true_ft[j].re, o.true_ft[j].im, h.re, h.im
        ));
    }
    w.text("parity_spectrum.csv", &s)?;
    w.svg("parity_spectrum.svg", || {
        let abs = |v: &[Complex<f64>]| v.iter().map(|z| z.norm()).collect::<Vec<f64>>();
        let (fs, f, h) = (abs(&o.subset_ft), abs(&o.true_ft), abs(&final_ft));
        plots::spectrum(
            "parity spectra along the all-ones direction",
            &o.frequencies,
            &[("subset labels", &fs), ("whole cube", &f), ("network", &h)],
        )
    })?;

    let mut m = ExperimentManifest::new(cfg, SCHEMA.preset(cfg.str("preset")?)?.doc);
    m.seeds.insert("init".into(), cfg.u64("seed")?);
    m.seeds.insert("data".into(), cfg.u64("data_seed")?);
    m.datasets.push(o.dataset.clone());
    m.outputs = w.files;
    m.summary = json!({
        "aliasing_at_zero": o.aliasing_at_zero,
        "dominant_low_frequencies": o.dominant_low.iter().map(|&j| o.frequencies[j]).collect::<Vec<_>>(),
        "low_delta_f": o.low_delta_f,
        "high_deviation": o.high_deviation,
        "aliased": o.aliased(),
        "low_matched": o.low_matched(),
        "high_deviates": o.high_deviates(),
        "final_loss": o.losses.last().map(|l| l.1),
    });
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_frequencies_respect_band_and_level() {
        let f = [0.0, 0.1, 0.2, 0.3, 0.4];
        let m = [1.0, 0.2, 0.6, 0.1, 5.0];
        assert_eq!(dominant_low_frequencies(&f, &m, 0.35, 0.5), vec![0, 2]);
        assert_eq!(dominant_low_frequencies(&f, &m, 0.35, 0.9), vec![0]);
    }
}
