use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `y = sum_j amplitude_j sin(frequency_j x)` on `n` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    pub amplitudes: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl SynthSpec {
    /// `sin x + sin 3x + sin 5x` on 201 points of `[-3.14, 3.14]`.
    pub fn app_a() -> Self {
        Self {
            name: "appA".into(),
            amplitudes: vec![1.0; 3],
            frequencies: vec![1.0, 3.0, 5.0],
            lo: -3.14,
            hi: 3.14,
            n: 201,
        }
    }

    /// `sin x + sin 2x` on 201 points of `[-3.14, 3.14]`.
    pub fn intro() -> Self {
        Self {
            name: "intro".into(),
            amplitudes: vec![1.0; 2],
            frequencies: vec![1.0, 2.0],
            lo: -3.14,
            hi: 3.14,
            n: 201,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "appA" | "appa" => Ok(Self::app_a()),
            "intro" => Ok(Self::intro()),
            other => Err(Error::invalid(format!("unknown synthetic preset '{other}' (expected appA or intro)"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.amplitudes
            .iter()
            .zip(&self.frequencies)
            .map(|(a, f)| a * (f * x).sin())
            .sum()
    }

    pub fn points(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        (0..self.n).map(|i| self.lo + span * i as f64 / (self.n - 1) as f64).collect()
    }
}

pub fn synth_1d<T: Scalar>(spec: &SynthSpec) -> Result<LabeledDataset<T>> {
    if spec.n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {}", spec.n)));
    }
    if spec.amplitudes.len() != spec.frequencies.len() {
        return Err(Error::invalid("amplitude and frequency lists differ in length"));
    }
    if !(spec.hi > spec.lo) || !spec.lo.is_finite() || !spec.hi.is_finite() {
        return Err(Error::invalid(format!("invalid range [{}, {}]", spec.lo, spec.hi)));
    }
    let xs = spec.points();
    let ys: Vec<T> = xs.iter().map(|&x| T::lit(spec.eval(x))).collect();
    let xs: Vec<T> = xs.into_iter().map(T::lit).collect();
    LabeledDataset::new(Matrix::column_vector(&xs), Matrix::column_vector(&ys), spec.name.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dft_1d, select_peaks};

    #[test]
    fn app_a_preset() {
        let d = synth_1d::<f64>(&SynthSpec::app_a()).unwrap();
        assert_eq!(d.len(), 201);
        assert!(d.labels.get(100, 0).abs() < 1e-15);
        assert_eq!(d.inputs.get(100, 0), 0.0);
    }

    #[test]
    fn intro_preset() {
        let s = SynthSpec::intro();
        assert!((s.eval(std::f64::consts::FRAC_PI_2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn app_a_has_three_peak_pairs() {
        let d = synth_1d::<f64>(&SynthSpec::app_a()).unwrap();
        let c = dft_1d(&d.labels.column(0)).unwrap();
        let mags: Vec<f64> = c.iter().map(|z| z.norm()).collect();
        let max = mags.iter().cloned().fold(0.0, f64::max);
        assert_eq!(select_peaks(&mags[..=100], 3).unwrap(), vec![1, 3, 5]);
        let strong: Vec<usize> = (0..201).filter(|&i| mags[i] > 0.2 * max).collect();
        assert_eq!(strong, vec![1, 3, 5, 196, 198, 200]);
    }

    #[test]
    fn errors() {
        let mut s = SynthSpec::app_a();
        s.n = 1;
        assert!(synth_1d::<f64>(&s).is_err());
        assert!(SynthSpec::preset("nope").is_err());
    }
}
