use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::fourier::delta_f;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Target and per-epoch network coefficients on a fixed frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace<T> {
    frequencies: Vec<T>,
    target: Vec<Complex<T>>,
    epochs: Vec<usize>,
    outputs: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> SpectrumTrace<T> {
    pub fn new(frequencies: Vec<T>, target: Vec<Complex<T>>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Empty("frequency grid"));
        }
        if target.len() != frequencies.len() {
            return Err(Error::DimensionMismatch {
                context: "target coefficients",
                expected: frequencies.len(),
                actual: target.len(),
            });
        }
        if frequencies.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("frequency grid must be strictly ascending"));
        }
        Ok(Self {
            frequencies,
            target,
            epochs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn push(&mut self, epoch: usize, coefficients: Vec<Complex<T>>) -> Result<()> {
        if coefficients.len() != self.frequencies.len() {
            return Err(Error::DimensionMismatch {
                context: "output coefficients",
                expected: self.frequencies.len(),
                actual: coefficients.len(),
            });
        }
        if self.epochs.last().is_some_and(|&e| e >= epoch) {
            return Err(Error::invalid("trace epochs must be strictly increasing"));
        }
        self.epochs.push(epoch);
        self.outputs.push(coefficients);
        Ok(())
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn target(&self) -> &[Complex<T>] {
        &self.target
    }

    pub fn epochs(&self) -> &[usize] {
        &self.epochs
    }

    pub fn outputs(&self) -> &[Vec<Complex<T>>] {
        &self.outputs
    }

    /// `Delta_F` of every recorded epoch at grid index `j`; `None` where undefined.
    pub fn delta_f_series(&self, j: usize) -> Result<Vec<Option<T>>> {
        if j >= self.frequencies.len() {
            return Err(Error::invalid(format!("frequency index {j} not in trace")));
        }
        Ok(self
            .outputs
            .iter()
            .map(|row| delta_f(self.target[j], row[j]).ok())
            .collect())
    }

    /// Grid index of frequency `k`, matched within a relative 1e-9.
    pub fn index_of(&self, k: T) -> Result<usize> {
        let tol = T::lit(1e-9) * (T::one() + k.abs());
        self.frequencies
            .iter()
            .position(|&f| (f - k).abs() <= tol)
            .ok_or_else(|| Error::invalid(format!("frequency {k} not in trace")))
    }

    /// For each grid index, the first recorded epoch with `Delta_F < threshold`.
    pub fn threshold_crossing_epochs(&self, indices: &[usize], threshold: f64) -> Result<Vec<Option<usize>>> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::invalid(format!("threshold must lie in (0, 1], got {threshold}")));
        }
        let th = T::lit(threshold);
        indices
            .iter()
            .map(|&j| {
                let series = self.delta_f_series(j)?;
                Ok(series
                    .iter()
                    .position(|d| d.is_some_and(|v| v < th))
                    .map(|p| self.epochs[p]))
            })
            .collect()
    }

    /// CSV with columns `epoch,k,re_yhat,im_yhat,re_hhat,im_hhat,delta_F`; an
    /// empty `delta_F` field marks an undefined relative error.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,k,re_yhat,im_yhat,re_hhat,im_hhat,delta_F\n");
        for (e, row) in self.epochs.iter().zip(&self.outputs) {
            for (j, h) in row.iter().enumerate() {
                let y = self.target[j];
                let d = delta_f(y, *h).map(|v| format!("{:e}", v.as_f64())).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{e},{:e},{:e},{:e},{:e},{:e},{d}",
                    self.frequencies[j].as_f64(),
                    y.re.as_f64(),
                    y.im.as_f64(),
                    h.re.as_f64(),
                    h.im.as_f64()
                );
            }
        }
        s
    }
}

/// One row of a filtering trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterRecord {
    pub epoch: usize,
    pub delta: f64,
    pub e_low: f64,
    pub e_high: f64,
    pub dist: f64,
}

pub fn filter_csv(records: &[FilterRecord]) -> String {
    let mut s = String::from("epoch,delta,e_low,e_high,dist\n");
    for r in records {
        let _ = writeln!(s, "{},{:e},{:e},{:e},{:e}", r.epoch, r.delta, r.e_low, r.e_high, r.dist);
    }
    s
}
