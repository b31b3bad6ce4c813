//! Closed-form convergence model
//! `h(x,t) = c0 (1 - e^{-a0 t}) + sum_k c_k (1 - e^{-a_k t}) sin((2k-1) x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::spectral::{distance_and_turning_epoch, GaussianFilter, TurningPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealModel<T> {
    /// `c_k` for the odd frequencies `1, 3, 5, ...`.
    pub amplitudes: Vec<T>,
    /// Convergence rates `a_k`.
    pub rates: Vec<T>,
    pub offset: T,
    pub offset_rate: T,
}

/// Rates used for the F-Principle ordering; reversed for the anti ordering.
pub const PAPER_RATES: [f64; 4] = [200.0, 150.0, 5.0, 1.0];
pub const PAPER_AMPLITUDES: [f64; 4] = [1.0, 0.5, 0.2, 0.125];

impl<T: Scalar> IdealModel<T> {
    pub fn new(amplitudes: Vec<T>, rates: Vec<T>, offset: T, offset_rate: T) -> Result<Self> {
        if amplitudes.is_empty() || amplitudes.len() != rates.len() {
            return Err(Error::invalid("amplitude and rate lists must be non-empty and of equal length"));
        }
        if rates.iter().chain(std::iter::once(&offset_rate)).any(|&r| !(r > T::zero()) || !r.is_finite()) {
            return Err(Error::invalid("convergence rates must be positive"));
        }
        Ok(Self { amplitudes, rates, offset, offset_rate })
    }

    /// Fast low frequencies (`anti = false`) or fast high frequencies (`anti = true`),
    /// no offset term.
    pub fn paper(amplitudes: &[f64], anti: bool) -> Result<Self> {
        let mut rates: Vec<T> = PAPER_RATES.iter().map(|&r| T::lit(r)).collect();
        if anti {
            rates.reverse();
        }
        Self::new(amplitudes.iter().map(|&c| T::lit(c)).collect(), rates, T::zero(), T::one())
    }

    pub fn frequencies(&self) -> Vec<T> {
        (1..=self.amplitudes.len()).map(|k| T::from_usize_lossy(2 * k - 1)).collect()
    }

    pub fn value(&self, x: T, t: T) -> T {
        let mut h = self.offset * (T::one() - (-self.offset_rate * t).exp());
        for (k, (&c, &a)) in self.amplitudes.iter().zip(&self.rates).enumerate() {
            let f = T::from_usize_lossy(2 * k + 1);
            h += c * (T::one() - (-a * t).exp()) * (f * x).sin();
        }
        h
    }

    /// The `t -> infinity` limit.
    pub fn target(&self, x: T) -> T {
        let mut y = self.offset;
        for (k, &c) in self.amplitudes.iter().enumerate() {
            y += c * (T::from_usize_lossy(2 * k + 1) * x).sin();
        }
        y
    }

    /// `h(xs, t)` for each time; one row per time.
    pub fn simulate(&self, times: &[T], xs: &[T]) -> Vec<Vec<T>> {
        times
            .iter()
            .map(|&t| xs.iter().map(|&x| self.value(x, t)).collect())
            .collect()
    }
}

/// Filtered-distance trace of one smoothing width.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealDistance {
    pub delta: f64,
    pub turning: TurningPoint,
    /// Time of the turning point.
    pub turning_time: f64,
    pub unimodal: bool,
}

/// `Dist(y^delta, h(t))` for each width, using the step index as the epoch.
pub fn ideal_distances<T: Scalar>(
    model: &IdealModel<T>,
    times: &[T],
    xs: &[T],
    deltas: &[f64],
) -> Result<Vec<IdealDistance>> {
    if times.is_empty() || xs.is_empty() {
        return Err(Error::Empty("ideal simulation grid"));
    }
    let outputs = model.simulate(times, xs);
    let inputs = Matrix::column_vector(xs);
    let labels = Matrix::column_vector(&xs.iter().map(|&x| model.target(x)).collect::<Vec<T>>());
    let steps: Vec<usize> = (0..times.len()).collect();
    deltas
        .iter()
        .map(|&delta| {
            let low = GaussianFilter::new(&inputs, delta)?.low_pass(&labels)?;
            let turning = distance_and_turning_epoch(&steps, &outputs, low.as_slice())?;
            let unimodal = is_unimodal(&turning.distances);
            Ok(IdealDistance {
                delta,
                turning_time: times[turning.index].as_f64(),
                unimodal,
                turning,
            })
        })
        .collect()
}

/// Non-increasing up to an interior minimum, non-decreasing after it.
pub fn is_unimodal(values: &[f64]) -> bool {
    if values.len() < 3 {
        return false;
    }
    let m = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v < values[best] { i } else { best });
    if m == 0 || m == values.len() - 1 {
        return false;
    }
    values[..=m].windows(2).all(|w| w[1] <= w[0]) && values[m..].windows(2).all(|w| w[1] >= w[0])
}
