use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{par_ranges, squared_distance, Matrix};
use crate::scalar::Scalar;

/// Pairwise squared Euclidean distances between input rows.
pub fn pairwise_squared_distances<T: Scalar>(inputs: &Matrix<T>) -> Result<Matrix<T>> {
    let n = inputs.rows();
    if n == 0 {
        return Err(Error::Empty("inputs"));
    }
    if !inputs.all_finite() {
        return Err(Error::NonFinite("inputs"));
    }
    let rows = par_ranges(n, |range| {
        let mut block = Vec::with_capacity(range.len() * n);
        for i in range {
            let xi = inputs.row(i);
            block.extend((0..n).map(|j| squared_distance(xi, inputs.row(j))));
        }
        block
    });
    Matrix::new(n, n, rows.into_iter().flatten().collect())
}

/// Normalised Gaussian smoothing operator on a fixed input set.
///
/// `delta` is the variance-like width in `exp(-|x_i - x_j|^2 / (2 delta))`,
/// not a standard deviation. The self term `j = i` is part of every sum, so
/// every normaliser `C_i` is at least 1.
#[derive(Debug, Clone)]
pub struct GaussianFilter<T> {
    delta: f64,
    /// Row-normalised weights `G_ij / C_i`.
    weights: Matrix<T>,
    normalizers: Vec<T>,
}

impl<T: Scalar> GaussianFilter<T> {
    pub fn new(inputs: &Matrix<T>, delta: f64) -> Result<Self> {
        Self::from_squared_distances(&pairwise_squared_distances(inputs)?, delta)
    }

    pub fn from_squared_distances(sq: &Matrix<T>, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || delta.is_nan() {
            return Err(Error::invalid(format!("filter width delta must be positive, got {delta}")));
        }
        let n = sq.rows();
        if n == 0 || sq.cols() != n {
            return Err(Error::invalid("distance matrix must be square and non-empty"));
        }
        let scale = -T::one() / (T::lit(2.0) * T::lit(delta));
        let blocks = par_ranges(n, |range| {
            let mut w = Vec::with_capacity(range.len() * n);
            let mut c = Vec::with_capacity(range.len());
            for i in range {
                let start = w.len();
                w.extend(sq.row(i).iter().map(|&d| (d * scale).exp()));
                let ci: T = w[start..].iter().copied().sum();
                for v in &mut w[start..] {
                    *v /= ci;
                }
                c.push(ci);
            }
            (w, c)
        });
        let mut weights = Vec::with_capacity(n * n);
        let mut normalizers = Vec::with_capacity(n);
        for (w, c) in blocks {
            weights.extend(w);
            normalizers.extend(c);
        }
        Ok(Self {
            delta,
            weights: Matrix::new(n, n, weights)?,
            normalizers,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.normalizers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normalizers.is_empty()
    }

    pub fn normalizers(&self) -> &[T] {
        &self.normalizers
    }

    /// Low-frequency part `y_i^low = (1/C_i) sum_j y_j G(x_i - x_j)` of each label column.
    pub fn low_pass(&self, labels: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.len();
        if labels.rows() != n {
            return Err(Error::DimensionMismatch {
                context: "filtered labels",
                expected: n,
                actual: labels.rows(),
            });
        }
        let c = labels.cols();
        let blocks = par_ranges(n, |range| {
            let mut out = Vec::with_capacity(range.len() * c);
            for i in range {
                let start = out.len();
                out.resize(start + c, T::zero());
                let row = &mut out[start..];
                for (j, &w) in self.weights.row(i).iter().enumerate() {
                    for (o, &y) in row.iter_mut().zip(labels.row(j)) {
                        *o += w * y;
                    }
                }
            }
            out
        });
        Matrix::new(n, c, blocks.into_iter().flatten().collect())
    }

    pub fn split(&self, labels: &Matrix<T>) -> Result<FilteredDataset<T>> {
        let low = self.low_pass(labels)?;
        let high = Matrix::new(
            labels.rows(),
            labels.cols(),
            labels.as_slice().iter().zip(low.as_slice()).map(|(&y, &l)| y - l).collect(),
        )?;
        Ok(FilteredDataset {
            delta: self.delta,
            labels: labels.clone(),
            low,
            high,
            normalizers: self.normalizers.clone(),
        })
    }
}

/// Labels with their low/high decomposition at one filter width.
#[derive(Debug, Clone)]
pub struct FilteredDataset<T> {
    pub delta: f64,
    pub labels: Matrix<T>,
    pub low: Matrix<T>,
    pub high: Matrix<T>,
    pub normalizers: Vec<T>,
}

/// Relative errors of the low and high parts: `(e_low, e_high)`.
pub fn e_low_e_high<T: Scalar>(targets: &FilteredDataset<T>, outputs: &FilteredDataset<T>) -> Result<(T, T)> {
    if targets.low.rows() != outputs.low.rows() || targets.low.cols() != outputs.low.cols() {
        return Err(Error::DimensionMismatch {
            context: "filtered outputs",
            expected: targets.low.as_slice().len(),
            actual: outputs.low.as_slice().len(),
        });
    }
    let rel = |y: &Matrix<T>, h: &Matrix<T>, what: &'static str| -> Result<T> {
        let mut num = T::zero();
        let mut den = T::zero();
        for (&a, &b) in y.as_slice().iter().zip(h.as_slice()) {
            num += (a - b) * (a - b);
            den += a * a;
        }
        if den == T::zero() {
            return Err(Error::ZeroDenominator(what));
        }
        Ok((num / den).sqrt())
    };
    Ok((
        rel(&targets.low, &outputs.low, "e_low")?,
        rel(&targets.high, &outputs.high, "e_high")?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    /// Mean squared distance per recorded epoch.
    pub distances: Vec<f64>,
    /// Position in the trace of the global minimum (earliest on ties).
    pub index: usize,
    pub epoch: usize,
}

/// `Dist(y^low, h)` at each recorded epoch and the turning epoch where it is smallest.
pub fn distance_and_turning_epoch<T: Scalar>(
    epochs: &[usize],
    outputs: &[Vec<T>],
    filtered: &[T],
) -> Result<TurningPoint> {
    if epochs.is_empty() || outputs.is_empty() {
        return Err(Error::Empty("trace"));
    }
    if epochs.len() != outputs.len() {
        return Err(Error::DimensionMismatch {
            context: "trace epochs",
            expected: epochs.len(),
            actual: outputs.len(),
        });
    }
    let mut distances = Vec::with_capacity(outputs.len());
    for h in outputs {
        if h.len() != filtered.len() || h.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "trace outputs",
                expected: filtered.len(),
                actual: h.len(),
            });
        }
        let s: T = h.iter().zip(filtered).map(|(&a, &b)| (a - b) * (a - b)).sum();
        distances.push((s / T::from_usize_lossy(h.len())).as_f64());
    }
    Ok(turning_point(epochs, distances))
}

/// Earliest global minimum of a distance sequence.
pub fn turning_point(epochs: &[usize], distances: Vec<f64>) -> TurningPoint {
    let mut index = 0;
    for (i, &d) in distances.iter().enumerate() {
        if d < distances[index] {
            index = i;
        }
    }
    TurningPoint { epoch: epochs[index], index, distances }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_kernel_by_hand() {
        let x = Matrix::column_vector(&[0.0, 1.0]);
        let y = Matrix::column_vector(&[0.0, 1.0]);
        let f = GaussianFilter::new(&x, 0.5).unwrap();
        let low = f.low_pass(&y).unwrap();
        let e = (-1.0f64).exp();
        assert!((low.get(0, 0) - e / (1.0 + e)).abs() < 1e-15);
        assert!((low.get(0, 0) - 0.268941).abs() < 1e-6);
        assert!(f.normalizers().iter().all(|&c| c >= 1.0));
    }

    #[test]
    fn constant_labels_are_all_low() {
        let x = Matrix::column_vector(&[0.0, 0.3, 2.0, 5.0]);
        let y = Matrix::column_vector(&[1.5f64; 4]);
        let s = GaussianFilter::new(&x, 0.7).unwrap().split(&y).unwrap();
        assert!(s.low.as_slice().iter().all(|&v| (v - 1.5).abs() < 1e-12));
        assert!(s.high.as_slice().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn huge_width_averages() {
        let x = Matrix::column_vector(&[0.0, 0.3, 2.0, 5.0]);
        let y = Matrix::column_vector(&[1.0f64, -2.0, 4.0, 0.5]);
        let low = GaussianFilter::new(&x, 1e12).unwrap().low_pass(&y).unwrap();
        assert!(low.as_slice().iter().all(|&v| (v - 0.875).abs() < 1e-6));
        assert!(GaussianFilter::new(&x, 0.0).is_err());
    }

    #[test]
    fn error_pairs() {
        let x = Matrix::column_vector(&[0.0, 0.5, 1.0, 3.0]);
        let y = Matrix::column_vector(&[1.0, -1.0, 2.0, 0.3]);
        let f = GaussianFilter::new(&x, 0.2).unwrap();
        let t = f.split(&y).unwrap();
        assert_eq!(e_low_e_high(&t, &t).unwrap(), (0.0, 0.0));
        let zero = f.split(&Matrix::zeros(4, 1)).unwrap();
        assert_eq!(e_low_e_high(&t, &zero).unwrap(), (1.0, 1.0));
        let mut lowonly = t.clone();
        lowonly.high = Matrix::zeros(4, 1);
        assert_eq!(e_low_e_high(&t, &lowonly).unwrap(), (0.0, 1.0));
        assert!(matches!(e_low_e_high(&zero, &t), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn turning_epoch_rules() {
        let tp = turning_point(&[0, 10, 20, 30, 40], vec![3.0, 2.0, 1.0, 2.0, 3.0]);
        assert_eq!(tp.epoch, 20);
        let y = [1.0, 2.0];
        let tp = distance_and_turning_epoch(&[5, 6, 7], &vec![vec![0.0, 0.0]; 3], &y).unwrap();
        assert_eq!(tp.epoch, 5);
        assert!(distance_and_turning_epoch::<f64>(&[], &[], &y).is_err());
    }

    proptest! {
        #[test]
        fn decomposition_is_exact(
            ys in prop::collection::vec(-5.0f64..5.0, 2..25),
            delta in 0.01f64..10.0,
        ) {
            let n = ys.len();
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
            let f = GaussianFilter::new(&Matrix::column_vector(&xs), delta).unwrap();
            let s = f.split(&Matrix::column_vector(&ys)).unwrap();
            for i in 0..n {
                prop_assert!((s.low.get(i, 0) + s.high.get(i, 0) - ys[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn smoothing_variance_non_increasing(ys in prop::collection::vec(-5.0f64..5.0, 3..20)) {
            let n = ys.len();
            let xs: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
            let x = Matrix::column_vector(&xs);
            let y = Matrix::column_vector(&ys);
            let var = |v: &[f64]| {
                let m = v.iter().sum::<f64>() / v.len() as f64;
                v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / v.len() as f64
            };
            let mut prev = f64::INFINITY;
            for delta in [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0] {
                let low = GaussianFilter::new(&x, delta).unwrap().low_pass(&y).unwrap();
                let v = var(low.as_slice());
                prop_assert!(v <= prev * (1.0 + 1e-9) + 1e-15);
                prev = v;
            }
        }
    }
}
