use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Inputs, labels and where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    pub inputs: Matrix<T>,
    pub labels: Matrix<T>,
    pub classes: Option<Vec<usize>>,
    /// Preset name or source file digest.
    pub provenance: String,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(inputs: Matrix<T>, labels: Matrix<T>, provenance: impl Into<String>) -> Result<Self> {
        if inputs.rows() == 0 {
            return Err(Error::Empty("dataset"));
        }
        if labels.rows() != inputs.rows() {
            return Err(Error::DimensionMismatch {
                context: "dataset labels",
                expected: inputs.rows(),
                actual: labels.rows(),
            });
        }
        Ok(Self {
            inputs,
            labels,
            classes: None,
            provenance: provenance.into(),
        })
    }

    pub fn with_classes(mut self, classes: Vec<usize>) -> Result<Self> {
        if classes.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "class indices",
                expected: self.len(),
                actual: classes.len(),
            });
        }
        self.classes = Some(classes);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn label_dim(&self) -> usize {
        self.labels.cols()
    }

    /// One label component as a vector.
    pub fn label_column(&self, c: usize) -> Result<Vec<T>> {
        if c >= self.label_dim() {
            return Err(Error::invalid(format!(
                "label component {c} out of range for {} components",
                self.label_dim()
            )));
        }
        Ok(self.labels.column(c))
    }

    /// Rows in the given order; provenance gains a `[subset]` suffix.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.len()) {
            return Err(Error::invalid(format!("row {r} out of range for {} samples", self.len())));
        }
        let mut out = Self::new(
            self.inputs.select_rows(rows),
            self.labels.select_rows(rows),
            format!("{}[subset]", self.provenance),
        )?;
        if let Some(c) = &self.classes {
            out.classes = Some(rows.iter().map(|&r| c[r]).collect());
        }
        Ok(out)
    }

    /// SHA-256 over dimensions then inputs and labels as little-endian f64.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for m in [&self.inputs, &self.labels] {
            h.update((m.rows() as u64).to_le_bytes());
            h.update((m.cols() as u64).to_le_bytes());
            for v in m.as_slice() {
                h.update(v.as_f64().to_le_bytes());
            }
        }
        hex(&h.finalize())
    }
}

/// Lower-case hex encoding.
pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Summary written into experiment manifests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub provenance: String,
    pub samples: usize,
    pub input_dim: usize,
    pub label_dim: usize,
    pub digest: String,
}

impl<T: Scalar> From<&LabeledDataset<T>> for DatasetInfo {
    fn from(d: &LabeledDataset<T>) -> Self {
        Self {
            provenance: d.provenance.clone(),
            samples: d.len(),
            input_dim: d.input_dim(),
            label_dim: d.label_dim(),
            digest: d.digest(),
        }
    }
}
