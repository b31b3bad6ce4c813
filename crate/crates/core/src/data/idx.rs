//! IDX image/label files as used by MNIST.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dataset::hex, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
pub const NUM_CLASSES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format("idx", format!("truncated header reading {what}")))
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages> {
    let magic = be_u32(bytes, 0, "magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::format("idx", format!("bad image magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}")));
    }
    let count = be_u32(bytes, 4, "image count")? as usize;
    let rows = be_u32(bytes, 8, "row count")? as usize;
    let cols = be_u32(bytes, 12, "column count")? as usize;
    let need = count
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::format("idx", "image dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() < need {
        return Err(Error::format(
            "idx",
            format!("truncated image payload: {} of {need} bytes", payload.len()),
        ));
    }
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels: payload[..need].to_vec(),
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, "magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::format("idx", format!("bad label magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}")));
    }
    let count = be_u32(bytes, 4, "label count")? as usize;
    let payload = &bytes[8..];
    if payload.len() < count {
        return Err(Error::format(
            "idx",
            format!("truncated label payload: {} of {count} bytes", payload.len()),
        ));
    }
    let labels = payload[..count].to_vec();
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= NUM_CLASSES) {
        return Err(Error::format("idx", format!("label {bad} outside 0..{NUM_CLASSES}")));
    }
    Ok(labels)
}

pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for v in [IDX_IMAGES_MAGIC, images.count as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Pixels scaled to `[0, 1]`, one-hot labels. With `subset = Some(s)`, `s`
/// samples are drawn without replacement under `seed`, kept in file order.
pub fn idx_dataset<T: Scalar>(
    images: &IdxImages,
    labels: &[u8],
    subset: Option<usize>,
    seed: u64,
    provenance: String,
) -> Result<LabeledDataset<T>> {
    if images.count != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "idx label count",
            expected: images.count,
            actual: labels.len(),
        });
    }
    if images.count == 0 {
        return Err(Error::Empty("idx images"));
    }
    let rows: Vec<usize> = match subset {
        None => (0..images.count).collect(),
        Some(s) if s == 0 || s > images.count => {
            return Err(Error::invalid(format!("subset size {s} must be in 1..={}", images.count)));
        }
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut r = rand::seq::index::sample(&mut rng, images.count, s).into_vec();
            r.sort_unstable();
            r
        }
    };
    let dim = images.rows * images.cols;
    let scale = T::one() / T::lit(255.0);
    let mut xs = Vec::with_capacity(rows.len() * dim);
    let mut ys = vec![T::zero(); rows.len() * NUM_CLASSES];
    let mut classes = Vec::with_capacity(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        xs.extend(images.pixels[i * dim..(i + 1) * dim].iter().map(|&p| T::lit(p as f64) * scale));
        let c = labels[i] as usize;
        ys[r * NUM_CLASSES + c] = T::one();
        classes.push(c);
    }
    let provenance = match subset {
        None => provenance,
        Some(s) => format!("{provenance}[subset {s} seed {seed}]"),
    };
    LabeledDataset::new(
        Matrix::new(rows.len(), dim, xs)?,
        Matrix::new(rows.len(), NUM_CLASSES, ys)?,
        provenance,
    )?
    .with_classes(classes)
}

/// Reads an image file and its label file.
pub fn load_idx<T: Scalar>(
    images_path: &Path,
    labels_path: &Path,
    subset: Option<usize>,
    seed: u64,
) -> Result<LabeledDataset<T>> {
    use sha2::{Digest, Sha256};
    let img_bytes = std::fs::read(images_path)?;
    let lbl_bytes = std::fs::read(labels_path)?;
    let images = parse_idx_images(&img_bytes)?;
    let labels = parse_idx_labels(&lbl_bytes)?;
    let mut h = Sha256::new();
    h.update(&img_bytes);
    h.update(&lbl_bytes);
    let tag = format!("idx:{}", &hex(&h.finalize())[..16]);
    idx_dataset(&images, &labels, subset, seed, tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (IdxImages, Vec<u8>) {
        let images = IdxImages {
            count: 5,
            rows: 2,
            cols: 3,
            pixels: (0..30).map(|v| (v * 8) as u8).collect(),
        };
        (images, vec![3, 0, 9, 1, 3])
    }

    #[test]
    fn header_constants() {
        let mut b = vec![0, 0, 8, 3, 0, 0, 0x27, 0x10, 0, 0, 0, 28, 0, 0, 0, 28];
        b.resize(16 + 10000 * 784, 0);
        let img = parse_idx_images(&b).unwrap();
        assert_eq!((img.count, img.rows, img.cols), (10000, 28, 28));
    }

    #[test]
    fn round_trip_and_scaling() {
        let (images, labels) = sample();
        let back = parse_idx_images(&encode_idx_images(&images)).unwrap();
        assert_eq!(back, images);
        assert_eq!(parse_idx_labels(&encode_idx_labels(&labels)).unwrap(), labels);
        let d = idx_dataset::<f64>(&images, &labels, None, 0, "t".into()).unwrap();
        assert!(d.inputs.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        for i in 0..d.len() {
            assert_eq!(d.labels.row(i).iter().sum::<f64>(), 1.0);
            assert_eq!(d.labels.get(i, labels[i] as usize), 1.0);
        }
        assert_eq!(d.inputs.cols(), 6);
    }

    #[test]
    fn bad_inputs() {
        let (images, labels) = sample();
        let mut b = encode_idx_images(&images);
        b[3] = 1;
        assert!(parse_idx_images(&b).is_err());
        let b = encode_idx_images(&images);
        assert!(parse_idx_images(&b[..b.len() - 1]).is_err());
        assert!(parse_idx_labels(&encode_idx_labels(&labels)[..9]).is_err());
        assert!(idx_dataset::<f64>(&images, &labels[..4], None, 0, "t".into()).is_err());
        assert!(parse_idx_labels(&encode_idx_labels(&[12])).is_err());
    }

    #[test]
    fn seeded_subsets() {
        let (images, labels) = sample();
        let a = idx_dataset::<f64>(&images, &labels, Some(3), 11, "t".into()).unwrap();
        let b = idx_dataset::<f64>(&images, &labels, Some(3), 11, "t".into()).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.len(), 3);
        assert!(idx_dataset::<f64>(&images, &labels, Some(6), 11, "t".into()).is_err());
    }

    #[test]
    fn loads_from_files() {
        let (images, labels) = sample();
        let dir = tempfile::tempdir().unwrap();
        let (pi, pl) = (dir.path().join("img"), dir.path().join("lbl"));
        std::fs::write(&pi, encode_idx_images(&images)).unwrap();
        std::fs::write(&pl, encode_idx_labels(&labels)).unwrap();
        let d = load_idx::<f64>(&pi, &pl, None, 0).unwrap();
        assert!(d.provenance.starts_with("idx:"));
        assert_eq!(d.classes.as_deref().unwrap(), &labels.iter().map(|&l| l as usize).collect::<Vec<_>>()[..]);
    }
}
