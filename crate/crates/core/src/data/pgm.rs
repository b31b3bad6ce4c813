//! Grayscale PGM images as regression datasets over pixel coordinates.

use std::path::Path;

use super::{dataset::hex, LabeledDataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major gray levels.
    pub pixels: Vec<u16>,
}

/// Header tokens, skipping whitespace and `#` comments. Returns the offset after the last token.
fn header_tokens(bytes: &[u8], count: usize) -> Result<(Vec<String>, usize)> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    while out.len() < count {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
            i += 1;
        }
        if start == i {
            return Err(Error::format("pgm", "truncated header"));
        }
        out.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((out, i))
}

fn header_number(tok: &str, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::format("pgm", format!("bad {what} '{tok}'")))
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let (tok, end) = header_tokens(bytes, 4)?;
    let binary = match tok[0].as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(Error::format("pgm", format!("unsupported magic '{other}'"))),
    };
    let width = header_number(&tok[1], "width")?;
    let height = header_number(&tok[2], "height")?;
    let maxval = header_number(&tok[3], "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::format("pgm", "image has no pixels"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format("pgm", format!("maxval {maxval} outside 1..=65535")));
    }
    let n = width * height;
    let pixels: Vec<u16> = if binary {
        // exactly one whitespace byte separates the header from the raster
        let data = bytes.get(end + 1..).unwrap_or(&[]);
        let wide = maxval > 255;
        let need = if wide { 2 * n } else { n };
        if data.len() < need {
            return Err(Error::format("pgm", format!("truncated raster: {} of {need} bytes", data.len())));
        }
        if wide {
            data[..need].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
        } else {
            data[..n].iter().map(|&b| b as u16).collect()
        }
    } else {
        let (vals, _) = header_tokens(&bytes[end..], n)
            .map_err(|_| Error::format("pgm", "truncated ASCII raster"))?;
        vals.iter()
            .map(|v| header_number(v, "pixel value").map(|p| p as u16))
            .collect::<Result<_>>()?
    };
    if let Some(&p) = pixels.iter().find(|&&p| p as usize > maxval) {
        return Err(Error::format("pgm", format!("pixel value {p} exceeds maxval {maxval}")));
    }
    Ok(GrayImage {
        width,
        height,
        maxval: maxval as u16,
        pixels,
    })
}

pub fn encode_pgm(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n{}\n", image.width, image.height, image.maxval).into_bytes();
    for &p in &image.pixels {
        if image.maxval > 255 {
            out.extend_from_slice(&p.to_be_bytes());
        } else {
            out.push(p as u8);
        }
    }
    out
}

/// Every pixel as a sample plus the odd-column training split.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDataset<T> {
    pub width: usize,
    pub height: usize,
    /// Row-major over pixels; inputs are `(column, row)` scaled to `[0, 1]`.
    pub all: LabeledDataset<T>,
    pub train: Vec<bool>,
}

impl<T: Scalar> ImageDataset<T> {
    pub fn from_image(image: &GrayImage, provenance: String) -> Result<Self> {
        let (w, h) = (image.width, image.height);
        let coord = |i: usize, len: usize| if len > 1 { i as f64 / (len - 1) as f64 } else { 0.0 };
        let mut xs = Vec::with_capacity(2 * w * h);
        let mut train = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                xs.push(T::lit(coord(c, w)));
                xs.push(T::lit(coord(r, h)));
                train.push(c % 2 == 1);
            }
        }
        let raw: Vec<f64> = image.pixels.iter().map(|&p| p as f64 / image.maxval as f64).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let centred: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let peak = centred.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // constant images stay at zero instead of dividing by zero
        let ys: Vec<T> = centred
            .iter()
            .map(|&v| T::lit(if peak > 0.0 { v / peak } else { 0.0 }))
            .collect();
        let all = LabeledDataset::new(Matrix::new(w * h, 2, xs)?, Matrix::column_vector(&ys), provenance)?;
        Ok(Self {
            width: w,
            height: h,
            all,
            train,
        })
    }

    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.train.len()).filter(|&i| self.train[i]).collect()
    }

    pub fn training(&self) -> Result<LabeledDataset<T>> {
        self.all.select(&self.train_indices())
    }
}

pub fn load_pgm<T: Scalar>(path: &Path) -> Result<ImageDataset<T>> {
    use sha2::{Digest, Sha256};
    let bytes = std::fs::read(path)?;
    let image = parse_pgm(&bytes)?;
    let tag = format!("pgm:{}", &hex(&Sha256::digest(&bytes))[..16]);
    ImageDataset::from_image(&image, tag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(w: usize, h: usize) -> GrayImage {
        GrayImage {
            width: w,
            height: h,
            maxval: 255,
            pixels: (0..w * h).map(|i| ((i % w) * 255 / (w - 1)) as u16).collect(),
        }
    }

    #[test]
    fn ascii_with_comments() {
        let txt = b"P2\n# a comment\n3 2 # trailing\n10\n0 1 2\n3 4 10\n";
        let img = parse_pgm(txt).unwrap();
        assert_eq!((img.width, img.height, img.maxval), (3, 2, 10));
        assert_eq!(img.pixels, vec![0, 1, 2, 3, 4, 10]);
    }

    #[test]
    fn binary_round_trip() {
        let img = ramp(5, 3);
        assert_eq!(parse_pgm(&encode_pgm(&img)).unwrap(), img);
        let wide = GrayImage {
            width: 2,
            height: 1,
            maxval: 1000,
            pixels: vec![999, 3],
        };
        assert_eq!(parse_pgm(&encode_pgm(&wide)).unwrap(), wide);
    }

    #[test]
    fn malformed_headers() {
        assert!(parse_pgm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(parse_pgm(b"P5\n2 x\n255\n").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\0").is_err());
        assert!(parse_pgm(b"P2\n2 1\n70000\n1 2").is_err());
        assert!(parse_pgm(b"P2\n2 1\n5\n1 9").is_err());
        assert!(parse_pgm(b"P2\n2").is_err());
    }

    #[test]
    fn constant_image_centres_to_zero() {
        let img = GrayImage {
            width: 3,
            height: 3,
            maxval: 255,
            pixels: vec![77; 9],
        };
        let d = ImageDataset::<f64>::from_image(&img, "c".into()).unwrap();
        assert!(d.all.labels.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalised_and_split() {
        let d = ImageDataset::<f64>::from_image(&ramp(4, 4), "r".into()).unwrap();
        let peak = d.all.labels.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() < 1e-15);
        let mean: f64 = d.all.labels.as_slice().iter().sum::<f64>() / 16.0;
        assert!(mean.abs() < 1e-15);
        let t = d.training().unwrap();
        assert_eq!(t.len(), 8);
        let cols: std::collections::BTreeSet<i64> =
            (0..t.len()).map(|i| (t.inputs.get(i, 0) * 3.0).round() as i64).collect();
        assert_eq!(cols.into_iter().collect::<Vec<_>>(), vec![1, 3]);
        assert!(d.all.inputs.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn loads_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.pgm");
        std::fs::write(&p, encode_pgm(&ramp(6, 2))).unwrap();
        let d = load_pgm::<f64>(&p).unwrap();
        assert_eq!(d.all.len(), 12);
        assert!(d.all.provenance.starts_with("pgm:"));
    }
}
