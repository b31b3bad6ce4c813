use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Largest dimension enumerated in full.
pub const MAX_PARITY_DIM: usize = 24;

/// `f(x) = prod_j x_j` on `{-1, 1}^d`, optionally restricted to a random subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParitySpec {
    pub dim: usize,
    /// `None` for the whole cube.
    pub subset: Option<usize>,
    pub seed: u64,
}

impl ParitySpec {
    pub fn full(dim: usize) -> Self {
        Self { dim, subset: None, seed: 0 }
    }

    pub fn sampled(dim: usize, size: usize, seed: u64) -> Self {
        Self { dim, subset: Some(size), seed }
    }

    pub fn cube_size(&self) -> usize {
        1usize << self.dim
    }
}

/// Corner `index` of the cube: bit `j` set means `x_j = -1`.
pub fn parity_corner(dim: usize, index: usize) -> Vec<f64> {
    (0..dim).map(|j| if index >> j & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

pub fn parity_dataset<T: Scalar>(spec: &ParitySpec) -> Result<LabeledDataset<T>> {
    if spec.dim == 0 || spec.dim > MAX_PARITY_DIM {
        return Err(Error::invalid(format!(
            "parity dimension must be in 1..={MAX_PARITY_DIM}, got {}",
            spec.dim
        )));
    }
    let total = spec.cube_size();
    let indices: Vec<usize> = match spec.subset {
        None => (0..total).collect(),
        Some(s) if s == 0 || s > total => {
            return Err(Error::invalid(format!("subset size {s} must be in 1..={total}")));
        }
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut picked = rand::seq::index::sample(&mut rng, total, s).into_vec();
            picked.sort_unstable();
            picked
        }
    };
    let mut xs = Vec::with_capacity(indices.len() * spec.dim);
    let mut ys = Vec::with_capacity(indices.len());
    for &i in &indices {
        xs.extend(parity_corner(spec.dim, i).into_iter().map(T::lit));
        ys.push(if i.count_ones() % 2 == 0 { T::one() } else { -T::one() });
    }
    let name = match spec.subset {
        None => format!("parity-d{}", spec.dim),
        Some(s) => format!("parity-d{}-s{}-seed{}", spec.dim, s, spec.seed),
    };
    LabeledDataset::new(
        Matrix::new(indices.len(), spec.dim, xs)?,
        Matrix::column_vector(&ys),
        name,
    )
}

/// `(1/2^d) sum_x f(x) exp(-i 2 pi k.x) = (-i)^d prod_j sin(2 pi k_j)`.
pub fn parity_exact_ft<T: Scalar>(k: &[T]) -> Complex<T> {
    let prod = k.iter().fold(T::one(), |acc, &kj| acc * (T::TAU() * kj).sin());
    let phase = match k.len() % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    };
    phase * prod
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(d: usize, k: &[f64]) -> Complex<f64> {
        let n = 1usize << d;
        let mut s = Complex::new(0.0, 0.0);
        for i in 0..n {
            let x = parity_corner(d, i);
            let f: f64 = x.iter().product();
            let a = -std::f64::consts::TAU * x.iter().zip(k).map(|(a, b)| a * b).sum::<f64>();
            s += Complex::new(a.cos(), a.sin()) * f;
        }
        s / n as f64
    }

    #[test]
    fn two_dim_labels() {
        let d = parity_dataset::<f64>(&ParitySpec::full(2)).unwrap();
        for i in 0..4 {
            let r = d.inputs.row(i);
            assert_eq!(d.labels.get(i, 0), r[0] * r[1]);
        }
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn full_cube_is_balanced() {
        for dim in 1..=8 {
            let d = parity_dataset::<f64>(&ParitySpec::full(dim)).unwrap();
            assert_eq!(d.labels.as_slice().iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn subsets_are_reproducible() {
        let a = parity_dataset::<f64>(&ParitySpec::sampled(10, 200, 3)).unwrap();
        let b = parity_dataset::<f64>(&ParitySpec::sampled(10, 200, 3)).unwrap();
        let c = parity_dataset::<f64>(&ParitySpec::sampled(10, 200, 4)).unwrap();
        assert_eq!(a.len(), 200);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert!(parity_dataset::<f64>(&ParitySpec::sampled(3, 9, 0)).is_err());
    }

    #[test]
    fn exact_transform_values() {
        assert_eq!(parity_exact_ft(&[0.0f64; 5]).norm(), 0.0);
        assert!((parity_exact_ft(&[0.25f64; 10]).norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn exact_transform_matches_corner_sum(d in 1usize..=6, seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let got = parity_exact_ft(&k);
            let want = brute(d, &k);
            prop_assert!((got - want).norm() < 1e-12);
        }
    }
}
