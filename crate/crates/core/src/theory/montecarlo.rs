//! Monte-Carlo estimates of how often low-frequency gradients dominate
//! high-frequency ones for hidden weights `W` drawn uniformly from a ball.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::fourier::{freq_grads_scaled, FreqLossState, OneHiddenParams, ScaledFreqGrads};
use crate::error::{Error, Result};
use crate::linalg::par_ranges;

/// Samples per independently seeded chunk; fixes the stream layout so the
/// estimate does not depend on the number of workers.
const CHUNK: usize = 4096;

/// Uniform sampler on the `m`-dimensional ball of radius `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSampler {
    pub dim: usize,
    pub radius: f64,
    pub seed: u64,
}

/// Components smaller than this are rejected; the closed forms are singular at `w_j = 0`.
pub const MIN_ABS_COMPONENT: f64 = 1e-8;

impl BallSampler {
    pub fn new(dim: usize, radius: f64, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("ball dimension must be at least 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { dim, radius, seed })
    }

    /// Generator for chunk `index`; chunks never share a stream.
    pub fn chunk_rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// One point: isotropic direction times `radius * U^{1/m}`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let mut v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let u: f64 = rng.random();
            let r = self.radius * u.powf(1.0 / self.dim as f64);
            for x in &mut v {
                *x *= r / norm;
            }
            if v.iter().all(|x| x.abs() >= MIN_ABS_COMPONENT) {
                return v;
            }
        }
    }

    /// `count` points drawn chunk by chunk.
    pub fn samples(&self, count: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(count);
        let mut chunk = 0u64;
        while out.len() < count {
            let mut rng = self.chunk_rng(chunk);
            let take = CHUNK.min(count - out.len());
            for _ in 0..take {
                out.push(self.sample(&mut rng));
            }
            chunk += 1;
        }
        out
    }
}

/// 95% Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Sum of terms `sign * exp(log)` without underflow: returns `(sign, log|sum|)`,
/// with sign 0 for an exact zero.
fn signed_log_sum(terms: &[(f64, f64)]) -> (f64, f64) {
    let max = terms
        .iter()
        .filter(|t| t.0 != 0.0)
        .map(|t| t.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return (0.0, f64::NEG_INFINITY);
    }
    let s: f64 = terms.iter().map(|&(sg, l)| sg * (l - max).exp()).sum();
    if s == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else {
        (s.signum(), max + s.abs().ln())
    }
}

/// Two-frequency setting of the dominance theorems.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSetup {
    pub k1: f64,
    pub k2: f64,
    pub target1: Complex<f64>,
    pub target2: Complex<f64>,
    /// Fixed output weights `a_j`; their count sets `m`.
    pub a: Vec<f64>,
    /// Fixed biases `b_j`.
    pub b: Vec<f64>,
}

impl TheoremSetup {
    /// `m` units with `a_j = 1`, `b_j = 0.5` and unit, zero-phase targets.
    pub fn standard(m: usize, k1: f64, k2: f64) -> Self {
        Self {
            k1,
            k2,
            target1: Complex::new(1.0, 0.0),
            target2: Complex::new(1.0, 0.0),
            a: vec![1.0; m],
            b: vec![0.5; m],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1.abs() > 0.0 && self.k2.abs() > self.k1.abs()) {
            return Err(Error::invalid("need |k2| > |k1| > 0"));
        }
        if self.target1.norm() == 0.0 || self.target2.norm() == 0.0 {
            return Err(Error::invalid("target amplitudes must be non-zero"));
        }
        if self.a.len() != self.b.len() || self.a.is_empty() {
            return Err(Error::invalid("a and b must be non-empty and of equal length"));
        }
        Ok(())
    }

    pub fn units(&self) -> usize {
        self.a.len()
    }
}

/// Outcome for one sampled `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleEvents {
    /// `|dL(k1)/dtheta| > |dL(k2)/dtheta|` for every parameter.
    pub dominance: bool,
    /// `dL(k1)/dt <= 0` and `dL(k1)/dt <= dL(k2)/dt` under gradient flow on `L(k1) + L(k2)`.
    pub faster_decay: bool,
    /// `d(L(k1) + L(k2))/dt <= 0`, evaluated from the two rates.
    pub dissipative: bool,
}

/// Flattened `(sign, log|g|)` for all three parameter families.
fn log_components(g: &ScaledFreqGrads<f64>) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(3 * g.da.len());
    for fam in [&g.da, &g.dw, &g.db] {
        for (&m, &s) in fam.iter().zip(&g.log_scale) {
            if m == 0.0 {
                out.push((0.0, f64::NEG_INFINITY));
            } else {
                out.push((m.signum(), m.abs().ln() - s));
            }
        }
    }
    out
}

/// Evaluates both theorem events for hidden weights `w`.
pub fn sample_events(setup: &TheoremSetup, w: &[f64]) -> Result<SampleEvents> {
    let params = OneHiddenParams::new(setup.a.clone(), w.to_vec(), setup.b.clone())?;
    let s1 = FreqLossState::new(&params, setup.k1, setup.target1)?;
    let s2 = FreqLossState::new(&params, setup.k2, setup.target2)?;
    let g1 = log_components(&freq_grads_scaled(&params, &s1)?);
    let g2 = log_components(&freq_grads_scaled(&params, &s2)?);

    let dominance = g1.iter().zip(&g2).all(|(p, q)| p.0 != 0.0 && p.1 > q.1);

    let sq = |g: &[(f64, f64)]| -> Vec<(f64, f64)> {
        g.iter().map(|&(s, l)| (if s == 0.0 { 0.0 } else { 1.0 }, 2.0 * l)).collect()
    };
    let cross: Vec<(f64, f64)> = g1.iter().zip(&g2).map(|(p, q)| (p.0 * q.0, p.1 + q.1)).collect();
    let neg = |t: &[(f64, f64)]| -> Vec<(f64, f64)> { t.iter().map(|&(s, l)| (-s, l)).collect() };
    let (sq1, sq2) = (sq(&g1), sq(&g2));

    // -dL1/dt = sum g1^2 + sum g1 g2 must be >= 0
    let rate1: Vec<(f64, f64)> = sq1.iter().chain(&cross).copied().collect();
    // dL2/dt - dL1/dt = sum g1^2 - sum g2^2 must be >= 0
    let gap: Vec<(f64, f64)> = sq1.iter().copied().chain(neg(&sq2)).collect();
    let faster_decay = signed_log_sum(&rate1).0 >= 0.0 && signed_log_sum(&gap).0 >= 0.0;

    // dL/dt = dL1/dt + dL2/dt = -(sum g1^2 + 2 sum g1 g2 + sum g2^2); allow rounding slack
    let total: Vec<(f64, f64)> = neg(&sq1)
        .into_iter()
        .chain(neg(&cross))
        .chain(neg(&cross))
        .chain(neg(&sq2))
        .collect();
    let (sign, log) = signed_log_sum(&total);
    let scale = signed_log_sum(&total.iter().map(|&(s, l)| (s.abs(), l)).collect::<Vec<_>>()).1;
    let dissipative = sign <= 0.0 || log - scale < (1e-12f64).ln();

    Ok(SampleEvents {
        dominance,
        faster_decay,
        dissipative,
    })
}

/// Aggregated Monte-Carlo counts at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremEstimate {
    pub delta: f64,
    pub samples: u64,
    pub dominance: u64,
    pub faster_decay: u64,
    /// Samples where dominance held but faster decay did not.
    pub implication_violations: u64,
    pub dissipation_violations: u64,
}

impl TheoremEstimate {
    pub fn ratio_thm1(&self) -> f64 {
        self.dominance as f64 / self.samples as f64
    }

    pub fn ratio_thm2(&self) -> f64 {
        self.faster_decay as f64 / self.samples as f64
    }

    pub fn ci_thm1(&self) -> (f64, f64) {
        wilson_interval(self.dominance, self.samples)
    }

    pub fn ci_thm2(&self) -> (f64, f64) {
        wilson_interval(self.faster_decay, self.samples)
    }

    fn merge(&mut self, other: &TheoremEstimate) {
        self.samples += other.samples;
        self.dominance += other.dominance;
        self.faster_decay += other.faster_decay;
        self.implication_violations += other.implication_violations;
        self.dissipation_violations += other.dissipation_violations;
    }
}

fn estimate_chunk(setup: &TheoremSetup, sampler: &BallSampler, chunk: u64, count: usize) -> Result<TheoremEstimate> {
    let mut rng = sampler.chunk_rng(chunk);
    let mut est = TheoremEstimate {
        delta: sampler.radius,
        samples: 0,
        dominance: 0,
        faster_decay: 0,
        implication_violations: 0,
        dissipation_violations: 0,
    };
    for _ in 0..count {
        let w = sampler.sample(&mut rng);
        let ev = sample_events(setup, &w)?;
        est.samples += 1;
        est.dominance += ev.dominance as u64;
        est.faster_decay += ev.faster_decay as u64;
        est.implication_violations += (ev.dominance && !ev.faster_decay) as u64;
        est.dissipation_violations += (!ev.dissipative) as u64;
    }
    Ok(est)
}

/// Estimates both theorem ratios over `samples` draws of `W` from the ball of radius `delta`.
pub fn theorem_ratios(setup: &TheoremSetup, delta: f64, samples: usize, seed: u64) -> Result<TheoremEstimate> {
    setup.validate()?;
    if samples == 0 {
        return Err(Error::invalid("sample count must be positive"));
    }
    let sampler = BallSampler::new(setup.units(), delta, seed)?;
    let chunks = samples.div_ceil(CHUNK);
    let size = |c: usize| CHUNK.min(samples - c * CHUNK);
    let parts: Vec<Result<TheoremEstimate>> = par_ranges(chunks, |range| {
        range
            .map(|c| estimate_chunk(setup, &sampler, c as u64, size(c)))
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let mut total = TheoremEstimate {
        delta,
        samples: 0,
        dominance: 0,
        faster_decay: 0,
        implication_violations: 0,
        dissipation_violations: 0,
    };
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// CSV `delta,samples,ratio_thm1,ci_lo,ci_hi,ratio_thm2,ci2_lo,ci2_hi,implication_violations,dissipation_violations`.
pub fn theory_csv(estimates: &[TheoremEstimate]) -> String {
    use std::fmt::Write as _;
    let mut s = String::from(
        "delta,samples,ratio_thm1,ci_lo,ci_hi,ratio_thm2,ci2_lo,ci2_hi,implication_violations,dissipation_violations\n",
    );
    for e in estimates {
        let (l1, h1) = e.ci_thm1();
        let (l2, h2) = e.ci_thm2();
        let _ = writeln!(
            s,
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            e.delta,
            e.samples,
            e.ratio_thm1(),
            l1,
            h1,
            e.ratio_thm2(),
            l2,
            h2,
            e.implication_violations,
            e.dissipation_violations
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_stay_inside() {
        let s = BallSampler::new(4, 0.25, 1).unwrap();
        let pts = s.samples(20_000);
        assert!(pts.iter().all(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt() <= 0.25 + 1e-15));
        let mean_sq: f64 = pts.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / 20_000.0;
        let expect = 0.25f64.powi(2) * 4.0 / 6.0;
        assert!((mean_sq / expect - 1.0).abs() < 0.02);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && hi > 0.5 && lo > 0.39 && hi < 0.61);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
        assert!(wilson_interval(10, 10).1 <= 1.0);
    }

    #[test]
    fn signed_sums() {
        let (s, l) = signed_log_sum(&[(1.0, 2.0f64.ln()), (-1.0, 0.0)]);
        assert_eq!(s, 1.0);
        assert!(l.abs() < 1e-15);
        assert_eq!(signed_log_sum(&[(1.0, -1000.0), (-1.0, -1000.0)]).0, 0.0);
        let (s, l) = signed_log_sum(&[(1.0, -2000.0), (1.0, -2000.0)]);
        assert_eq!(s, 1.0);
        assert!((l - (-2000.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn estimates_are_reproducible_and_bounded() {
        let setup = TheoremSetup::standard(4, 1.0, 3.0);
        let a = theorem_ratios(&setup, 0.5, 5000, 9).unwrap();
        let b = theorem_ratios(&setup, 0.5, 5000, 9).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.ratio_thm1()));
        assert_eq!(a.implication_violations, 0);
        assert_eq!(a.dissipation_violations, 0);
    }

    #[test]
    fn rejects_bad_setups() {
        let mut s = TheoremSetup::standard(2, 3.0, 1.0);
        assert!(theorem_ratios(&s, 0.5, 10, 0).is_err());
        s = TheoremSetup::standard(2, 1.0, 3.0);
        s.target2 = Complex::new(0.0, 0.0);
        assert!(theorem_ratios(&s, 0.5, 10, 0).is_err());
    }
}
