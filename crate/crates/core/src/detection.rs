//! AWGN channel, maximum-likelihood detection and bit LLRs over a 4D
//! labeling.
//!
//! Everything here works on a normalized labeling (unit average 2D-symbol
//! energy), so one noise scale `n0` applies to every constellation.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::constellation::Vector4D;
use crate::error::{invalid, Result};
use crate::graymap::Labeling4D;

/// A received 4D vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisyVector4D {
    pub coords: [f64; 4],
}

impl NoisyVector4D {
    pub fn dist2(&self, v: &Vector4D) -> f64 {
        self.coords
            .iter()
            .zip(v.coords.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl From<Vector4D> for NoisyVector4D {
    fn from(v: Vector4D) -> Self {
        NoisyVector4D { coords: v.coords }
    }
}

/// SNR bookkeeping for one 4D labeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSpec {
    pub ebn0_db: f64,
    /// Bits per 4D vector that count towards `Eb`. For coded links this is
    /// `k · rate`.
    pub bits_per_4d: f64,
    /// Average energy per 2D symbol.
    pub es2d: f64,
}

/// `N0 = 2·Es2D / (bits · 10^(Eb/N0 / 10))`: two 2D symbols carry the bits.
pub fn snr_to_n0(s: SnrSpec) -> Result<f64> {
    if !(s.ebn0_db.is_finite() && s.bits_per_4d > 0.0 && s.es2d > 0.0) {
        return invalid(format!("invalid SNR specification {s:?}"));
    }
    Ok(2.0 * s.es2d / (s.bits_per_4d * 10f64.powf(s.ebn0_db / 10.0)))
}

/// Adds white Gaussian noise of variance `n0 / 2` to each real dimension.
pub fn add_awgn<R: Rng + ?Sized>(v: &Vector4D, n0: f64, rng: &mut R) -> NoisyVector4D {
    assert!(n0 >= 0.0, "noise density must be non-negative");
    let sigma = (n0 / 2.0).sqrt();
    let mut coords = v.coords;
    for c in coords.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *c += sigma * z;
    }
    NoisyVector4D { coords }
}

/// Label of the vector closest to `r`. Ties go to the lexicographically
/// smallest vector.
pub fn detect_ml(r: &NoisyVector4D, labeling: &Labeling4D) -> u32 {
    let vs = labeling.vectors();
    let mut best = 0usize;
    let mut best_d = r.dist2(&vs[0]);
    for (i, v) in vs.iter().enumerate().skip(1) {
        let d = r.dist2(v);
        if d < best_d || (d == best_d && v.lex_cmp(&vs[best]).is_lt()) {
            best = i;
            best_d = d;
        }
    }
    best as u32
}

/// How bit LLRs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LlrMode {
    /// Log-sum-exp over all vectors.
    Exact,
    /// Only the closest vector on each side.
    MaxLog,
}

/// Bit LLRs `log P(b_i = 0 | r) / P(b_i = 1 | r)`, indexed by bit position.
/// Positive values favor 0.
pub fn llr(r: &NoisyVector4D, labeling: &Labeling4D, n0: f64, mode: LlrMode) -> Vec<f64> {
    let mut out = vec![0.0; labeling.k() as usize];
    let mut metrics = Vec::with_capacity(labeling.len());
    llr_into(r, labeling, n0, mode, &mut metrics, &mut out);
    out
}

/// Allocation-free form of [`llr`]; `metrics` is scratch space.
pub fn llr_into(
    r: &NoisyVector4D,
    labeling: &Labeling4D,
    n0: f64,
    mode: LlrMode,
    metrics: &mut Vec<f64>,
    out: &mut [f64],
) {
    assert!(n0 > 0.0, "noise density must be positive");
    let k = labeling.k() as usize;
    assert_eq!(out.len(), k);
    metrics.clear();
    metrics.extend(labeling.vectors().iter().map(|v| -r.dist2(v) / n0));

    // Per bit and bit value, the largest metric.
    let mut best = vec![[f64::NEG_INFINITY; 2]; k];
    for (label, &m) in metrics.iter().enumerate() {
        for (i, b) in best.iter_mut().enumerate() {
            let slot = &mut b[label >> i & 1];
            if m > *slot {
                *slot = m;
            }
        }
    }
    match mode {
        LlrMode::MaxLog => {
            for (o, b) in out.iter_mut().zip(&best) {
                *o = b[0] - b[1];
            }
        }
        LlrMode::Exact => {
            let mut sums = vec![[0.0f64; 2]; k];
            for (label, &m) in metrics.iter().enumerate() {
                for (i, (s, b)) in sums.iter_mut().zip(&best).enumerate() {
                    let v = label >> i & 1;
                    s[v] += (m - b[v]).exp();
                }
            }
            for ((o, s), b) in out.iter_mut().zip(&sums).zip(&best) {
                *o = (b[0] + s[0].ln()) - (b[1] + s[1].ln());
            }
        }
    }
}
