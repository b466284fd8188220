//! DFT-spread OFDM synthesis and PAPR measurement.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};
use crate::graymap::Labeling4D;

/// DFT-s-OFDM parameters. Data occupies `m_used` contiguous subcarriers
/// starting at `mapping_start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct WaveformConfig {
    pub m_used: usize,
    pub n_total: usize,
    pub oversample: usize,
    pub mapping_start: usize,
}

impl WaveformConfig {
    pub fn new(m_used: usize, n_total: usize, oversample: usize) -> Result<Self> {
        let cfg = WaveformConfig {
            m_used,
            n_total,
            oversample,
            mapping_start: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_used == 0 || self.m_used > self.n_total {
            return invalid(format!(
                "need 1 <= m_used <= n_total, got {} and {}",
                self.m_used, self.n_total
            ));
        }
        if self.oversample == 0 {
            return invalid("oversample must be at least 1");
        }
        if self.mapping_start + self.m_used > self.n_total * self.oversample {
            return invalid("used subcarriers run past the end of the spectrum");
        }
        Ok(())
    }

    /// IDFT length, `n_total · oversample`.
    pub fn ifft_len(&self) -> usize {
        self.n_total * self.oversample
    }
}

/// A DFT-s-OFDM modulator with precomputed transform plans.
#[derive(Clone)]
pub struct DftsOfdm {
    cfg: WaveformConfig,
    dft: Arc<dyn Fft<f64>>,
    idft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DftsOfdm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DftsOfdm").field("cfg", &self.cfg).finish()
    }
}

impl DftsOfdm {
    pub fn new(cfg: WaveformConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(DftsOfdm {
            cfg,
            dft: planner.plan_fft_forward(cfg.m_used),
            idft: planner.plan_fft_inverse(cfg.ifft_len()),
        })
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }

    /// One DFT-s-OFDM symbol: `m_used`-point DFT, localized subcarrier
    /// mapping, zero-padded IDFT. Mean output power is the mean input power
    /// times `m_used / n_total`.
    pub fn symbol(&self, syms: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = &self.cfg;
        if syms.len() != c.m_used {
            return invalid(format!("expected {} symbols, got {}", c.m_used, syms.len()));
        }
        let mut freq = syms.to_vec();
        self.dft.process(&mut freq);
        let mut spectrum = vec![Complex64::new(0.0, 0.0); c.ifft_len()];
        let dft_scale = 1.0 / (c.m_used as f64).sqrt();
        for (bin, f) in spectrum[c.mapping_start..].iter_mut().zip(&freq) {
            *bin = f * dft_scale;
        }
        self.idft.process(&mut spectrum);
        let idft_scale = 1.0 / (c.n_total as f64).sqrt();
        for s in spectrum.iter_mut() {
            *s *= idft_scale;
        }
        Ok(spectrum)
    }
}

/// Convenience wrapper that plans the transforms on every call.
pub fn dfts_ofdm_symbol(syms: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    DftsOfdm::new(*cfg)?.symbol(syms)
}

/// `10·log10(max |x|² / mean |x|²)`.
pub fn papr_db(samples: &[Complex64]) -> Result<f64> {
    if samples.is_empty() {
        return invalid("PAPR of an empty block");
    }
    let (peak, sum) = samples.iter().fold((0.0f64, 0.0f64), |(p, s), x| {
        let e = x.norm_sqr();
        (p.max(e), s + e)
    });
    if sum == 0.0 {
        return invalid("PAPR of an all-zero block");
    }
    Ok(10.0 * (peak * samples.len() as f64 / sum).log10())
}

/// Empirical complementary CDF.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CcdfCurve {
    pub thresholds_db: Vec<f64>,
    pub prob: Vec<f64>,
}

impl CcdfCurve {
    /// Writes `threshold_db,probability` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "threshold_db,probability")?;
        for (t, p) in self.thresholds_db.iter().zip(&self.prob) {
            writeln!(w, "{t},{p}")?;
        }
        Ok(())
    }
}

/// Fraction of samples strictly above each threshold. Thresholds are sorted
/// ascending in the output.
pub fn ccdf(papr_samples: &[f64], grid_db: &[f64]) -> Result<CcdfCurve> {
    if papr_samples.is_empty() {
        return invalid("CCDF of an empty sample");
    }
    let mut sorted = papr_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut thresholds = grid_db.to_vec();
    thresholds.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let prob = thresholds
        .iter()
        .map(|t| {
            let at_or_below = sorted.partition_point(|x| x <= t);
            (sorted.len() - at_or_below) as f64 / n
        })
        .collect();
    Ok(CcdfCurve {
        thresholds_db: thresholds,
        prob,
    })
}

/// Smallest sample value `t` with empirical `P(X > t) <= prob`.
pub fn ccdf_quantile(papr_samples: &[f64], prob: f64) -> Result<f64> {
    if papr_samples.is_empty() || !(0.0..=1.0).contains(&prob) {
        return invalid("CCDF quantile needs samples and a probability in [0, 1]");
    }
    let mut sorted = papr_samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // Number of samples allowed above the threshold.
    let above = (prob * n as f64).floor() as usize;
    Ok(sorted[n - 1 - above.min(n - 1)])
}

/// Evenly spaced threshold grid from `lo` to `hi` inclusive.
pub fn threshold_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Draws the 2D symbol stream for one DFT-s-OFDM symbol: `m_used / 2`
/// uniformly labeled 4D vectors, each contributing two consecutive symbols.
pub fn random_symbols<R: Rng + ?Sized>(
    labeling: &Labeling4D,
    m_used: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(m_used);
    for _ in 0..m_used / 2 {
        let v = labeling.vector(rng.gen_range(0..labeling.len() as u32));
        let [x1, y1, x2, y2] = v.coords;
        out.push(Complex64::new(x1, y1));
        out.push(Complex64::new(x2, y2));
    }
    out
}

/// PAPR of `n_symbols` independent DFT-s-OFDM symbols. Symbol `i` uses an
/// RNG seeded from `(seed, i)`, so the result does not depend on thread count.
pub fn papr_samples(
    labeling: &Labeling4D,
    cfg: &WaveformConfig,
    n_symbols: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if !cfg.m_used.is_multiple_of(2) {
        return invalid("m_used must be even: each 4D vector fills two subcarriers");
    }
    let modem = DftsOfdm::new(*cfg)?;
    (0..n_symbols)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let syms = random_symbols(labeling, cfg.m_used, &mut rng);
            papr_db(&modem.symbol(&syms)?)
        })
        .collect()
}
