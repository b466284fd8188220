//! Experiment runner: configuration, Monte-Carlo campaigns and result files.
//!
//! Every campaign is deterministic given its configuration. Monte-Carlo work
//! is split into fixed-size batches, batch `b` of SNR point `p` draws from
//! the ChaCha stream `(p << 32) | b` of the master seed, and batches are run
//! in fixed-size waves so the stopping decision does not depend on thread
//! scheduling.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{
    build_dicyclic, build_square_qam, build_welti_class1, constellation_papr, neighbor_stats_of,
    trim_high_power, uniform, Vector4D,
};
use crate::detection::{add_awgn, detect_ml, llr_into, snr_to_n0, LlrMode, SnrSpec};
use crate::error::{Error, Result};
use crate::graymap::{
    bits_per_2d, per_bit_reliability, progressive_labeling, square_qam_labeling, verify_gray,
    CrossQamMapper, GrayReport, Labeling4D,
};
use crate::ldpc::{build_h, BpDecoder, Encoder, ParityCheckMatrix};
use crate::ofdm::{ccdf, ccdf_quantile, papr_samples, threshold_grid, WaveformConfig};

/// Two-sided 95% normal quantile used for Wilson intervals.
const WILSON_Z: f64 = 1.959_963_984_540_054;
/// Vectors per uncoded Monte-Carlo batch.
const UNCODED_BATCH: usize = 4096;
/// Batches (or frames) evaluated between stopping checks.
const WAVE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VerifyGray,
    Papr,
    BerUncoded,
    BerCoded,
    ExportLabeling,
    Summarize,
}

impl ExperimentKind {
    fn file_stem(self) -> &'static str {
        match self {
            ExperimentKind::VerifyGray => "verify_gray",
            ExperimentKind::Papr => "papr",
            ExperimentKind::BerUncoded => "ber_uncoded",
            ExperimentKind::BerCoded => "ber_coded",
            ExperimentKind::ExportLabeling => "labeling",
            ExperimentKind::Summarize => "summary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstellationKind {
    CrossQam,
    Class1Trim,
    Dicyclic,
    SquareQam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelingKind {
    Gray,
    Progressive,
}

/// Flat experiment configuration. Every field has a default, so a config
/// file only needs the keys it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub constellation: ConstellationKind,
    /// Cross-QAM parameter.
    pub m: u32,
    /// Square-QAM order.
    pub order: u32,
    pub labeling: LabelingKind,
    pub seed: u64,
    pub out: PathBuf,

    // PAPR
    pub m_used: usize,
    pub n_total: usize,
    pub oversample: usize,
    pub symbols: usize,
    pub threshold_lo_db: f64,
    pub threshold_hi_db: f64,
    pub threshold_step_db: f64,

    // BER
    pub ebn0_db: Vec<f64>,
    pub min_errors: u64,
    pub max_bits: u64,
    pub max_frames: u64,
    pub ldpc_seed: u64,
    pub max_iter: usize,
    pub llr_mode: LlrMode,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Summarize,
            constellation: ConstellationKind::CrossQam,
            m: 1,
            order: 16,
            labeling: LabelingKind::Gray,
            seed: 1,
            out: PathBuf::from("results"),
            m_used: 12,
            n_total: 2048,
            oversample: 4,
            symbols: 200_000,
            threshold_lo_db: 0.0,
            threshold_hi_db: 8.0,
            threshold_step_db: 0.05,
            ebn0_db: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            min_errors: 100,
            max_bits: 100_000_000,
            max_frames: 20_000,
            ldpc_seed: crate::ldpc::DEFAULT_SEED,
            max_iter: 50,
            llr_mode: LlrMode::Exact,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |msg: String| Err(Error::Config(msg));
        if self.symbols == 0 || self.max_bits == 0 || self.max_frames == 0 || self.max_iter == 0 {
            return cfg_err("sample budgets must be at least 1".into());
        }
        if self.ebn0_db.iter().any(|x| !x.is_finite()) {
            return cfg_err("Eb/N0 grid must be finite".into());
        }
        if !(self.threshold_step_db > 0.0 && self.threshold_hi_db >= self.threshold_lo_db) {
            return cfg_err("bad CCDF threshold grid".into());
        }
        Ok(())
    }

    /// Resolves the constellation and labeling selectors.
    pub fn build_labeling(&self) -> Result<Labeling4D> {
        select_labeling(self.constellation, self.labeling, self.m, self.order)
    }
}

/// Builds a labeling from the selectors used by the configuration.
pub fn select_labeling(
    constellation: ConstellationKind,
    labeling: LabelingKind,
    m: u32,
    order: u32,
) -> Result<Labeling4D> {
    use ConstellationKind::*;
    use LabelingKind::*;
    match (constellation, labeling) {
        (CrossQam, Gray) => Ok(CrossQamMapper::new(m)?.labeling()),
        (CrossQam, Progressive) => {
            let mapper = CrossQamMapper::new(m)?;
            progressive_labeling(
                &mapper.enumerate(),
                mapper.k(),
                &format!("{}-cross-qam-4d", 3u64 << (2 * m)),
            )
        }
        (Class1Trim, Progressive) => {
            let c = class1_trimmed();
            progressive_labeling(&c.vectors, 7, &c.name)
        }
        (Dicyclic, Progressive) => {
            let c = build_dicyclic(128)?;
            progressive_labeling(&c.vectors, 7, &c.name)
        }
        (SquareQam, Gray) => square_qam_labeling(&build_square_qam(order)?),
        (SquareQam, Progressive) => {
            let l = square_qam_labeling(&build_square_qam(order)?)?;
            progressive_labeling(l.vectors(), l.k(), &format!("{order}-qam-pair"))
        }
        (Class1Trim, Gray) => Err(Error::Config(
            "no Gray labeling exists for the trimmed Class I constellation: some points have \
             24 neighbors at the minimum distance but a 7-bit label has only 7 Hamming-1 \
             neighbors; use labeling = \"progressive\""
                .into(),
        )),
        (Dicyclic, Gray) => Err(Error::Config(
            "only the progressive labeling is provided for the dicyclic constellation".into(),
        )),
    }
}

/// The D4 ball trimmed to 128 points.
pub fn class1_trimmed() -> crate::constellation::Constellation4D {
    trim_high_power(&build_welti_class1(), 128).expect("145 >= 128")
}

/// Wilson score interval half-width for `errors` out of `trials`.
pub fn wilson_half_width(errors: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.5;
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    WILSON_Z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

/// Sampling budget for one BER point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub min_errors: u64,
    pub max_bits: u64,
    pub max_frames: u64,
}

/// One point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub half_width: f64,
    /// Vectors for uncoded runs, codewords for coded runs.
    pub frames: u64,
    /// Per bit position `b_i` of the 4D label (uncoded runs only).
    pub per_bit_ber: Vec<f64>,
}

impl BerPoint {
    fn new(ebn0_db: f64, bits: u64, errors: u64, frames: u64, per_bit_ber: Vec<f64>) -> Self {
        BerPoint {
            ebn0_db,
            bits,
            errors,
            ber: if bits == 0 {
                0.0
            } else {
                errors as f64 / bits as f64
            },
            half_width: wilson_half_width(errors, bits),
            frames,
            per_bit_ber,
        }
    }
}

fn stream_rng(seed: u64, point: usize, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point as u64) << 32 | batch);
    rng
}

/// Uncoded BER of ML detection over AWGN with uniformly random labels.
/// `Eb` counts all `k` label bits.
pub fn simulate_uncoded(
    labeling: &Labeling4D,
    ebn0_db: f64,
    budget: Budget,
    seed: u64,
    point: usize,
) -> Result<BerPoint> {
    let norm = labeling.normalized();
    let k = norm.k() as usize;
    let n0 = snr_to_n0(SnrSpec {
        ebn0_db,
        bits_per_4d: k as f64,
        es2d: 1.0,
    })?;
    let bits_per_batch = (UNCODED_BATCH * k) as u64;
    let max_batches = budget.max_bits.div_ceil(bits_per_batch);
    let mut per_bit = vec![0u64; k];
    let mut batches = 0u64;
    while batches < max_batches && per_bit.iter().sum::<u64>() < budget.min_errors {
        let wave_end = (batches + WAVE as u64).min(max_batches);
        let counts: Vec<Vec<u64>> = (batches..wave_end)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, point, b);
                let mut errs = vec![0u64; k];
                for _ in 0..UNCODED_BATCH {
                    let label = rng.gen_range(0..norm.len() as u32);
                    let r = add_awgn(&norm.vector(label), n0, &mut rng);
                    let diff = detect_ml(&r, &norm) ^ label;
                    for (i, e) in errs.iter_mut().enumerate() {
                        *e += u64::from(diff >> i & 1);
                    }
                }
                errs
            })
            .collect();
        for c in counts {
            for (a, b) in per_bit.iter_mut().zip(c) {
                *a += b;
            }
        }
        batches = wave_end;
    }
    let vectors = batches * UNCODED_BATCH as u64;
    let errors = per_bit.iter().sum();
    let per_bit_ber = per_bit.iter().map(|&e| e as f64 / vectors as f64).collect();
    Ok(BerPoint::new(
        ebn0_db,
        vectors * k as u64,
        errors,
        vectors,
        per_bit_ber,
    ))
}

/// LDPC-coded modulation link: systematic encoding, bit-to-label grouping
/// (`k` consecutive code bits per 4D vector, last vector zero-padded),
/// soft demapping and belief-propagation decoding.
pub struct CodedLink {
    h: ParityCheckMatrix,
    encoder: Encoder,
    labeling: Labeling4D,
    pub max_iter: usize,
    pub llr_mode: LlrMode,
}

impl CodedLink {
    pub fn new(
        h: ParityCheckMatrix,
        labeling: &Labeling4D,
        max_iter: usize,
        llr_mode: LlrMode,
    ) -> Self {
        let encoder = Encoder::new(&h);
        CodedLink {
            h,
            encoder,
            labeling: labeling.normalized(),
            max_iter,
            llr_mode,
        }
    }

    pub fn h(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn rate(&self) -> f64 {
        self.encoder.k() as f64 / self.h.n() as f64
    }

    /// 4D vectors per codeword.
    pub fn vectors_per_frame(&self) -> usize {
        self.h.n().div_ceil(self.labeling.k() as usize)
    }

    /// Information-bit errors in one frame.
    pub fn run_frame<R: Rng>(&self, n0: f64, rng: &mut R, decoder: &BpDecoder<'_>) -> Result<u64> {
        let k = self.labeling.k() as usize;
        let info: Vec<u8> = (0..self.encoder.k())
            .map(|_| rng.gen_range(0..2u8))
            .collect();
        let cw = self.encoder.encode(&info)?;
        let mut llrs = vec![0.0; self.vectors_per_frame() * k];
        let mut metrics = Vec::with_capacity(self.labeling.len());
        for (j, chunk) in llrs.chunks_mut(k).enumerate() {
            let label = (0..k).fold(0u32, |acc, i| {
                acc | u32::from(cw.get(j * k + i).copied().unwrap_or(0)) << i
            });
            let r = add_awgn(&self.labeling.vector(label), n0, rng);
            llr_into(&r, &self.labeling, n0, self.llr_mode, &mut metrics, chunk);
        }
        llrs.truncate(self.h.n());
        let out = decoder.decode(&llrs, self.max_iter);
        let decoded = self.encoder.info_bits(&out.bits);
        Ok(decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64)
    }

    /// Coded BER at `ebn0_db`, where `Eb` is energy per information bit.
    pub fn simulate(
        &self,
        ebn0_db: f64,
        budget: Budget,
        seed: u64,
        point: usize,
    ) -> Result<BerPoint> {
        let n0 = snr_to_n0(SnrSpec {
            ebn0_db,
            bits_per_4d: self.labeling.k() as f64 * self.rate(),
            es2d: 1.0,
        })?;
        let decoder = BpDecoder::new(&self.h);
        let mut errors = 0u64;
        let mut frames = 0u64;
        while frames < budget.max_frames && errors < budget.min_errors {
            let wave_end = (frames + WAVE as u64).min(budget.max_frames);
            let errs: Result<Vec<u64>> = (frames..wave_end)
                .into_par_iter()
                .map(|f| self.run_frame(n0, &mut stream_rng(seed, point, f), &decoder))
                .collect();
            errors += errs?.iter().sum::<u64>();
            frames = wave_end;
        }
        let bits = frames * self.encoder.k() as u64;
        Ok(BerPoint::new(ebn0_db, bits, errors, frames, Vec::new()))
    }
}

/// One row of the constellation comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    /// Number of distinct 4D vectors in use.
    pub size: usize,
    pub bits_per_2d: f64,
    pub papr_db: f64,
    /// Minimum distance after scaling to unit average 2D-symbol energy.
    pub min_distance: f64,
    pub neighbors_avg: f64,
    pub neighbors_max: usize,
    pub neighbors_min: usize,
}

impl fmt::Display for SummaryRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:>6} {:>7.2} {:>9.3} {:>9.4} {:>8.3} {:>5} {:>5}",
            self.name,
            self.size,
            self.bits_per_2d,
            self.papr_db,
            self.min_distance,
            self.neighbors_avg,
            self.neighbors_min,
            self.neighbors_max
        )
    }
}

fn summary_row(name: &str, vectors: &[Vector4D], bits_per_2d: f64) -> Result<SummaryRow> {
    let papr_db = constellation_papr(&uniform(vectors))?;
    let stats = neighbor_stats_of(vectors)?;
    let es2d = crate::constellation::mean_symbol_energy(vectors);
    Ok(SummaryRow {
        name: name.to_string(),
        size: vectors.len(),
        bits_per_2d,
        papr_db,
        min_distance: stats.min_distance / es2d.sqrt(),
        neighbors_avg: stats.avg,
        neighbors_max: stats.max,
        neighbors_min: stats.per_point_counts.iter().copied().min().unwrap_or(0),
    })
}

/// PAPR, normalized minimum distance and neighbor census for every compared
/// constellation. The PAPR uses the distribution induced by uniform label
/// bits; for square QAM the rows describe symbol pairs.
pub fn summarize_constellations() -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for m in 1..=2 {
        let mapper = CrossQamMapper::new(m)?;
        rows.push(summary_row(
            &format!("{}-cross-qam-4d", 3u64 << (2 * m)),
            &mapper.enumerate(),
            bits_per_2d(m),
        )?);
    }
    let c1 = class1_trimmed();
    rows.push(summary_row("class1-trim128", &c1.vectors, 3.5)?);
    let dc = build_dicyclic(128)?;
    rows.push(summary_row("dicyclic-128", &dc.vectors, 3.5)?);
    let q16 = square_qam_labeling(&build_square_qam(16)?)?;
    rows.push(summary_row("16-qam", q16.vectors(), 4.0)?);
    Ok(rows)
}

pub fn summary_header() -> String {
    format!(
        "{:<28} {:>6} {:>7} {:>9} {:>9} {:>8} {:>5} {:>5}",
        "constellation", "size", "bits/2D", "PAPR(dB)", "dmin", "nbr_avg", "min", "max"
    )
}

/// PAPR campaign output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaprResult {
    pub labeling: String,
    pub waveform: WaveformConfig,
    pub symbols: usize,
    pub quantiles_db: Vec<(f64, f64)>,
    pub min_db: f64,
    pub max_db: f64,
    /// For single-carrier configurations, the largest gap between waveform
    /// PAPR and the PAPR of the input symbol block.
    pub single_carrier_gap_db: Option<f64>,
}

/// Everything a run produced, plus the status of its internal checks.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub checks_passed: bool,
    pub message: String,
}

#[derive(Serialize)]
struct Metadata<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    seed: u64,
    checks_passed: bool,
    result: T,
}

fn write_json<T: Serialize>(
    path: &Path,
    cfg: &ExperimentConfig,
    ok: bool,
    result: T,
) -> Result<()> {
    let meta = Metadata {
        config: cfg,
        seed: cfg.seed,
        checks_passed: ok,
        result,
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)?;
    Ok(())
}

fn csv_writer(path: &Path, seed: u64) -> Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# seed = {seed}")?;
    Ok(w)
}

fn write_ber_csv(path: &Path, seed: u64, points: &[BerPoint]) -> Result<()> {
    let mut w = csv_writer(path, seed)?;
    let k = points.first().map_or(0, |p| p.per_bit_ber.len());
    write!(w, "ebn0_db,ber,half_width,errors,bits,frames")?;
    for i in 0..k {
        write!(w, ",ber_b{i}")?;
    }
    writeln!(w)?;
    for p in points {
        write!(
            w,
            "{},{:e},{:e},{},{},{}",
            p.ebn0_db, p.ber, p.half_width, p.errors, p.bits, p.frames
        )?;
        for b in &p.per_bit_ber {
            write!(w, ",{b:e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Runs one experiment and writes its CSV and JSON files under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out)?;
    let stem = cfg.experiment.file_stem();
    let csv = cfg.out.join(format!("{stem}.csv"));
    let json = cfg.out.join(format!("{stem}.json"));
    let mut files = vec![csv.clone(), json.clone()];

    let (ok, message) = match cfg.experiment {
        ExperimentKind::Summarize => {
            let rows = summarize_constellations()?;
            let mut w = csv_writer(&csv, cfg.seed)?;
            writeln!(w, "name,size,bits_per_2d,papr_db,min_distance,neighbors_avg,neighbors_min,neighbors_max")?;
            let mut text = summary_header();
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.name,
                    r.size,
                    r.bits_per_2d,
                    r.papr_db,
                    r.min_distance,
                    r.neighbors_avg,
                    r.neighbors_min,
                    r.neighbors_max
                )?;
                text.push('\n');
                text.push_str(&r.to_string());
            }
            w.flush()?;
            write_json(&json, cfg, true, &rows)?;
            (true, text)
        }
        ExperimentKind::VerifyGray => {
            let labeling = cfg.build_labeling()?;
            let report = verify_gray(&labeling);
            let reliability = per_bit_reliability(&labeling);
            let ok = cfg.labeling != LabelingKind::Gray || report.is_gray();
            let mut w = csv_writer(&csv, cfg.seed)?;
            writeln!(w, "a,b,hamming")?;
            for v in &report.violations {
                writeln!(w, "{},{},{}", v.a, v.b, v.hamming)?;
            }
            w.flush()?;
            #[derive(Serialize)]
            struct Out<'a> {
                report: &'a GrayReport,
                per_bit_reliability: &'a [f64],
            }
            write_json(
                &json,
                cfg,
                ok,
                Out {
                    report: &report,
                    per_bit_reliability: &reliability,
                },
            )?;
            (ok, report.to_string())
        }
        ExperimentKind::ExportLabeling => {
            let labeling = cfg.build_labeling()?;
            let w = csv_writer(&csv, cfg.seed)?;
            labeling.write_csv(w)?;
            #[derive(Serialize)]
            struct Out {
                name: String,
                k: u32,
                vectors: usize,
                es2d: f64,
            }
            write_json(
                &json,
                cfg,
                true,
                Out {
                    name: labeling.name.clone(),
                    k: labeling.k(),
                    vectors: labeling.len(),
                    es2d: labeling.es2d(),
                },
            )?;
            (
                true,
                format!("{} vectors written to {}", labeling.len(), csv.display()),
            )
        }
        ExperimentKind::Papr => {
            let labeling = cfg.build_labeling()?.normalized();
            let wf = WaveformConfig::new(cfg.m_used, cfg.n_total, cfg.oversample)?;
            let samples = papr_samples(&labeling, &wf, cfg.symbols, cfg.seed)?;
            let grid = threshold_grid(
                cfg.threshold_lo_db,
                cfg.threshold_hi_db,
                cfg.threshold_step_db,
            );
            let curve = ccdf(&samples, &grid)?;
            let mut w = csv_writer(&csv, cfg.seed)?;
            curve.write_csv(&mut w)?;
            w.flush()?;
            let single_carrier_gap_db = if wf.m_used == wf.n_total && wf.oversample == 1 {
                Some(single_carrier_gap(
                    &labeling,
                    &wf,
                    cfg.symbols.min(2000),
                    cfg.seed,
                )?)
            } else {
                None
            };
            let ok = single_carrier_gap_db.is_none_or(|g| g < 1e-9);
            let quantiles_db = [1e-1, 1e-2, 1e-3, 1e-4]
                .into_iter()
                .map(|p| Ok((p, ccdf_quantile(&samples, p)?)))
                .collect::<Result<Vec<_>>>()?;
            let result = PaprResult {
                labeling: labeling.name.clone(),
                waveform: wf,
                symbols: cfg.symbols,
                min_db: samples.iter().copied().fold(f64::INFINITY, f64::min),
                max_db: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                quantiles_db,
                single_carrier_gap_db,
            };
            let msg = format!(
                "{}: PAPR at CCDF 1e-3 = {:.3} dB over {} symbols",
                result.labeling, result.quantiles_db[2].1, cfg.symbols
            );
            write_json(&json, cfg, ok, &result)?;
            (ok, msg)
        }
        ExperimentKind::BerUncoded => {
            let labeling = cfg.build_labeling()?;
            let budget = Budget {
                min_errors: cfg.min_errors,
                max_bits: cfg.max_bits,
                max_frames: cfg.max_frames,
            };
            let points = cfg
                .ebn0_db
                .iter()
                .enumerate()
                .map(|(i, &snr)| simulate_uncoded(&labeling, snr, budget, cfg.seed, i))
                .collect::<Result<Vec<_>>>()?;
            write_ber_csv(&csv, cfg.seed, &points)?;
            write_json(&json, cfg, true, &points)?;
            (true, ber_message(&labeling.name, &points))
        }
        ExperimentKind::BerCoded => {
            let labeling = cfg.build_labeling()?;
            let h = build_h(cfg.ldpc_seed)?;
            let alist = cfg.out.join("ldpc_h.alist");
            h.write_alist(BufWriter::new(File::create(&alist)?))?;
            files.push(alist);
            let link = CodedLink::new(h, &labeling, cfg.max_iter, cfg.llr_mode);
            let budget = Budget {
                min_errors: cfg.min_errors,
                max_bits: cfg.max_bits,
                max_frames: cfg.max_frames,
            };
            let points = cfg
                .ebn0_db
                .iter()
                .enumerate()
                .map(|(i, &snr)| link.simulate(snr, budget, cfg.seed, i))
                .collect::<Result<Vec<_>>>()?;
            write_ber_csv(&csv, cfg.seed, &points)?;
            write_json(&json, cfg, true, &points)?;
            (true, ber_message(&labeling.name, &points))
        }
    };
    Ok(RunOutcome {
        files,
        checks_passed: ok,
        message,
    })
}

fn ber_message(name: &str, points: &[BerPoint]) -> String {
    let mut s = format!("{name}\n  Eb/N0(dB)  BER         +/-        errors");
    for p in points {
        s.push_str(&format!(
            "\n  {:>8.2}  {:<10.3e}  {:<9.2e}  {}",
            p.ebn0_db, p.ber, p.half_width, p.errors
        ));
    }
    s
}

/// Largest absolute difference between waveform PAPR and input-block PAPR
/// over `n` symbols.
pub fn single_carrier_gap(
    labeling: &Labeling4D,
    wf: &WaveformConfig,
    n: usize,
    seed: u64,
) -> Result<f64> {
    let modem = crate::ofdm::DftsOfdm::new(*wf)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let syms = crate::ofdm::random_symbols(labeling, wf.m_used, &mut rng);
        let a = crate::ofdm::papr_db(&modem.symbol(&syms)?)?;
        let b = crate::ofdm::papr_db(&syms)?;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}
