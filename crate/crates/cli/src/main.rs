use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cross4d::detection::LlrMode;
use cross4d::harness::{run, ConstellationKind, ExperimentConfig, ExperimentKind, LabelingKind};

#[derive(Parser)]
#[command(
    name = "cross4d",
    version,
    about = "4D cross-QAM modulation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check that a labeling is Gray at the minimum distance.
    VerifyGray(Common),
    /// DFT-spread-OFDM PAPR CCDF campaign.
    Papr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m_used: Option<usize>,
        #[arg(long)]
        n_total: Option<usize>,
        #[arg(long)]
        oversample: Option<usize>,
        /// Number of DFT-s-OFDM symbols.
        #[arg(long)]
        symbols: Option<usize>,
    },
    /// Uncoded or LDPC-coded BER sweep over AWGN.
    Ber {
        #[command(flatten)]
        common: Common,
        /// Run the rate-1/2 (3,6) LDPC-coded link.
        #[arg(long)]
        coded: bool,
        /// Comma-separated Eb/N0 grid in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        ebn0: Option<Vec<f64>>,
        #[arg(long)]
        min_errors: Option<u64>,
        #[arg(long)]
        max_bits: Option<u64>,
        #[arg(long)]
        max_frames: Option<u64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        ldpc_seed: Option<u64>,
        #[arg(long, value_enum)]
        llr_mode: Option<LlrArg>,
    },
    /// Write a labeling as CSV rows `bits,x1,y1,x2,y2`.
    ExportLabeling(Common),
    /// Constellation comparison table.
    Summarize(Common),
    /// Print the default configuration file.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat TOML key-value pairs).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    constellation: Option<ConstellationArg>,
    /// Cross-QAM parameter m.
    #[arg(long)]
    m: Option<u32>,
    /// Square-QAM order.
    #[arg(long)]
    order: Option<u32>,
    #[arg(long, value_enum)]
    labeling: Option<LabelingArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstellationArg {
    CrossQam,
    Class1Trim,
    Dicyclic,
    SquareQam,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelingArg {
    Gray,
    Progressive,
}

#[derive(Clone, Copy, ValueEnum)]
enum LlrArg {
    Exact,
    Maxlog,
}

impl Common {
    fn resolve(&self, kind: ExperimentKind) -> cross4d::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        cfg.experiment = kind;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(c) = self.constellation {
            cfg.constellation = match c {
                ConstellationArg::CrossQam => ConstellationKind::CrossQam,
                ConstellationArg::Class1Trim => ConstellationKind::Class1Trim,
                ConstellationArg::Dicyclic => ConstellationKind::Dicyclic,
                ConstellationArg::SquareQam => ConstellationKind::SquareQam,
            };
        }
        if let Some(m) = self.m {
            cfg.m = m;
        }
        if let Some(o) = self.order {
            cfg.order = o;
        }
        if let Some(l) = self.labeling {
            cfg.labeling = match l {
                LabelingArg::Gray => LabelingKind::Gray,
                LabelingArg::Progressive => LabelingKind::Progressive,
            };
        }
        Ok(cfg)
    }
}

fn build_config(command: Command) -> cross4d::Result<Option<ExperimentConfig>> {
    let cfg = match command {
        Command::Defaults => return Ok(None),
        Command::VerifyGray(c) => c.resolve(ExperimentKind::VerifyGray)?,
        Command::ExportLabeling(c) => c.resolve(ExperimentKind::ExportLabeling)?,
        Command::Summarize(c) => c.resolve(ExperimentKind::Summarize)?,
        Command::Papr {
            common,
            m_used,
            n_total,
            oversample,
            symbols,
        } => {
            let mut cfg = common.resolve(ExperimentKind::Papr)?;
            cfg.m_used = m_used.unwrap_or(cfg.m_used);
            cfg.n_total = n_total.unwrap_or(cfg.n_total);
            cfg.oversample = oversample.unwrap_or(cfg.oversample);
            cfg.symbols = symbols.unwrap_or(cfg.symbols);
            cfg
        }
        Command::Ber {
            common,
            coded,
            ebn0,
            min_errors,
            max_bits,
            max_frames,
            max_iter,
            ldpc_seed,
            llr_mode,
        } => {
            let mut cfg = common.resolve(ExperimentKind::BerUncoded)?;
            if coded {
                cfg.experiment = ExperimentKind::BerCoded;
            }
            cfg.ebn0_db = ebn0.unwrap_or(cfg.ebn0_db);
            cfg.min_errors = min_errors.unwrap_or(cfg.min_errors);
            cfg.max_bits = max_bits.unwrap_or(cfg.max_bits);
            cfg.max_frames = max_frames.unwrap_or(cfg.max_frames);
            cfg.max_iter = max_iter.unwrap_or(cfg.max_iter);
            cfg.ldpc_seed = ldpc_seed.unwrap_or(cfg.ldpc_seed);
            if let Some(m) = llr_mode {
                cfg.llr_mode = match m {
                    LlrArg::Exact => LlrMode::Exact,
                    LlrArg::Maxlog => LlrMode::MaxLog,
                };
            }
            cfg
        }
    };
    Ok(Some(cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(cli.command) {
        Ok(Some(cfg)) => cfg,
        Ok(None) => {
            print!("{}", ExperimentConfig::default().to_toml());
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.checks_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: internal checks failed");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
