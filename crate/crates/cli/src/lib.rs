//! Batch front end for the `semiframe` library: load systems, families,
//! profiles and rank-n systems from JSON, run one analysis, write a report.

mod commands;
mod input;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use semiframe::FrameError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for numerical-domain failures on valid input, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Frame(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input file; repeat for commands taking two inputs.
    #[arg(long = "input", visible_alias = "family", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Report path (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Truncation sizes overriding those of a family file.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Largest scale index.
    #[arg(long = "n-max", default_value_t = 8)]
    pub n_max: usize,
    /// Decision tolerance of the chosen command.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Seed for random probes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Parser)]
#[command(name = "semiframe", version, about = "Frames and semi-frames on finite truncations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal bounds and snapshot class of one system.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Include the canonical dual system.
        #[arg(long)]
        dual: bool,
    },
    /// Asymptotic verdict and regularity order of a truncation family.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Hilbert-scale norms, isometry defects and the end-space probe.
    Scale {
        #[command(flatten)]
        common: Common,
        /// Probe vector (JSON list of numbers or [re, im] pairs).
        #[arg(long)]
        vector: Option<PathBuf>,
        /// Coefficient rule for the end-space probe, e.g. `k^-4`, `exp(-k)`.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Dual pairs, duals of lower semi-frames, weighted-shift duals.
    Dual {
        #[command(flatten)]
        common: Common,
        /// Real multipliers `m_1,...,m_N` for the weighted-shift dual.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        multipliers: Option<Vec<f64>>,
        #[arg(long, default_value_t = 20)]
        probes: usize,
    },
    /// Fusion bounds, or the fusion system of a partitioned frame.
    Fusion {
        #[command(flatten)]
        common: Common,
        /// 1-based atom blocks, e.g. `1,2;3,4`.
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, default_value_t = 200)]
        probes: usize,
    },
    /// Quadrature frame operator and non-regularity scan of an affine system.
    Continuum {
        #[command(flatten)]
        common: Common,
        /// Scale indices to scan.
        #[arg(long = "m", value_delimiter = ',', default_value = "0,1,2")]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        refinements: usize,
    },
    /// Equivalence checks between two rank-n systems.
    Equivalence {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        relation: RelationArg,
        /// `d x d` matrix `T` as a list of rows.
        #[arg(long)]
        transform: Option<PathBuf>,
        /// Per-point `n x n` unitaries.
        #[arg(long)]
        gauge: Option<PathBuf>,
        /// Per-point `d x d` maps `T(x)`.
        #[arg(long)]
        bundle: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelationArg {
    Similar,
    Gauge,
    Kernel,
    Bundle,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Analyze { common, .. }
            | Command::Classify { common }
            | Command::Scale { common, .. }
            | Command::Dual { common, .. }
            | Command::Fusion { common, .. }
            | Command::Continuum { common, .. }
            | Command::Equivalence { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze { .. } => "analyze",
            Command::Classify { .. } => "classify",
            Command::Scale { .. } => "scale",
            Command::Dual { .. } => "dual",
            Command::Fusion { .. } => "fusion",
            Command::Continuum { .. } => "continuum",
            Command::Equivalence { .. } => "equivalence",
        }
    }
}

/// Output of one command before it is wrapped in the report envelope.
pub struct Outcome {
    pub config: Value,
    pub tolerances: Value,
    pub result: Value,
}

/// Run the command and return the full report.
pub fn run(cli: &Cli) -> Result<Value, CliError> {
    let common = cli.command.common();
    let outcome = commands::dispatch(&cli.command)?;
    let mut config = json!({
        "inputs": common.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "sizes": common.sizes,
        "n_max": common.n_max,
        "tol": common.tol,
        "seed": common.seed,
    });
    if let (Value::Object(base), Value::Object(extra)) = (&mut config, outcome.config) {
        base.extend(extra);
    }
    Ok(json!({
        "tool": "semiframe",
        "version": VERSION,
        "command": cli.command.name(),
        "config": config,
        "tolerances": outcome.tolerances,
        "result": outcome.result,
    }))
}

/// Render a report in the requested format.
pub fn render(report: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report is valid JSON") + "\n",
        Format::Text => {
            let mut out = format!(
                "semiframe {} {}\n",
                report["version"].as_str().unwrap_or(""),
                report["command"].as_str().unwrap_or("")
            );
            if let Some(result) = report["result"].as_object() {
                for (key, value) in result {
                    out.push_str(&format!("{}: {}\n", key, value));
                }
            }
            out
        }
    }
}

/// Run, render and write; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let common = cli.command.common().clone();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e);
            return e.exit_code();
        }
    };
    let text = render(&report, common.format);
    match &common.output {
        Some(path) => {
            if let Err(source) = std::fs::write(path, text) {
                let e = CliError::Io {
                    path: path.display().to_string(),
                    source,
                };
                eprintln!("error: {}", e);
                return e.exit_code();
            }
        }
        None => print!("{}", text),
    }
    0
}
