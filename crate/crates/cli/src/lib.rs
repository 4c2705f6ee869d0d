//! Command-line front end: reads JSON descriptions, runs one computation and
//! writes the result as JSON (or SVG for `plot`) with its provenance.

mod commands;
mod io;
mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use switchsafe::engine::EngineError;
use switchsafe::geometry::DEFAULT_ETA;

pub use plot::{render_svg, Panel};

#[derive(Debug, Parser)]
#[command(name = "switchsafe", version, about = "Invariant multi-sets of graph-constrained switching systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Inclusion tolerance η used by every set comparison.
    #[arg(long, global = true, env = "SWITCHSAFE_TOLERANCE", default_value_t = DEFAULT_ETA)]
    pub tolerance: f64,
    /// Result file; standard output when absent.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check a system description: C-set disturbances and constraints, strongly connected graph.
    Validate {
        #[serde(skip)]
        system: PathBuf,
    },
    /// Stability certificate (Γ, ρ) from the contraction of the nominal sequence.
    Certificate {
        #[serde(skip)]
        system: PathBuf,
        #[arg(long, default_value_t = 0.15)]
        lambda0: f64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = SeedArg::Auto)]
        seed: SeedArg,
    },
    /// Inner or outer ε-approximation of the minimal invariant multi-set.
    MinInvariant {
        #[serde(skip)]
        system: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Outer)]
        mode: ModeArg,
        /// Fixed contraction factor for the outer method.
        #[arg(long)]
        lambda: Option<f64>,
        /// Fixed iteration index for the outer method; requires --lambda.
        #[arg(long, requires = "lambda")]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.15)]
        lambda0: f64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        /// Compute on the graph reduced to these comma-separated nodes.
        #[arg(long)]
        y: Option<String>,
        /// Walk-length bound for the reduction; picks a smallest unavoidable set when --y is absent.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Maximal invariant multi-set inside the constraints.
    MaxInvariant {
        #[serde(skip)]
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = MaxMethod::Direct)]
        method: MaxMethod,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Dwell kind for the closed form; inferred from the graph when absent.
        #[arg(long, value_enum)]
        kind: Option<DwellArg>,
        /// Product-lift parameter T.
        #[arg(short = 'T', long = "product")]
        product: Option<usize>,
        /// Path-lift parameter P.
        #[arg(short = 'P', long = "path")]
        path: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        /// Supplied certificate; enables the a-priori iteration bound.
        #[arg(long, requires = "rho")]
        gamma: Option<f64>,
        #[arg(long, requires = "gamma")]
        rho: Option<f64>,
    },
    /// Safe set: states that stay admissible forever from every designated start node.
    SafeSet {
        #[serde(skip)]
        system: PathBuf,
        #[serde(skip)]
        multiset: PathBuf,
        /// Restrict to these comma-separated starting nodes.
        #[arg(long)]
        nodes: Option<String>,
    },
    /// Reduced graph on an unavoidable node set.
    Reduce {
        /// Graph or system file.
        #[serde(skip)]
        graph: PathBuf,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Product (-T) or path-dependent (-P) lift of a graph.
    Lift {
        #[serde(skip)]
        graph: PathBuf,
        #[arg(short = 'T', long = "product", conflicts_with = "path", required_unless_present = "path")]
        product: Option<usize>,
        #[arg(short = 'P', long = "path")]
        path: Option<usize>,
    },
    /// Minimum or maximum dwell-time graph.
    DwellGraph {
        #[arg(long, value_enum)]
        kind: DwellArg,
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        tau: usize,
    },
    /// Maximal invariant set of a single nominal linear map through its product lift.
    FastLinearMax {
        #[serde(skip)]
        system: PathBuf,
        #[arg(long, requires = "rho")]
        gamma: Option<f64>,
        #[arg(long, requires = "gamma")]
        rho: Option<f64>,
        #[arg(short = 'T', long = "product")]
        product: Option<usize>,
        #[arg(long, default_value_t = 0.15)]
        lambda0: f64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// SVG drawing of a planar multi-set, one panel per node.
    Plot {
        #[serde(skip)]
        multiset: PathBuf,
        /// System whose constraint sets are drawn beneath the members.
        #[arg(long)]
        #[serde(skip)]
        system: Option<PathBuf>,
    },
    /// Re-check the invariance (and admissibility) of a multi-set.
    Verify {
        #[serde(skip)]
        system: PathBuf,
        #[serde(skip)]
        multiset: PathBuf,
        /// Also require every member to lie in its constraint set.
        #[arg(long)]
        admissible: bool,
    },
}

impl Command {
    pub fn verb(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Certificate { .. } => "certificate",
            Command::MinInvariant { .. } => "min-invariant",
            Command::MaxInvariant { .. } => "max-invariant",
            Command::SafeSet { .. } => "safe-set",
            Command::Reduce { .. } => "reduce",
            Command::Lift { .. } => "lift",
            Command::DwellGraph { .. } => "dwell-graph",
            Command::FastLinearMax { .. } => "fast-linear-max",
            Command::Plot { .. } => "plot",
            Command::Verify { .. } => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedArg {
    /// Disturbance-seeded, falling back to the unit ball for nominal systems.
    Auto,
    Disturbances,
    UnitBall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Inner,
    Outer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxMethod {
    Direct,
    Reduced,
    ClosedForm,
    ProductLift,
    PathLift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DwellArg {
    Min,
    Max,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    /// 2 for problems with the inputs, 1 for failed computations.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Parse { .. } | CliError::Input(_) => 2,
            CliError::Write { .. } | CliError::Compute(_) => 1,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Mismatch(_) | EngineError::KindMismatch(_) | EngineError::PreconditionViolated(_) => {
                CliError::Input(e.to_string())
            }
            other => CliError::Compute(other.to_string()),
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Json(Value),
    Text(String),
}

impl Artifact {
    pub fn render(&self) -> String {
        match self {
            Artifact::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("json serializes");
                s.push('\n');
                s
            }
            Artifact::Text(s) => s.clone(),
        }
    }
}

/// Result of a command that ran to completion. `status` is nonzero when the
/// verdict itself is negative (a failed validation or verification).
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub artifact: Artifact,
    pub summary: String,
    pub status: u8,
}

/// Runs one command without touching the output file.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    if !(cli.tolerance >= 0.0 && cli.tolerance.is_finite()) {
        return Err(CliError::Input(format!("tolerance must be a nonnegative number, got {}", cli.tolerance)));
    }
    commands::dispatch(&cli.command, cli.tolerance)
}

/// Runs the command, writes its artifact and returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let report = match run(cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let text = report.artifact.render();
    match &cli.output {
        Some(path) => {
            if let Err(source) = std::fs::write(path, text) {
                eprintln!("error: {}", CliError::Write { path: path.clone(), source });
                return 1;
            }
            println!("{}", report.summary);
        }
        None => {
            print!("{text}");
            eprintln!("{}", report.summary);
        }
    }
    report.status
}
