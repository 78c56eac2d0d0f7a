//! The `limbsys` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use limbsys_core::limbs::{DecomposeOptions, RootSide};
use limbsys_core::{io, Arithmetic, Method};

pub mod commands;
pub mod config;
pub mod demo;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Domain(#[from] limbsys_core::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Domain(e) => e.code(),
            CliError::Io { .. } => "Io",
            CliError::Failed(_) => "AcceptanceFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string() })
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "limbsys", version, about = "Discrete optimal transport, extremality and numbered limb systems")]
pub struct Cli {
    /// Arithmetic backend; by default exact up to 64 sites per side, float above.
    #[arg(long, global = true, env = "LIMBSYS_ARITHMETIC", value_parser = parse_arithmetic)]
    pub arithmetic: Option<Arithmetic>,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_arithmetic(s: &str) -> Result<Arithmetic, String> {
    s.parse().map_err(|_| format!("expected 'exact' or 'float', got '{s}'"))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the transport problem and write the solution with its potentials.
    Solve(SolveArgs),
    /// Forest test and components of a coupling's support graph.
    AnalyzeSupport(AnalyzeArgs),
    /// Numbered limb system of an acyclic support.
    DecomposeLimbs(DecomposeArgs),
    /// Rebuild the coupling a limb system carries for given marginals.
    Reconstruct(ReconstructArgs),
    /// Extremality verdicts with certificates or witnesses.
    CheckExtremal(ExtremalArgs),
    /// Critical-point census of c(., y1) - c(., y2) on a grid.
    SubtwistCheck(SubtwistArgs),
    /// Circular lake example: solve, decompose and write plots.
    CircleDemo(DemoArgs),
    /// Run the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long)]
    pub cost: PathBuf,
    /// Force exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    /// Absolute zero-set tolerance (float mode only).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Solution or coupling document.
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Solution or coupling document.
    pub input: PathBuf,
    #[arg(long, default_value = "y", value_parser = parse_root_side)]
    pub root_side: RootSide,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_root_side(s: &str) -> Result<RootSide, String> {
    s.parse().map_err(|_| format!("expected 'y' or 'x-shifted', got '{s}'"))
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    /// Solution or coupling document.
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "forest,rank,brute", value_parser = parse_method)]
    pub methods: Vec<Method>,
    /// Largest support the brute-force oracle accepts.
    #[arg(long, default_value_t = limbsys_core::extremality::DEFAULT_BRUTE_MAX_SIZE)]
    pub max_size: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|_| format!("expected forest, rank or brute, got '{s}'"))
}

#[derive(Debug, Args)]
pub struct SubtwistArgs {
    #[arg(long, value_parser = ["circle", "interval"])]
    pub manifold: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = ["circle_cos", "quadratic", "negative_product", "constant"])]
    pub cost: String,
    /// Include the per-pair census.
    #[arg(long)]
    pub pairs: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 4.0)]
    pub kappa: f64,
    /// Pivot orders tried when checking uniqueness.
    #[arg(long, default_value_t = 3)]
    pub reorderings: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Criteria to run (default: all).
    pub criteria: Vec<u8>,
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, A>(args: I) -> u8
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(stdout) => {
            print!("{stdout}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

/// Runs a parsed command and returns what it prints on success.
pub fn dispatch(cli: Cli) -> CliResult<String> {
    let requested = cli.arithmetic;
    match cli.command {
        Command::Solve(a) => {
            let cfg = RunConfig::new(a.exact, requested, a.tol)?;
            commands::solve(&cfg, &a.mu, &a.nu, &a.cost, &a.out)
        }
        Command::AnalyzeSupport(a) => {
            let cfg = RunConfig::new(false, requested, None)?;
            let report = commands::analyze_support(&cfg, &read_json(&a.input)?)?;
            emit(&report, a.out.as_deref())
        }
        Command::DecomposeLimbs(a) => {
            let cfg = RunConfig::new(false, requested, None)?;
            let opts = DecomposeOptions {
                root_side: a.root_side,
                ..Default::default()
            };
            let system = commands::decompose_limbs(&cfg, &read_json(&a.input)?, opts)?;
            emit(&system, Some(&a.out))
        }
        Command::Reconstruct(a) => {
            let cfg = RunConfig::new(false, requested, None)?;
            let out = commands::reconstruct(&cfg, &read_json(&a.system)?, &read_json(&a.mu)?, &read_json(&a.nu)?)?;
            emit(&out, a.out.as_deref())
        }
        Command::CheckExtremal(a) => {
            let cfg = RunConfig::new(false, requested, None)?;
            let out = commands::check_extremal(&cfg, &read_json(&a.input)?, &a.methods, a.max_size)?;
            emit(&out, a.out.as_deref())
        }
        Command::SubtwistCheck(a) => {
            let out = commands::subtwist_check(&a.manifold, a.n, &a.cost, a.pairs)?;
            emit(&out, a.out.as_deref())
        }
        Command::CircleDemo(a) => {
            let cfg = RunConfig::new(false, requested, None)?;
            demo::circle_demo(&cfg, a.n, a.kappa, a.reorderings, &a.out)
        }
        Command::Selftest(a) => commands::selftest(&a.criteria),
    }
}

pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let v = io::parse(&text)?;
    io::check_format(&v)?;
    Ok(v)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Writes to `out` and prints nothing, or returns the document for stdout.
fn emit(v: &Value, out: Option<&Path>) -> CliResult<String> {
    let text = io::to_pretty(v);
    match out {
        Some(p) => {
            write_text(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
