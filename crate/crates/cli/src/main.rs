//! `negmono`: compute entanglement measures on state files, run the
//! reproduction suites, and hunt for strong-monogamy violations.

mod compute;
mod hunt;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use negmono::{Error, RoofConfig};
use serde_json::Value;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_COST_GUARD: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Parser)]
#[command(name = "negmono", version, about = "Negativity-based entanglement measures and monogamy checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one measure of a state read from a JSON file.
    Compute(compute::ComputeArgs),
    /// Run a reproduction suite and report every check.
    Verify(verify::VerifyArgs),
    /// Sample random pure states and record their strong-monogamy residuals.
    Hunt(hunt::HuntArgs),
}

/// Optimizer flags shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct OptimizerArgs {
    /// Maximum number of optimizer starts per roof.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    /// Nelder-Mead iteration budget per start.
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Decomposition size; defaults to the rank of the state.
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl OptimizerArgs {
    pub fn config(&self) -> RoofConfig {
        RoofConfig {
            ensemble_size: self.ensemble_size,
            starts: self.starts,
            max_iters: self.iters,
            tol: self.tol,
            seed: self.seed,
            ..RoofConfig::default()
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureArg {
    Tangle,
    Scren,
}

impl From<MeasureArg> for negmono::Measure {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Tangle => negmono::Measure::Tangle,
            MeasureArg::Scren => negmono::Measure::Scren,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Input(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Outcome of a subcommand: the report and whether every check passed.
pub struct Report {
    pub body: String,
    pub ok: bool,
}

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_output(out: Option<&PathBuf>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            emit(body);
            Ok(())
        }
    }
}

/// Prints to stdout, treating a closed pipe as a normal end of output.
fn emit(body: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{body}").and_then(|_| out.flush());
}

/// Comma-separated list of indices, e.g. `0,2`.
pub fn parse_indices(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Input(format!("bad index {t:?} in {text:?}"))))
        .collect()
}

pub fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize")
}

fn run(cli: Cli) -> CliResult<Report> {
    match cli.command {
        Command::Compute(args) => compute::run(&args),
        Command::Verify(args) => verify::run(&args),
        Command::Hunt(args) => hunt::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            if !report.body.is_empty() {
                emit(&report.body);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(CliError::Core(Error::CostGuard(msg))) => {
            eprintln!("error: cost guard: {msg}");
            ExitCode::from(EXIT_COST_GUARD)
        }
        Err(CliError::Core(Error::ConjectureViolation { value, state })) => {
            let dump = serde_json::json!({
                "error": "conjecture violation",
                "value": value,
                "state": state.to_json_value(),
            });
            eprintln!("{}", pretty(&dump));
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(CliError::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
