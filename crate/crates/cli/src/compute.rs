use std::path::PathBuf;

use clap::{Args, ValueEnum};
use negmono::monogamy::{check_dims_cost, sm_report_with};
use negmono::{
    cren, negativity_mixed, negativity_pure, one_tangle, partial_trace, state_from_json, two_tangle_across, Bipartition, DensityMatrix, Measure, PureState, ReductionCache, StateInput,
};
use serde_json::{json, Value};

use crate::{parse_indices, pretty, read_file, CliError, CliResult, OptimizerArgs, Report};

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Quantity {
    Negativity,
    Cren,
    Scren,
    Tangle,
    Ntangle,
    Nscren,
}

#[derive(Args, Debug)]
pub struct ComputeArgs {
    #[arg(value_enum)]
    quantity: Quantity,
    /// State file (pure or mixed JSON).
    #[arg(long)]
    state: PathBuf,
    /// Parties on side A of the cut, as indices into the input state.
    #[arg(long)]
    cut: Option<String>,
    /// Focus party for the n-party residuals.
    #[arg(long, default_value_t = 0)]
    focus: usize,
    /// Parties to trace out before computing.
    #[arg(long)]
    trace_out: Option<String>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

enum Loaded {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl Loaded {
    fn parties(&self) -> usize {
        match self {
            Loaded::Pure(p) => p.parties(),
            Loaded::Mixed(m) => m.parties(),
        }
    }
}

/// Applies `--trace-out` and returns the remaining state with the original
/// indices of its parties.
fn load(args: &ComputeArgs) -> CliResult<(Loaded, Vec<usize>)> {
    let input = state_from_json(&read_file(&args.state)?)?;
    check_dims_cost(input.dims())?;
    let n = input.dims().len();
    let traced = match &args.trace_out {
        Some(text) => parse_indices(text)?,
        None => Vec::new(),
    };
    if let Some(&bad) = traced.iter().find(|&&k| k >= n) {
        return Err(CliError::Input(format!("--trace-out index {bad} out of range for {n} parties")));
    }
    let kept: Vec<usize> = (0..n).filter(|k| !traced.contains(k)).collect();
    if kept.is_empty() {
        return Err(CliError::Input("--trace-out removes every party".into()));
    }
    let loaded = match input {
        StateInput::Pure(psi) if traced.is_empty() => Loaded::Pure(psi),
        StateInput::Pure(psi) => Loaded::Mixed(psi.reduce(&kept)?),
        StateInput::Mixed(rho) if traced.is_empty() => Loaded::Mixed(rho),
        StateInput::Mixed(rho) => Loaded::Mixed(partial_trace(&rho, &kept)?),
    };
    Ok((loaded, kept))
}

/// Translates original party indices into positions among `kept`.
fn positions(original: &[usize], kept: &[usize], flag: &str) -> CliResult<Vec<usize>> {
    original
        .iter()
        .map(|k| {
            kept.iter()
                .position(|j| j == k)
                .ok_or_else(|| CliError::Input(format!("{flag} party {k} is not present after tracing")))
        })
        .collect()
}

fn cut_for(args: &ComputeArgs, kept: &[usize], parties: usize) -> CliResult<Bipartition> {
    let side_a = match &args.cut {
        Some(text) => positions(&parse_indices(text)?, kept, "--cut")?,
        None => vec![0],
    };
    Ok(Bipartition::new(parties, &side_a)?)
}

fn require_pure(loaded: Loaded, what: &str) -> CliResult<PureState> {
    match loaded {
        Loaded::Pure(p) => Ok(p),
        Loaded::Mixed(_) => Err(CliError::Input(format!("{what} needs a pure state without --trace-out"))),
    }
}

fn residual(psi: PureState, focus: usize, measure: Measure, args: &ComputeArgs) -> CliResult<(f64, Value)> {
    if measure == Measure::Tangle && psi.dims().iter().any(|&d| d != 2) {
        return Err(CliError::Input(format!("ntangle needs qubits, got dims {:?}", psi.dims())));
    }
    let report = sm_report_with(&psi, focus, measure, &args.optimizer.config(), &ReductionCache::new())?;
    Ok((report.residual, serde_json::to_value(&report).expect("report serializes")))
}

pub fn run(args: &ComputeArgs) -> CliResult<Report> {
    let (loaded, kept) = load(args)?;
    let cfg = args.optimizer.config();
    let parties = loaded.parties();
    let (value, diagnostics) = match args.quantity {
        Quantity::Ntangle | Quantity::Nscren => {
            let focus = positions(&[args.focus], &kept, "--focus")?[0];
            let psi = require_pure(loaded, "n-party residuals")?;
            let measure = if matches!(args.quantity, Quantity::Ntangle) { Measure::Tangle } else { Measure::Scren };
            residual(psi, focus, measure, args)?
        }
        quantity => {
            let cut = cut_for(args, &kept, parties)?;
            match (quantity, loaded) {
                (Quantity::Negativity, Loaded::Pure(psi)) => (negativity_pure(&psi, &cut)?, json!({"route": "schmidt"})),
                (Quantity::Negativity, Loaded::Mixed(rho)) => {
                    let n = negativity_mixed(&rho, &cut)?;
                    (n, json!({"route": "partial-transpose", "ppt": n == 0.0}))
                }
                (Quantity::Cren, Loaded::Pure(psi)) => (negativity_pure(&psi, &cut)?, json!({"route": "pure"})),
                (Quantity::Scren, Loaded::Pure(psi)) => {
                    (negativity_pure(&psi, &cut)?.powi(2), json!({"route": "pure"}))
                }
                (Quantity::Cren, Loaded::Mixed(rho)) => {
                    let roof = cren(&rho, &cut, &cfg)?;
                    (roof.value, serde_json::to_value(roof.diagnostics()).expect("serializes"))
                }
                (Quantity::Scren, Loaded::Mixed(rho)) => {
                    let roof = cren(&rho, &cut, &cfg)?;
                    (roof.value * roof.value, serde_json::to_value(roof.diagnostics()).expect("serializes"))
                }
                (Quantity::Tangle, Loaded::Pure(psi)) => (one_tangle(&psi, &cut)?, json!({"route": "pure"})),
                (Quantity::Tangle, Loaded::Mixed(rho)) => {
                    let t = two_tangle_across(&rho, &cut, &cfg)?;
                    (t.value, serde_json::to_value(t.roof.diagnostics()).expect("serializes"))
                }
                (Quantity::Ntangle | Quantity::Nscren, _) => unreachable!("handled above"),
            }
        }
    };
    let out = json!({
        "command": format!("compute {}", name(args.quantity)),
        "value": value,
        "diagnostics": diagnostics,
        "config": {
            "state": args.state.display().to_string(),
            "cut": args.cut,
            "focus": args.focus,
            "trace_out": args.trace_out,
            "roof": cfg,
        },
    });
    Ok(Report { body: pretty(&out), ok: true })
}

fn name(q: Quantity) -> &'static str {
    match q {
        Quantity::Negativity => "negativity",
        Quantity::Cren => "cren",
        Quantity::Scren => "scren",
        Quantity::Tangle => "tangle",
        Quantity::Ntangle => "ntangle",
        Quantity::Nscren => "nscren",
    }
}
