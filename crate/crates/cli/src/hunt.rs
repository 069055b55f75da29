use std::path::PathBuf;

use clap::Args;
use negmono::monogamy::{check_dims_cost, sm_report_with};
use negmono::random::{random_pure, stream_rng};
use negmono::{fixtures, Error, Measure, PureState, ReductionCache, RoofConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{parse_indices, pretty, write_output, CliError, CliResult, MeasureArg, OptimizerArgs, Report};

/// Residuals below this are reported as candidate counterexamples.
pub const FLAG_THRESHOLD: f64 = -1e-4;

const SAMPLE_STREAM: u64 = 1 << 33;

#[derive(Args, Debug)]
pub struct HuntArgs {
    /// Local dimensions, e.g. `3,2,2`.
    #[arg(long)]
    dims: String,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = MeasureArg::Scren)]
    measure: MeasureArg,
    /// Emit CSV rows instead of JSON; flagged states go to stderr.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

struct Row {
    index: usize,
    source: String,
    residual: Option<f64>,
    /// Negative pure residual hit inside a nested roof.
    violation: Option<f64>,
    state: PureState,
}

impl Row {
    fn flagged(&self) -> bool {
        self.violation.is_some() || self.residual.is_some_and(|r| r < FLAG_THRESHOLD)
    }

    fn worst(&self) -> f64 {
        self.residual.or(self.violation).unwrap_or(f64::NAN)
    }
}

/// Named fixtures sharing the requested dimensions, scanned before the samples.
fn fixtures_for(dims: &[usize]) -> Vec<(String, PureState)> {
    ["counterexample322", "antisymmetric333", "ghz3", "w3", "ghz4"]
        .into_iter()
        .filter_map(|name| fixtures::by_name(name).map(|psi| (format!("fixture:{name}"), psi)))
        .filter(|(_, psi)| psi.dims() == dims)
        .collect()
}

fn evaluate(index: usize, source: String, state: PureState, measure: Measure, cfg: &RoofConfig) -> CliResult<Row> {
    match sm_report_with(&state, 0, measure, cfg, &ReductionCache::new()) {
        Ok(report) => Ok(Row { index, source, residual: Some(report.residual), violation: None, state }),
        Err(Error::ConjectureViolation { value, state: inner }) => {
            Ok(Row { index, source, residual: None, violation: Some(value), state: *inner })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn run(args: &HuntArgs) -> CliResult<Report> {
    let dims = parse_indices(&args.dims)?;
    if dims.len() < 3 {
        return Err(CliError::Input("hunt needs at least three parties".into()));
    }
    check_dims_cost(&dims)?;
    if dims.iter().any(|&d| d < 2) {
        return Err(CliError::Input(format!("dimensions must be at least 2, got {dims:?}")));
    }
    let cfg = args.optimizer.config();
    let measure: Measure = args.measure.into();
    let mut jobs = fixtures_for(&dims);
    jobs.extend((0..args.samples).map(|k| {
        let psi = random_pure(&dims, &mut stream_rng(cfg.seed, SAMPLE_STREAM + k as u64));
        (format!("sample:{k}"), psi)
    }));
    let rows: Vec<CliResult<Row>> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(index, (source, psi))| evaluate(index, source, psi, measure, &cfg))
        .collect();
    let rows = rows.into_iter().collect::<CliResult<Vec<Row>>>()?;
    let min_residual = rows.iter().filter_map(|r| r.residual).fold(f64::INFINITY, f64::min);
    let flagged: Vec<&Row> = rows.iter().filter(|r| r.flagged()).collect();

    let body = if args.csv {
        let mut out = String::from("index,source,residual,flagged\n");
        for r in &rows {
            out.push_str(&format!("{},{},{},{}\n", r.index, r.source, r.worst(), r.flagged()));
        }
        for r in &flagged {
            eprintln!("{}", serde_json::to_string(&dump(r)).expect("json serializes"));
        }
        out
    } else {
        pretty(&json!({
            "dims": dims,
            "measure": measure,
            "seed": cfg.seed,
            "samples": args.samples,
            "rows": rows.iter().map(|r| json!({
                "index": r.index,
                "source": r.source,
                "residual": r.residual,
                "violation": r.violation,
                "flagged": r.flagged(),
            })).collect::<Vec<_>>(),
            "min_residual": if min_residual.is_finite() { json!(min_residual) } else { Value::Null },
            "flagged": flagged.iter().map(|r| dump(r)).collect::<Vec<_>>(),
            "config": cfg,
        }))
    };
    match &args.out {
        Some(path) => {
            write_output(Some(path), &body)?;
            Ok(Report { body: String::new(), ok: true })
        }
        None => Ok(Report { body: body.trim_end().to_string(), ok: true }),
    }
}

fn dump(r: &Row) -> Value {
    json!({
        "index": r.index,
        "source": r.source,
        "residual": r.residual,
        "violation": r.violation,
        "state": r.state.to_json_value(),
    })
}
