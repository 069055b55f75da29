use clap::{Args, ValueEnum};
use negmono::monogamy::{check_dims_cost, ckw_report_with};
use negmono::random::{random_density, stream_rng};
use negmono::wclass::{verify_lemma1, verify_theorem1, verify_theorem2, WClassSpec};
use negmono::{
    fixtures, one_tangle, scren2, wootters_tangle, Bipartition, Measure, ReductionCache, Result, RoofConfig,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::{pretty, CliResult, OptimizerArgs, Report};

/// Streams for sampled states sit far from the optimizer's start streams.
const STATE_STREAM: u64 = 1 << 32;

pub const ORACLE_STATES: usize = 50;

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Suite {
    /// Fixture values and the two-qubit oracle comparison.
    Paper,
    /// Saturation checks on random W-class plus vacuum states.
    Wclass,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Random specs for the wclass suite.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Parties per wclass spec.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Local dimension per wclass spec.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Haar mixings per kept subset in the wclass membership check.
    #[arg(long, default_value_t = 10)]
    mixings: usize,
    #[command(flatten)]
    optimizer: OptimizerArgs,
}

pub fn run(args: &VerifyArgs) -> CliResult<Report> {
    let cfg = args.optimizer.config();
    let (checks, extra) = match args.suite {
        Suite::Paper => (paper_checks(&cfg)?, json!({})),
        Suite::Wclass => {
            check_dims_cost(&vec![args.d; args.n])?;
            (wclass_checks(args, &cfg)?, json!({"n": args.n, "d": args.d, "trials": args.trials}))
        }
    };
    let failed: Vec<&str> = checks.iter().filter(|c| c["pass"] != true).filter_map(|c| c["name"].as_str()).collect();
    let ok = failed.is_empty();
    let out = json!({
        "suite": match args.suite { Suite::Paper => "paper", Suite::Wclass => "wclass" },
        "seed": args.optimizer.seed,
        "parameters": extra,
        "checks": checks,
        "failed": failed,
        "pass": ok,
    });
    Ok(Report { body: pretty(&out), ok })
}

fn within(got: f64, want: f64, tol: f64) -> bool {
    (got - want).abs() <= tol
}

fn paper_checks(cfg: &RoofConfig) -> Result<Vec<Value>> {
    Ok(vec![
        counterexample_tangle(cfg)?,
        counterexample_scren(cfg)?,
        antisymmetric_scren(cfg)?,
        qubit_oracle(cfg)?,
    ])
}

/// Tangle values of the qutrit-qubit-qubit state and the resulting CKW violation.
pub fn counterexample_tangle(cfg: &RoofConfig) -> Result<Value> {
    let psi = fixtures::qutrit_ckw_counterexample();
    let one = one_tangle(&psi, &Bipartition::single(3, 0)?)?;
    let ckw = ckw_report_with(&psi, 0, Measure::Tangle, cfg, &ReductionCache::new())?;
    let pairs: Vec<f64> = ckw.terms.iter().map(|t| t.value).collect();
    let pass = within(one, 4.0 / 3.0, 1e-9)
        && pairs.iter().all(|&t| within(t, 8.0 / 9.0, 1e-3))
        && within(ckw.residual, -4.0 / 9.0, 2e-3);
    Ok(json!({
        "criterion": 1,
        "name": "counterexample-tangle",
        "pass": pass,
        "one_tangle": {"value": one, "expected": 4.0 / 3.0, "tolerance": 1e-9},
        "two_tangles": {"values": pairs, "expected": 8.0 / 9.0, "tolerance": 1e-3},
        "ckw_residual": {"value": ckw.residual, "expected": -4.0 / 9.0, "tolerance": 2e-3},
        "ckw_violated": !ckw.satisfied,
    }))
}

fn scren_fixture(criterion: u32, name: &str, psi: &negmono::PureState, pair: f64, cfg: &RoofConfig) -> Result<Value> {
    let ckw = ckw_report_with(psi, 0, Measure::Scren, cfg, &ReductionCache::new())?;
    let pairs: Vec<f64> = ckw.terms.iter().map(|t| t.value).collect();
    let pass = within(ckw.one, 4.0, 1e-9) && pairs.iter().all(|&t| within(t, pair, 1e-3)) && ckw.satisfied;
    Ok(json!({
        "criterion": criterion,
        "name": name,
        "pass": pass,
        "one_scren": {"value": ckw.one, "expected": 4.0, "tolerance": 1e-9},
        "two_screns": {"values": pairs, "expected": pair, "tolerance": 1e-3},
        "ckw_residual": ckw.residual,
        "satisfied": ckw.satisfied,
    }))
}

pub fn counterexample_scren(cfg: &RoofConfig) -> Result<Value> {
    scren_fixture(2, "counterexample-scren", &fixtures::qutrit_ckw_counterexample(), 8.0 / 9.0, cfg)
}

pub fn antisymmetric_scren(cfg: &RoofConfig) -> Result<Value> {
    scren_fixture(3, "antisymmetric-scren", &fixtures::antisymmetric_qutrits(), 1.0, cfg)
}

/// Optimized SCREN against the Wootters closed form on seeded rank-2 states.
pub fn qubit_oracle(cfg: &RoofConfig) -> Result<Value> {
    let cut = Bipartition::single(2, 0)?;
    let errors: Vec<Result<f64>> = (0..ORACLE_STATES)
        .into_par_iter()
        .map(|k| {
            let rho = random_density(&[2, 2], 2, &mut stream_rng(cfg.seed, STATE_STREAM + k as u64));
            Ok((scren2(&rho, &cut, cfg)?.value - wootters_tangle(&rho)?).abs())
        })
        .collect();
    let errors = errors.into_iter().collect::<Result<Vec<f64>>>()?;
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(json!({
        "criterion": 4,
        "name": "qubit-oracle",
        "pass": max_error <= 1e-4,
        "states": ORACLE_STATES,
        "max_error": max_error,
        "tolerance": 1e-4,
    }))
}

/// Kept subsets containing the first party, sizes `2..n`.
fn lemma_subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..(1 << (n - 1)))
        .map(|mask| std::iter::once(0).chain((1..n).filter(|k| mask & (1 << (k - 1)) != 0)).collect::<Vec<_>>())
        .filter(|keep| keep.len() >= 2 && keep.len() < n)
        .collect()
}

fn wclass_checks(args: &VerifyArgs, cfg: &RoofConfig) -> Result<Vec<Value>> {
    let outcomes: Vec<Result<Value>> = (0..args.trials)
        .into_par_iter()
        .map(|t| {
            let spec = WClassSpec::random(args.n, args.d, &mut stream_rng(cfg.seed, STATE_STREAM + t as u64))?;
            let t1 = verify_theorem1(&spec, cfg)?;
            let t2 = verify_theorem2(&spec, cfg)?;
            let mut lemma_max = 0.0f64;
            for keep in lemma_subsets(args.n) {
                lemma_max = lemma_max.max(verify_lemma1(&spec, &keep, args.mixings, cfg.seed)?.max_violation);
            }
            let lemma_pass = lemma_max <= negmono::wclass::LEMMA_TOL;
            Ok(json!({
                "name": format!("wclass-trial-{t}"),
                "pass": t1.pass && t2.pass && lemma_pass,
                "spec": spec.to_json_value(),
                "pair_sum": {
                    "pass": t1.pass,
                    "one_scren": t1.one_numeric,
                    "sum_numeric": t1.sum_numeric,
                    "numeric_gap": t1.numeric_gap,
                    "max_pair_error": t1.pairs.iter().map(|p| p.error).fold(0.0, f64::max),
                },
                "saturation": {
                    "pass": t2.pass,
                    "residual": t2.residual,
                    "max_higher_term": t2.max_higher_term,
                },
                "membership": {"pass": lemma_pass, "max_violation": lemma_max},
            }))
        })
        .collect();
    outcomes.into_iter().collect()
}
