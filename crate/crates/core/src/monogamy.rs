//! CKW and strong-monogamy reports built on the recursive residual
//! `R(ψ) = E(ψ_{1|rest}) − Σ_{m=2}^{n−1} Σ_{j} E(ρ_{1 j₁…j_{m−1}})^{m/2}`,
//! where each mixed term is the roof `[min Σ p_h √R(ψ_h)]²`.
//!
//! The index vectors run over unordered subsets of the non-focus parties,
//! each counted once, which makes the `n = 3` case exactly the CKW residual.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::{roof_sqrt_functional, RoofConfig, RoofDiagnostics, SquaredRoof};
use crate::error::{Error, Result};
use crate::negativity::negativity_pure;
use crate::qstate::{Bipartition, DensityMatrix, PureState};
use crate::tangle::one_tangle;

pub const MAX_PARTIES: usize = 5;
pub const MAX_DIMENSION: usize = 4096;

/// Residuals at or above `-SATISFIED_TOL` count as satisfying the inequality.
pub const SATISFIED_TOL: f64 = 1e-6;

/// Which bipartite quantity feeds the hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// One-tangle and its roof extensions.
    Tangle,
    /// Squared negativity and its roof extensions.
    Scren,
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tangle" => Ok(Measure::Tangle),
            "scren" => Ok(Measure::Scren),
            other => Err(Error::InvalidArgument(format!("unknown measure {other:?}"))),
        }
    }
}

/// Ascending set of non-focus party labels (1-based); order `m = len + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct IndexVector(Vec<usize>);

impl IndexVector {
    /// Validates labels against an `n`-party state whose focus is party 1.
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("{entries:?} is not strictly ascending")));
        }
        if let Some(&bad) = entries.iter().find(|&&j| j < 2 || j > n) {
            return Err(Error::IndexOutOfRange { index: bad, parties: n });
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len() + 1
    }
}

/// Lexicographic `k`-combinations of `items`.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        if items.len() - i < k {
            break;
        }
        for mut tail in combinations(&items[i + 1..], k - 1) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// All level-`m` index vectors for `n` parties with party 1 as focus.
pub fn enumerate_subsets(n: usize, m: usize) -> Result<Vec<IndexVector>> {
    if n < 3 || m < 2 || m > n - 1 {
        return Err(Error::InvalidArgument(format!("level m={m} outside 2..={} for n={n}", n.saturating_sub(1))));
    }
    let others: Vec<usize> = (2..=n).collect();
    Ok(combinations(&others, m - 1).into_iter().map(IndexVector).collect())
}

/// 0-based party subsets (focus excluded) at level `m`.
fn subsets_around(n: usize, focus: usize, m: usize) -> Vec<Vec<usize>> {
    let others: Vec<usize> = (0..n).filter(|&k| k != focus).collect();
    combinations(&others, m - 1)
}

/// Rejects states the nested roofs cannot handle at desk scale.
pub fn check_cost(psi: &PureState) -> Result<()> {
    check_dims_cost(psi.dims())
}

pub fn check_dims_cost(dims: &[usize]) -> Result<()> {
    if dims.len() > MAX_PARTIES {
        return Err(Error::CostGuard(format!("{} parties exceeds the limit of {MAX_PARTIES}", dims.len())));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).unwrap_or(usize::MAX);
    if total > MAX_DIMENSION {
        return Err(Error::CostGuard(format!("total dimension {total} exceeds the limit of {MAX_DIMENSION}")));
    }
    Ok(())
}

fn check_focus(psi: &PureState, focus: usize) -> Result<()> {
    if focus >= psi.parties() {
        return Err(Error::IndexOutOfRange { index: focus, parties: psi.parties() });
    }
    if psi.parties() < 2 {
        return Err(Error::InvalidArgument("need at least two parties".into()));
    }
    Ok(())
}

/// Focus-versus-rest entanglement of a pure state under `measure`.
pub fn one_value(psi: &PureState, focus: usize, measure: Measure) -> Result<f64> {
    check_focus(psi, focus)?;
    let cut = Bipartition::single(psi.parties(), focus)?;
    match measure {
        Measure::Scren => Ok(negativity_pure(psi, &cut)?.powi(2)),
        Measure::Tangle => one_tangle(psi, &cut),
    }
}

/// Recursive residual (n-SCREN or n-tangle) without the cost guard.
pub fn residual_pure(psi: &PureState, focus: usize, measure: Measure, config: &RoofConfig) -> Result<f64> {
    check_focus(psi, focus)?;
    let n = psi.parties();
    let one = one_value(psi, focus, measure)?;
    let mut rhs = 0.0;
    for m in 2..n {
        for subset in subsets_around(n, focus, m) {
            let (rho, pos) = reduction(psi, focus, &subset)?;
            let value = mixed_level(&rho, pos, measure, config)?.value;
            rhs += value.powf(m as f64 / 2.0);
        }
    }
    Ok(one - rhs)
}

/// The reduced state on `focus ∪ subset` and the focus position inside it.
fn reduction(psi: &PureState, focus: usize, subset: &[usize]) -> Result<(DensityMatrix, usize)> {
    let mut keep = subset.to_vec();
    keep.push(focus);
    keep.sort_unstable();
    let pos = keep.iter().position(|&k| k == focus).expect("focus kept");
    Ok((psi.reduce(&keep)?, pos))
}

/// Mixed `m`-level quantity of a reduced state: the roof of the square root
/// of the pure residual, squared.
pub fn mixed_level(rho: &DensityMatrix, focus: usize, measure: Measure, config: &RoofConfig) -> Result<SquaredRoof> {
    let pure_fn = |phi: &PureState| residual_pure(phi, focus, measure, config);
    roof_sqrt_functional(rho, &pure_fn, config)
}

type CacheKey = (Measure, Vec<usize>);

/// Memo of mixed-level values keyed by measure and kept party set.
#[derive(Default)]
pub struct ReductionCache {
    entries: Mutex<HashMap<CacheKey, (f64, RoofDiagnostics)>>,
}

impl ReductionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(
        &self,
        psi: &PureState,
        focus: usize,
        subset: &[usize],
        measure: Measure,
        config: &RoofConfig,
    ) -> Result<(f64, RoofDiagnostics)> {
        let mut key_set = subset.to_vec();
        key_set.push(focus);
        key_set.sort_unstable();
        let key = (measure, key_set);
        if let Some(hit) = self.entries.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let (rho, pos) = reduction(psi, focus, subset)?;
        let level = mixed_level(&rho, pos, measure, config)?;
        let entry = (level.value, level.roof.diagnostics());
        // identical keys produce identical values, so last write wins
        self.entries.lock().expect("cache lock").insert(key, entry.clone());
        Ok(entry)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SmTerm {
    /// 1-based labels of the non-focus parties.
    pub subset: Vec<usize>,
    pub m: usize,
    pub value: f64,
    pub contribution: f64,
}

impl SmTerm {
    pub fn exponent(&self) -> f64 {
        self.m as f64 / 2.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelSubtotal {
    pub m: usize,
    pub subtotal: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermDiagnostics {
    pub subset: Vec<usize>,
    pub roof: RoofDiagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmDiagnostics {
    pub measure: Measure,
    pub focus: usize,
    pub converged: bool,
    pub levels: Vec<LevelSubtotal>,
    pub terms: Vec<TermDiagnostics>,
}

/// Strong-monogamy report: left side, every right-side term, and the residual.
#[derive(Clone, Debug, Serialize)]
pub struct SmReport {
    pub one: f64,
    pub terms: Vec<SmTerm>,
    pub rhs: f64,
    pub residual: f64,
    pub satisfied: bool,
    pub diagnostics: SmDiagnostics,
}

impl SmReport {
    pub fn level(&self, m: usize) -> impl Iterator<Item = &SmTerm> {
        self.terms.iter().filter(move |t| t.m == m)
    }
}

/// Strong-monogamy report for SCREN.
pub fn sm_report(psi: &PureState, focus: usize, config: &RoofConfig) -> Result<SmReport> {
    sm_report_with(psi, focus, Measure::Scren, config, &ReductionCache::new())
}

pub fn sm_report_with(
    psi: &PureState,
    focus: usize,
    measure: Measure,
    config: &RoofConfig,
    cache: &ReductionCache,
) -> Result<SmReport> {
    check_cost(psi)?;
    check_focus(psi, focus)?;
    let n = psi.parties();
    let one = one_value(psi, focus, measure)?;
    let jobs: Vec<(usize, Vec<usize>)> = (2..n)
        .flat_map(|m| subsets_around(n, focus, m).into_iter().map(move |s| (m, s)))
        .collect();
    let evaluated: Vec<Result<(f64, RoofDiagnostics)>> = jobs
        .par_iter()
        .map(|(_, subset)| cache.get_or_compute(psi, focus, subset, measure, config))
        .collect();

    let label = |k: usize| k + 1;
    let mut terms = Vec::with_capacity(jobs.len());
    let mut term_diag = Vec::with_capacity(jobs.len());
    let mut levels: Vec<LevelSubtotal> = (2..n).map(|m| LevelSubtotal { m, subtotal: 0.0 }).collect();
    let mut rhs = 0.0;
    for ((m, subset), outcome) in jobs.into_iter().zip(evaluated) {
        let (value, diag) = outcome?;
        let contribution = value.powf(m as f64 / 2.0);
        rhs += contribution;
        levels[m - 2].subtotal += contribution;
        let labels: Vec<usize> = subset.iter().map(|&k| label(k)).collect();
        term_diag.push(TermDiagnostics { subset: labels.clone(), roof: diag });
        terms.push(SmTerm { subset: labels, m, value, contribution });
    }
    let residual = one - rhs;
    Ok(SmReport {
        one,
        terms,
        rhs,
        residual,
        satisfied: residual >= -SATISFIED_TOL,
        diagnostics: SmDiagnostics {
            measure,
            focus,
            converged: term_diag.iter().all(|t| t.roof.converged),
            levels,
            terms: term_diag,
        },
    })
}

/// n-SCREN of a pure state: the strong-monogamy residual.
pub fn n_scren_pure(psi: &PureState, focus: usize, config: &RoofConfig) -> Result<f64> {
    Ok(sm_report(psi, focus, config)?.residual)
}

#[derive(Clone, Debug, Serialize)]
pub struct CkwTerm {
    /// 1-based label of the partner party.
    pub party: usize,
    pub value: f64,
    pub diagnostics: RoofDiagnostics,
}

/// `E(ψ_{focus|rest}) ≥ Σ_j E(ρ_{focus j})` evaluated term by term.
#[derive(Clone, Debug, Serialize)]
pub struct CkwReport {
    pub measure: Measure,
    pub one: f64,
    pub terms: Vec<CkwTerm>,
    pub rhs: f64,
    pub residual: f64,
    pub satisfied: bool,
}

pub fn ckw_report(psi: &PureState, focus: usize, measure: Measure, config: &RoofConfig) -> Result<CkwReport> {
    ckw_report_with(psi, focus, measure, config, &ReductionCache::new())
}

pub fn ckw_report_with(
    psi: &PureState,
    focus: usize,
    measure: Measure,
    config: &RoofConfig,
    cache: &ReductionCache,
) -> Result<CkwReport> {
    check_focus(psi, focus)?;
    let n = psi.parties();
    let one = one_value(psi, focus, measure)?;
    let partners: Vec<usize> = (0..n).filter(|&k| k != focus).collect();
    let evaluated: Vec<Result<(f64, RoofDiagnostics)>> = partners
        .par_iter()
        .map(|&j| cache.get_or_compute(psi, focus, &[j], measure, config))
        .collect();
    let mut terms = Vec::with_capacity(partners.len());
    for (j, outcome) in partners.into_iter().zip(evaluated) {
        let (value, diagnostics) = outcome?;
        terms.push(CkwTerm { party: j + 1, value, diagnostics });
    }
    let rhs: f64 = terms.iter().map(|t| t.value).sum();
    let residual = one - rhs;
    Ok(CkwReport { measure, one, terms, rhs, residual, satisfied: residual >= -SATISFIED_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn subsets_small_cases() {
        let got: Vec<Vec<usize>> = enumerate_subsets(3, 2).unwrap().iter().map(|v| v.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![2], vec![3]]);
        let got: Vec<Vec<usize>> = enumerate_subsets(4, 3).unwrap().iter().map(|v| v.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![2, 3], vec![2, 4], vec![3, 4]]);
    }

    #[test]
    fn subset_count_for_five_parties() {
        let total: usize = (2..=4).map(|m| enumerate_subsets(5, m).unwrap().len()).sum();
        assert_eq!(total, 14);
    }

    #[test]
    fn subsets_out_of_range() {
        assert!(enumerate_subsets(3, 3).is_err());
        assert!(enumerate_subsets(4, 1).is_err());
        assert!(enumerate_subsets(2, 2).is_err());
    }

    #[test]
    fn index_vector_validation() {
        assert!(IndexVector::new(vec![2, 4], 4).is_ok());
        assert!(IndexVector::new(vec![4, 2], 4).is_err());
        assert!(IndexVector::new(vec![1, 2], 4).is_err());
        assert!(IndexVector::new(vec![2, 5], 4).is_err());
        assert_eq!(IndexVector::new(vec![2, 3], 4).unwrap().order(), 3);
    }

    #[test]
    fn ghz3_n_scren_is_one() {
        let v = n_scren_pure(&fixtures::ghz(3), 0, &RoofConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn two_party_n_scren_is_one_scren() {
        let psi = fixtures::bell();
        assert!((n_scren_pure(&psi, 0, &RoofConfig::default()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn counterexample_ckw_reports() {
        let cfg = RoofConfig::default();
        let psi = fixtures::qutrit_ckw_counterexample();
        let t = ckw_report(&psi, 0, Measure::Tangle, &cfg).unwrap();
        assert!((t.one - 4.0 / 3.0).abs() < 1e-9);
        assert!((t.rhs - 16.0 / 9.0).abs() < 2e-3);
        assert!((t.residual + 4.0 / 9.0).abs() < 2e-3);
        assert!(!t.satisfied);
        let s = ckw_report(&psi, 0, Measure::Scren, &cfg).unwrap();
        assert!((s.one - 4.0).abs() < 1e-9);
        assert!((s.rhs - 16.0 / 9.0).abs() < 2e-3);
        assert!(s.satisfied);
    }

    #[test]
    fn three_party_sm_report_matches_ckw() {
        let cfg = RoofConfig::default();
        let psi = fixtures::qutrit_ckw_counterexample();
        let cache = ReductionCache::new();
        let sm = sm_report_with(&psi, 0, Measure::Scren, &cfg, &cache).unwrap();
        let ckw = ckw_report_with(&psi, 0, Measure::Scren, &cfg, &cache).unwrap();
        assert_eq!(sm.terms.len(), 2);
        assert_eq!(cache.len(), 2);
        assert!((sm.residual - ckw.residual).abs() < 1e-12);
        assert!((sm.one - sm.rhs - sm.residual).abs() < 1e-12);
    }

    #[test]
    fn cost_guard_rejects_six_parties() {
        let psi = fixtures::ghz(6);
        assert!(matches!(sm_report(&psi, 0, &RoofConfig::default()), Err(Error::CostGuard(_))));
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let r = sm_report(&fixtures::w_state(3), 0, &RoofConfig::default()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["one", "terms", "rhs", "residual", "satisfied", "diagnostics"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let term = &v["terms"][0];
        for key in ["subset", "m", "value", "contribution"] {
            assert!(term.get(key).is_some(), "missing {key}");
        }
        assert_eq!(term["subset"], serde_json::json!([2]));
    }
}
