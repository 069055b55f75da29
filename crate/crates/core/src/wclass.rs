//! Generalized W-class states mixed coherently with the vacuum,
//! `√p Σ_{s,i} a_{si} |0…i_s…0⟩ + √(1−p) |0…0⟩`, with closed-form SCREN
//! oracles and numeric checks of the saturation results.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::convexroof::{hjw_ensemble, random_mixing, scren2, RoofConfig, RoofDiagnostics};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::monogamy::{self, SmReport};
use crate::negativity::negativity_pure;
use crate::qstate::{to_density, Bipartition, DensityMatrix, PureState};
use crate::random::{complex_gaussian, stream_rng};

pub const SPEC_NORM_TOL: f64 = 1e-9;
pub const LEMMA_TOL: f64 = 1e-10;
pub const THEOREM_TOL: f64 = 1e-3;

/// Parameters of a W-class plus vacuum state. Row `s` of `a` holds the
/// amplitudes of digits `1..d` at party `s` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct WClassSpec {
    n: usize,
    d: usize,
    a: Vec<Vec<Complex64>>,
    p: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    n: usize,
    d: usize,
    p: f64,
    a: Vec<Vec<[f64; 2]>>,
}

impl WClassSpec {
    pub fn new(n: usize, d: usize, a: Vec<Vec<Complex64>>, p: f64) -> Result<Self> {
        if n < 2 || d < 2 {
            return Err(Error::InvalidDims(format!("need n ≥ 2 and d ≥ 2, got n={n}, d={d}")));
        }
        if a.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: a.len() });
        }
        if let Some(row) = a.iter().find(|row| row.len() != d - 1) {
            return Err(Error::LengthMismatch { expected: d - 1, got: row.len() });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
        }
        let norm: f64 = a.iter().flatten().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > SPEC_NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { n, d, a, p })
    }

    /// Complex Gaussian coefficients, normalized, with `p` uniform on `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        if n < 2 || d < 2 {
            return Err(Error::InvalidDims(format!("need n ≥ 2 and d ≥ 2, got n={n}, d={d}")));
        }
        let mut a: Vec<Vec<Complex64>> = (0..n).map(|_| (1..d).map(|_| complex_gaussian(rng)).collect()).collect();
        let norm = a.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        a.iter_mut().flatten().for_each(|c| *c /= norm);
        let p = rng.random_range(0.0..=1.0);
        Self::new(n, d, a, p)
    }

    /// Equal amplitudes on every party and digit.
    pub fn uniform(n: usize, d: usize, p: f64) -> Result<Self> {
        let c = Complex64::new(1.0 / ((n * (d - 1)) as f64).sqrt(), 0.0);
        Self::new(n, d, vec![vec![c; d.saturating_sub(1)]; n], p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.a
    }

    /// `Σ_i |a_{si}|²` for 0-based party `s`.
    pub fn omega_s(&self, s: usize) -> f64 {
        self.a[s].iter().map(|c| c.norm_sqr()).sum()
    }

    /// Weight outside the first party.
    pub fn omega(&self) -> f64 {
        (1..self.n).map(|s| self.omega_s(s)).sum()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.d; self.n]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpecFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let a = file
            .a
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        Self::new(file.n, file.d, a, file.p)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = SpecFile {
            n: self.n,
            d: self.d,
            p: self.p,
            a: self.a.iter().map(|row| row.iter().map(|c| [c.re, c.im]).collect()).collect(),
        };
        serde_json::to_value(file).expect("plain data serializes")
    }
}

/// Row-major index of digit `digit` at party `slot` among `parties` qudits.
fn single_excitation(parties: usize, d: usize, slot: usize, digit: usize) -> usize {
    digit * d.pow((parties - 1 - slot) as u32)
}

pub fn build_state(spec: &WClassSpec) -> PureState {
    let (n, d) = (spec.n, spec.d);
    let mut v = CVector::zeros(d.pow(n as u32));
    v[0] = Complex64::new((1.0 - spec.p).sqrt(), 0.0);
    let sp = spec.p.sqrt();
    for (s, row) in spec.a.iter().enumerate() {
        for (k, c) in row.iter().enumerate() {
            v[single_excitation(n, d, s, k + 1)] += c * sp;
        }
    }
    PureState::normalized(spec.dims(), v).expect("spec invariants give a unit vector")
}

/// `4p²(1−Ω)Ω`.
pub fn one_scren_closed(spec: &WClassSpec) -> f64 {
    let omega = spec.omega();
    4.0 * spec.p * spec.p * (1.0 - omega) * omega
}

/// `4p²(1−Ω) Σ_i |a_{si}|²` for the 1-based party label `s ∈ 2..=n`.
pub fn two_scren_closed(spec: &WClassSpec, s: usize) -> Result<f64> {
    if s < 2 || s > spec.n {
        return Err(Error::IndexOutOfRange { index: s, parties: spec.n });
    }
    Ok(4.0 * spec.p * spec.p * (1.0 - spec.omega()) * spec.omega_s(s - 1))
}

/// Unnormalized `(x̃, ỹ)` with `ρ_keep = |x̃⟩⟨x̃| + |ỹ⟩⟨ỹ|`; `keep` holds
/// 0-based parties and must contain party 0.
pub fn reduced_xy(spec: &WClassSpec, keep: &[usize]) -> Result<(CVector, CVector)> {
    let keep = check_keep(spec, keep)?;
    let (m, d) = (keep.len(), spec.d);
    let sp = spec.p.sqrt();
    let mut x = CVector::zeros(d.pow(m as u32));
    x[0] = Complex64::new((1.0 - spec.p).sqrt(), 0.0);
    for (slot, &s) in keep.iter().enumerate() {
        for (k, c) in spec.a[s].iter().enumerate() {
            x[single_excitation(m, d, slot, k + 1)] += c * sp;
        }
    }
    let traced: f64 = (0..spec.n).filter(|s| !keep.contains(s)).map(|s| spec.omega_s(s)).sum();
    let mut y = CVector::zeros(d.pow(m as u32));
    y[0] = Complex64::new((spec.p * traced).sqrt(), 0.0);
    Ok((x, y))
}

fn check_keep(spec: &WClassSpec, keep: &[usize]) -> Result<Vec<usize>> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&k| k >= spec.n) {
        return Err(Error::IndexOutOfRange { index: bad, parties: spec.n });
    }
    if keep.first() != Some(&0) {
        return Err(Error::InvalidArgument("kept parties must include the first party".into()));
    }
    Ok(keep)
}

/// Largest amplitude on basis states with two or more nonzero digits.
pub fn weight_two_amplitude(psi: &PureState) -> f64 {
    let dims = psi.dims();
    psi.amplitudes()
        .iter()
        .enumerate()
        .filter(|(idx, _)| {
            let mut rest = *idx;
            let mut excited = 0;
            for &d in dims.iter().rev() {
                excited += usize::from(rest % d != 0);
                rest /= d;
            }
            excited >= 2
        })
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Report {
    pub keep: Vec<usize>,
    pub rank: usize,
    pub ensemble_size: usize,
    pub trials: usize,
    pub max_violation: f64,
    pub pass: bool,
}

/// Mixes the eigen-decomposition of `ρ_keep` with `trials` Haar unitaries of
/// size `rank + 1` and records the largest amplitude any member carries
/// outside Hamming weight one.
pub fn verify_lemma1(spec: &WClassSpec, keep: &[usize], trials: usize, seed: u64) -> Result<Lemma1Report> {
    let keep = check_keep(spec, keep)?;
    let rho = build_state(spec).reduce(&keep)?;
    let rank = rho.rank();
    let size = rank + 1;
    let violations: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(seed, t as u64);
            let ensemble = hjw_ensemble(&rho, &random_mixing(size, rank, &mut rng)?)?;
            Ok(ensemble.members.iter().map(|(_, psi)| weight_two_amplitude(psi)).fold(0.0, f64::max))
        })
        .collect();
    let mut max_violation = 0.0f64;
    for v in violations {
        max_violation = max_violation.max(v?);
    }
    Ok(Lemma1Report {
        keep: keep.iter().map(|k| k + 1).collect(),
        rank,
        ensemble_size: size,
        trials,
        max_violation,
        pass: max_violation <= LEMMA_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    /// 1-based party label.
    pub s: usize,
    pub numeric: f64,
    pub closed: f64,
    pub error: f64,
    pub diagnostics: RoofDiagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub one_numeric: f64,
    pub one_closed: f64,
    pub pairs: Vec<PairCheck>,
    pub sum_numeric: f64,
    pub sum_closed: f64,
    /// `|one − Σ_s numeric two-SCREN|`.
    pub numeric_gap: f64,
    /// `|one − Σ_s closed two-SCREN|`.
    pub closed_gap: f64,
    pub converged: bool,
    pub pass: bool,
}

/// Numeric one-SCREN against the sum of optimized two-SCRENs, with every
/// term checked against its closed form.
pub fn verify_theorem1(spec: &WClassSpec, config: &RoofConfig) -> Result<Theorem1Report> {
    let psi = build_state(spec);
    monogamy::check_cost(&psi)?;
    let rho = to_density(&psi);
    let one_numeric = negativity_pure(&psi, &Bipartition::single(spec.n, 0)?)?.powi(2);
    let cut = Bipartition::single(2, 0)?;
    let pairs: Vec<Result<PairCheck>> = (1..spec.n)
        .into_par_iter()
        .map(|s| {
            let reduced = crate::qstate::partial_trace(&rho, &[0, s])?;
            let roof = scren2(&reduced, &cut, config)?;
            let closed = two_scren_closed(spec, s + 1)?;
            Ok(PairCheck {
                s: s + 1,
                numeric: roof.value,
                closed,
                error: (roof.value - closed).abs(),
                diagnostics: roof.roof.diagnostics(),
            })
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    let sum_numeric: f64 = pairs.iter().map(|p| p.numeric).sum();
    let sum_closed: f64 = pairs.iter().map(|p| p.closed).sum();
    let numeric_gap = (one_numeric - sum_numeric).abs();
    let closed_gap = (one_numeric - sum_closed).abs();
    let pass = numeric_gap <= THEOREM_TOL
        && closed_gap <= THEOREM_TOL
        && pairs.iter().all(|p| p.error <= THEOREM_TOL);
    Ok(Theorem1Report {
        one_numeric,
        one_closed: one_scren_closed(spec),
        converged: pairs.iter().all(|p| p.diagnostics.converged),
        pairs,
        sum_numeric,
        sum_closed,
        numeric_gap,
        closed_gap,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem2Report {
    pub residual: f64,
    /// Largest level-`m ≥ 3` term value.
    pub max_higher_term: f64,
    pub pass: bool,
    pub report: SmReport,
}

/// Strong-monogamy residual of the state, expected to vanish along with
/// every term beyond the pairwise level.
pub fn verify_theorem2(spec: &WClassSpec, config: &RoofConfig) -> Result<Theorem2Report> {
    let report = monogamy::sm_report(&build_state(spec), 0, config)?;
    let max_higher_term = report.terms.iter().filter(|t| t.m >= 3).map(|t| t.value).fold(0.0, f64::max);
    Ok(Theorem2Report {
        residual: report.residual,
        max_higher_term,
        pass: report.residual.abs() <= THEOREM_TOL && max_higher_term <= THEOREM_TOL,
        report,
    })
}

/// `|x̃⟩⟨x̃| + |ỹ⟩⟨ỹ|` as a density matrix on the kept parties.
pub fn density_from_xy(spec: &WClassSpec, keep: &[usize]) -> Result<DensityMatrix> {
    let (x, y) = reduced_xy(spec, keep)?;
    let m: CMatrix = &x * x.adjoint() + &y * y.adjoint();
    DensityMatrix::new(vec![spec.d; keep.len()], m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::max_abs_diff;

    fn w3() -> WClassSpec {
        WClassSpec::uniform(3, 2, 1.0).unwrap()
    }

    #[test]
    fn uniform_qubit_spec_is_w_state() {
        assert!((build_state(&w3()).fidelity(&fixtures::w_state(3)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_p_is_vacuum() {
        let spec = WClassSpec::uniform(3, 3, 0.0).unwrap();
        let vac = PureState::basis(vec![3, 3, 3], &[0, 0, 0]).unwrap();
        assert!((build_state(&spec).fidelity(&vac) - 1.0).abs() < 1e-12);
        assert_eq!(one_scren_closed(&spec), 0.0);
    }

    #[test]
    fn random_state_has_weight_one_support() {
        let spec = WClassSpec::random(4, 3, &mut stream_rng(1, 0)).unwrap();
        assert_eq!(weight_two_amplitude(&build_state(&spec)), 0.0);
    }

    #[test]
    fn closed_forms_for_qubit_w() {
        assert!((one_scren_closed(&w3()) - 8.0 / 9.0).abs() < 1e-12);
        for s in 2..=3 {
            assert!((two_scren_closed(&w3(), s).unwrap() - 4.0 / 9.0).abs() < 1e-12);
        }
        assert!(two_scren_closed(&w3(), 1).is_err());
        assert!(two_scren_closed(&w3(), 4).is_err());
    }

    #[test]
    fn closed_form_matches_schmidt_negativity() {
        let mut rng = stream_rng(2, 0);
        for _ in 0..50 {
            let spec = WClassSpec::random(3, 3, &mut rng).unwrap();
            let n = negativity_pure(&build_state(&spec), &Bipartition::single(3, 0).unwrap()).unwrap();
            assert!((n * n - one_scren_closed(&spec)).abs() < 1e-9);
        }
    }

    #[test]
    fn silent_party_has_zero_pair_term() {
        let c = Complex64::new(0.5f64.sqrt(), 0.0);
        let z = Complex64::new(0.0, 0.0);
        let spec = WClassSpec::new(3, 2, vec![vec![c], vec![c], vec![z]], 0.6).unwrap();
        assert_eq!(two_scren_closed(&spec, 3).unwrap(), 0.0);
    }

    #[test]
    fn xy_reconstructs_reduction() {
        let mut rng = stream_rng(3, 0);
        for _ in 0..10 {
            let spec = WClassSpec::random(4, 3, &mut rng).unwrap();
            let psi = build_state(&spec);
            for keep in [vec![0, 1], vec![0, 2, 3], vec![0, 1, 2, 3]] {
                let direct = psi.reduce(&keep).unwrap();
                let xy = density_from_xy(&spec, &keep).unwrap();
                assert!(max_abs_diff(direct.matrix(), xy.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn xy_examples() {
        let (x, y) = reduced_xy(&w3(), &[0, 1]).unwrap();
        assert!((y.norm_squared() - 1.0 / 3.0).abs() < 1e-12);
        assert!((x.norm_squared() - 2.0 / 3.0).abs() < 1e-12);
        let (_, y) = reduced_xy(&w3(), &[0, 1, 2]).unwrap();
        assert_eq!(y.norm(), 0.0);
        assert!(reduced_xy(&w3(), &[1, 2]).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let spec = WClassSpec::random(4, 3, &mut stream_rng(4, 0)).unwrap();
        let r = verify_lemma1(&spec, &[0, 2], 50, 9).unwrap();
        assert!(r.pass, "{}", r.max_violation);
        assert_eq!(r.rank, 2);
        let all = verify_lemma1(&spec, &[0, 1, 2, 3], 5, 9).unwrap();
        assert_eq!(all.rank, 1);
        assert!(all.pass);
    }

    #[test]
    fn theorem1_qubit_w() {
        let r = verify_theorem1(&w3(), &RoofConfig::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.one_numeric - 8.0 / 9.0).abs() < 1e-9);
    }

    #[test]
    fn theorem2_vacuum() {
        let spec = WClassSpec::uniform(3, 3, 0.0).unwrap();
        let r = verify_theorem2(&spec, &RoofConfig::default()).unwrap();
        assert!(r.pass);
        assert!(r.report.one.abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let spec = WClassSpec::random(3, 3, &mut stream_rng(5, 0)).unwrap();
        let text = spec.to_json_value().to_string();
        assert_eq!(WClassSpec::from_json(&text).unwrap(), spec);
        assert!(WClassSpec::from_json(r#"{"n":2,"d":2,"p":0.5,"a":[[[1,0]],[[1,0]]]}"#).is_err());
    }
}
