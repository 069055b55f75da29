//! Negativity of pure and mixed states, and the PPT test.
//!
//! Values are the raw trace-norm quantities `‖ρ^{T_B}‖₁ − 1`; no `(d−1)`
//! normalization is applied.

use crate::error::Result;
use crate::linalg;
use crate::qstate::{
    partial_transpose, schmidt_coefficients, Bipartition, DensityMatrix, PureState, RANK_THRESHOLD,
};

/// Eigenvalues of a partial transpose at or above this count as nonnegative.
pub const PPT_TOL: f64 = 1e-10;

/// `2 Σ_{i<j} √(λ_i λ_j)` from the Schmidt coefficients.
pub fn negativity_pure(psi: &PureState, part: &Bipartition) -> Result<f64> {
    let lambdas = schmidt_coefficients(psi, part)?;
    Ok(negativity_from_schmidt(&lambdas))
}

pub fn negativity_from_schmidt(lambdas: &[f64]) -> f64 {
    let roots: Vec<f64> = lambdas.iter().map(|l| l.max(0.0).sqrt()).collect();
    let mut acc = 0.0;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            acc += roots[i] * roots[j];
        }
    }
    2.0 * acc
}

/// `(tr √ρ_A)² − 1`, the marginal-spectrum route to the pure-state negativity.
/// Uses the smaller marginal (same nonzero spectrum) and drops eigenvalues
/// below the rank threshold, whose square roots would otherwise add noise.
pub fn negativity_pure_via_marginal(psi: &PureState, part: &Bipartition) -> Result<f64> {
    let side_b = part.side_b();
    let dim = |side: &[usize]| side.iter().map(|&k| psi.dims()[k]).product::<usize>();
    let side = if dim(part.side_a()) <= dim(&side_b) { part.side_a() } else { &side_b[..] };
    let rho = psi.reduce(side)?;
    let tr_sqrt: f64 = rho.eigenvalues().iter().filter(|&&l| l > RANK_THRESHOLD).map(|l| l.sqrt()).sum();
    Ok(tr_sqrt * tr_sqrt - 1.0)
}

/// Spectrum of `ρ^{T_B}`, descending.
pub fn partial_transpose_spectrum(rho: &DensityMatrix, part: &Bipartition) -> Result<Vec<f64>> {
    Ok(linalg::eigvalsh(&partial_transpose(rho, part)?))
}

/// `‖ρ^{T_B}‖₁ − 1`, clamped to zero when within `PPT_TOL` below it.
pub fn negativity_mixed(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    let spectrum = partial_transpose_spectrum(rho, part)?;
    let trace_norm: f64 = spectrum.iter().map(|v| v.abs()).sum();
    let n = trace_norm - 1.0;
    Ok(if is_ppt_spectrum(&spectrum) { 0.0 } else { n.max(0.0) })
}

fn is_ppt_spectrum(spectrum: &[f64]) -> bool {
    spectrum.last().is_none_or(|&min| min >= -PPT_TOL)
}

/// True iff the partial transpose has no eigenvalue below `-PPT_TOL`.
pub fn is_ppt(rho: &DensityMatrix, part: &Bipartition) -> Result<bool> {
    Ok(is_ppt_spectrum(&partial_transpose_spectrum(rho, part)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::qstate::to_density;
    use crate::random::{random_pure, stream_rng};

    fn cut2() -> Bipartition {
        Bipartition::single(2, 0).unwrap()
    }

    #[test]
    fn pure_examples() {
        let prod = PureState::basis(vec![2, 3], &[1, 2]).unwrap();
        assert!(negativity_pure(&prod, &cut2()).unwrap().abs() < 1e-12);
        assert!((negativity_pure(&fixtures::bell(), &cut2()).unwrap() - 1.0).abs() < 1e-12);
        let cut = Bipartition::single(3, 0).unwrap();
        let n = negativity_pure(&fixtures::qutrit_ckw_counterexample(), &cut).unwrap();
        assert!((n - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_examples() {
        let a = to_density(&PureState::basis(vec![2, 2], &[0, 0]).unwrap());
        let b = to_density(&PureState::basis(vec![2, 2], &[1, 1]).unwrap());
        let sep = DensityMatrix::mixture(&[(0.3, &a), (0.7, &b)]).unwrap();
        assert_eq!(negativity_mixed(&sep, &cut2()).unwrap(), 0.0);
        assert!((negativity_mixed(&fixtures::werner(1.0), &cut2()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn werner_closed_form() {
        // ρ^{T_B} eigenvalues: (1+p)/4 three times and (1-3p)/4 once.
        for p in [0.0f64, 0.2, 1.0 / 3.0, 0.5, 0.9] {
            let want = (3.0 * p - 1.0).max(0.0) / 2.0;
            let got = negativity_mixed(&fixtures::werner(p), &cut2()).unwrap();
            assert!((got - want).abs() < 1e-12, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn ppt_examples() {
        let prod = to_density(&PureState::basis(vec![2, 2], &[0, 1]).unwrap());
        assert!(is_ppt(&prod, &cut2()).unwrap());
        assert!(!is_ppt(&to_density(&fixtures::bell()), &cut2()).unwrap());
        let mm = DensityMatrix::maximally_mixed(vec![3, 3]).unwrap();
        assert!(is_ppt(&mm, &cut2()).unwrap());
    }

    #[test]
    fn pure_negative_eigenvalues_are_minus_root_products() {
        let mut rng = stream_rng(11, 0);
        let psi = random_pure(&[3, 4], &mut rng);
        let lambdas = schmidt_coefficients(&psi, &cut2()).unwrap();
        let mut want: Vec<f64> = Vec::new();
        for i in 0..lambdas.len() {
            for j in (i + 1)..lambdas.len() {
                want.push(-(lambdas[i] * lambdas[j]).sqrt());
            }
        }
        want.sort_by(|a, b| b.total_cmp(a));
        let spectrum = partial_transpose_spectrum(&to_density(&psi), &cut2()).unwrap();
        let negative: Vec<f64> = spectrum.into_iter().filter(|v| *v < -1e-12).collect();
        assert_eq!(negative.len(), want.len());
        for (a, b) in negative.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_matches_pure_on_pure_input() {
        let mut rng = stream_rng(12, 0);
        for _ in 0..20 {
            let psi = random_pure(&[2, 3, 2], &mut rng);
            let cut = Bipartition::new(3, &[0, 2]).unwrap();
            let a = negativity_pure(&psi, &cut).unwrap();
            let b = negativity_mixed(&to_density(&psi), &cut).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }
}
