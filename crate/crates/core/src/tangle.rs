//! Tangle hierarchy, plus the closed-form two-qubit concurrence used as an
//! independent oracle for the roof optimizer.

use num_complex::Complex64;

use crate::convexroof::{roof_sqrt_functional, RoofConfig, SquaredRoof};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::monogamy::{self, Measure};
use crate::qstate::{Bipartition, DensityMatrix, PureState};

/// One-tangle across `part`: `4 det ρ_A` for a qubit marginal, and the
/// linear entropy `2(1 − tr ρ_A²)` otherwise. The two agree on qubits.
pub fn one_tangle(psi: &PureState, part: &Bipartition) -> Result<f64> {
    if part.parties() != psi.parties() {
        return Err(Error::InvalidBipartition(format!(
            "cut over {} parties applied to a {}-party state",
            part.parties(),
            psi.parties()
        )));
    }
    let rho_a = psi.reduce(part.side_a())?;
    let m = rho_a.matrix();
    let value = if rho_a.dimension() == 2 {
        4.0 * (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re
    } else {
        2.0 * (1.0 - rho_a.purity())
    };
    Ok(value.max(0.0))
}

/// Two-tangle of a bipartite state across party 0 versus party 1.
pub fn two_tangle(rho: &DensityMatrix, config: &RoofConfig) -> Result<SquaredRoof> {
    if rho.parties() != 2 {
        return Err(Error::InvalidDims(format!(
            "two-tangle needs a two-party state, got {} parties",
            rho.parties()
        )));
    }
    two_tangle_across(rho, &Bipartition::single(2, 0)?, config)
}

/// `[min Σ p_h √τ(ψ_h)]²` across an arbitrary cut.
pub fn two_tangle_across(rho: &DensityMatrix, part: &Bipartition, config: &RoofConfig) -> Result<SquaredRoof> {
    roof_sqrt_functional(rho, &|psi: &PureState| one_tangle(psi, part), config)
}

/// Squared Wootters concurrence of a two-qubit state.
pub fn wootters_tangle(rho: &DensityMatrix) -> Result<f64> {
    Ok(wootters_concurrence(rho)?.powi(2))
}

/// `max(0, μ₁ − μ₂ − μ₃ − μ₄)` with `μ_i` the descending square roots of the
/// eigenvalues of `√ρ ρ̃ √ρ`, `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)`.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims() != [2, 2] {
        return Err(Error::InvalidDims(format!("concurrence needs 2⊗2, got {:?}", rho.dims())));
    }
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    let sy = CMatrix::from_row_slice(2, 2, &[z, -i, i, z]);
    let flip = linalg::kron(&sy, &sy);
    let tilde = &flip * rho.matrix().conjugate() * &flip;
    let sqrt_rho = linalg::hermitian_fn(rho.matrix(), |v| v.max(0.0).sqrt());
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let mu: Vec<f64> = linalg::eigvalsh(&r).into_iter().map(|v| v.max(0.0).sqrt()).collect();
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// Residual `n`-tangle of an all-qubit pure state with `focus` as the first
/// party of the hierarchy. Conjectured nonnegative; may come out negative.
pub fn n_tangle_pure(psi: &PureState, focus: usize, config: &RoofConfig) -> Result<f64> {
    if psi.dims().iter().any(|&d| d != 2) {
        return Err(Error::InvalidDims(format!("n-tangle needs qubits, got {:?}", psi.dims())));
    }
    monogamy::check_cost(psi)?;
    monogamy::residual_pure(psi, focus, Measure::Tangle, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::negativity::negativity_pure;
    use crate::qstate::{partial_trace, tensor, to_density};
    use crate::random::{haar_unitary, random_density, random_pure, stream_rng};

    #[test]
    fn one_tangle_examples() {
        let cut = Bipartition::single(2, 0).unwrap();
        let prod = PureState::basis(vec![2, 2], &[1, 0]).unwrap();
        assert!(one_tangle(&prod, &cut).unwrap().abs() < 1e-12);
        assert!((one_tangle(&fixtures::bell(), &cut).unwrap() - 1.0).abs() < 1e-12);
        let t = one_tangle(&fixtures::qutrit_ckw_counterexample(), &Bipartition::single(3, 0).unwrap()).unwrap();
        assert!((t - 12.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn wootters_examples() {
        assert!((wootters_tangle(&to_density(&fixtures::bell())).unwrap() - 1.0).abs() < 1e-12);
        let mm = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(wootters_tangle(&mm).unwrap().abs() < 1e-12);
        // Werner concurrence max(0, (3p-1)/2)
        assert!((wootters_tangle(&fixtures::werner(0.9)).unwrap() - 0.7225).abs() < 1e-12);
        assert!(wootters_tangle(&DensityMatrix::maximally_mixed(vec![2, 3]).unwrap()).is_err());
    }

    #[test]
    fn two_tangle_of_separable_state() {
        let a = to_density(&PureState::basis(vec![2, 2], &[0, 1]).unwrap());
        let b = to_density(&PureState::basis(vec![2, 2], &[1, 0]).unwrap());
        let rho = DensityMatrix::mixture(&[(0.4, &a), (0.6, &b)]).unwrap();
        assert!(two_tangle(&rho, &RoofConfig::default()).unwrap().value < 1e-6);
    }

    #[test]
    fn two_tangle_matches_wootters_on_random_rank_two() {
        let mut rng = stream_rng(21, 0);
        for _ in 0..5 {
            let rho = random_density(&[2, 2], 2, &mut rng);
            let roof = two_tangle(&rho, &RoofConfig::default()).unwrap().value;
            let oracle = wootters_tangle(&rho).unwrap();
            assert!((roof - oracle).abs() < 1e-4, "{roof} vs {oracle}");
        }
    }

    #[test]
    fn counterexample_two_tangle() {
        let rho = partial_trace(&to_density(&fixtures::qutrit_ckw_counterexample()), &[0, 2]).unwrap();
        let t = two_tangle(&rho, &RoofConfig::default()).unwrap().value;
        assert!((t - 8.0 / 9.0).abs() < 1e-3);
    }

    #[test]
    fn schmidt_rank_two_tangle_equals_squared_negativity() {
        let mut rng = stream_rng(22, 0);
        let cut = Bipartition::single(2, 0).unwrap();
        for _ in 0..50 {
            let psi = random_pure(&[2, 3], &mut rng);
            let n = negativity_pure(&psi, &cut).unwrap();
            assert!((one_tangle(&psi, &cut).unwrap() - n * n).abs() < 1e-9);
        }
    }

    #[test]
    fn one_tangle_is_local_unitary_invariant() {
        let mut rng = stream_rng(23, 0);
        let cut = Bipartition::single(2, 0).unwrap();
        for _ in 0..20 {
            let psi = random_pure(&[3, 2], &mut rng);
            let u = linalg::kron(&haar_unitary(3, &mut rng), &haar_unitary(2, &mut rng));
            let moved = PureState::normalized(vec![3, 2], u * psi.amplitudes()).unwrap();
            assert!((one_tangle(&psi, &cut).unwrap() - one_tangle(&moved, &cut).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn n_tangle_examples() {
        let cfg = RoofConfig::default();
        assert!((n_tangle_pure(&fixtures::ghz(3), 0, &cfg).unwrap() - 1.0).abs() < 1e-3);
        assert!(n_tangle_pure(&fixtures::w_state(3), 0, &cfg).unwrap().abs() < 1e-3);
        let bell = fixtures::bell();
        let want = two_tangle(&to_density(&bell), &cfg).unwrap().value;
        assert!((n_tangle_pure(&bell, 0, &cfg).unwrap() - want).abs() < 1e-12);
        let qutrit = tensor(&[PureState::basis(vec![3], &[0]).unwrap(), bell]).unwrap();
        assert!(n_tangle_pure(&qutrit, 0, &cfg).is_err());
    }
}
