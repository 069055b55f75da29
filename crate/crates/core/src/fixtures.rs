//! Named states used throughout the tests, the CLI and the reproduction suite.

use num_complex::Complex64;

use crate::linalg::CVector;
use crate::qstate::{to_density, DensityMatrix, PureState};

fn build(dims: Vec<usize>, terms: &[(&[usize], f64)]) -> PureState {
    let total: usize = dims.iter().product();
    let mut v = CVector::zeros(total);
    for (digits, amp) in terms {
        let idx = digits.iter().zip(&dims).fold(0, |acc, (x, d)| acc * d + x);
        v[idx] += Complex64::new(*amp, 0.0);
    }
    PureState::normalized(dims, v).expect("fixture is nonzero")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell() -> PureState {
    build(vec![2, 2], &[(&[0, 0], 1.0), (&[1, 1], 1.0)])
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> PureState {
    let zeros = vec![0; n];
    let ones = vec![1; n];
    build(vec![2; n], &[(&zeros, 1.0), (&ones, 1.0)])
}

/// Equal-weight qubit W state on `n` parties.
pub fn w_state(n: usize) -> PureState {
    let digits: Vec<Vec<usize>> = (0..n)
        .map(|s| (0..n).map(|k| usize::from(k == s)).collect())
        .collect();
    let terms: Vec<(&[usize], f64)> = digits.iter().map(|d| (d.as_slice(), 1.0)).collect();
    build(vec![2; n], &terms)
}

/// The 3⊗2⊗2 state `(√2|010⟩ + √2|101⟩ + |200⟩ + |211⟩)/√6`, which violates
/// the tangle CKW inequality.
pub fn qutrit_ckw_counterexample() -> PureState {
    let r2 = 2f64.sqrt();
    build(
        vec![3, 2, 2],
        &[(&[0, 1, 0], r2), (&[1, 0, 1], r2), (&[2, 0, 0], 1.0), (&[2, 1, 1], 1.0)],
    )
}

/// The totally antisymmetric three-qutrit state.
pub fn antisymmetric_qutrits() -> PureState {
    build(
        vec![3, 3, 3],
        &[
            (&[0, 1, 2], 1.0),
            (&[0, 2, 1], -1.0),
            (&[1, 2, 0], 1.0),
            (&[1, 0, 2], -1.0),
            (&[2, 0, 1], 1.0),
            (&[2, 1, 0], -1.0),
        ],
    )
}

/// `p|Φ⁺⟩⟨Φ⁺| + (1-p) I/4`.
pub fn werner(p: f64) -> DensityMatrix {
    let bell = to_density(&bell());
    let noise = DensityMatrix::maximally_mixed(vec![2, 2]).expect("valid dims");
    DensityMatrix::mixture(&[(p, &bell), (1.0 - p, &noise)]).expect("valid mixture")
}

/// Built-in states addressable by name from the CLI.
pub fn by_name(name: &str) -> Option<PureState> {
    match name {
        "bell" => Some(bell()),
        "ghz3" => Some(ghz(3)),
        "ghz4" => Some(ghz(4)),
        "w3" => Some(w_state(3)),
        "counterexample322" => Some(qutrit_ckw_counterexample()),
        "antisymmetric333" => Some(antisymmetric_qutrits()),
        _ => None,
    }
}
