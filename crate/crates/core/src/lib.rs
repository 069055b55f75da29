//! Negativity-based entanglement measures for multi-qudit states: negativity,
//! its convex-roof extension (CREN) and square (SCREN), the qubit tangle
//! hierarchy, and CKW / strong-monogamy reports.
//!
//! States use row-major party ordering: party 0 is the slowest-varying digit
//! of a basis index. Negativity is unnormalized, `(‖ρ^{T_A}‖₁ − 1)`.

// `!(x <= tol)` rejects NaN as well as large values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexroof;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod monogamy;
pub mod negativity;
pub mod qstate;
pub mod random;
pub mod simplex;
pub mod tangle;
pub mod wclass;

pub use convexroof::{
    cren, hjw_ensemble, roof_minimize, roof_sqrt_functional, scren2, Ensemble, MixingUnitary, RoofConfig,
    RoofDiagnostics, RoofResult, SquaredRoof,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use monogamy::{
    ckw_report, enumerate_subsets, n_scren_pure, sm_report, sm_report_with, CkwReport, IndexVector, Measure,
    ReductionCache, SmReport,
};
pub use negativity::{is_ppt, negativity_mixed, negativity_pure};
pub use qstate::{
    partial_trace, partial_transpose, partial_transpose_matrix, schmidt, schmidt_coefficients, state_from_json, tensor, to_density,
    Bipartition, DensityMatrix, PureState, SchmidtDecomposition, StateInput,
};
pub use tangle::{n_tangle_pure, one_tangle, two_tangle, two_tangle_across, wootters_tangle};
pub use wclass::{build_state, WClassSpec};
