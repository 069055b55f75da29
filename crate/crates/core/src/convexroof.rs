//! Convex-roof minimization over pure-state decompositions.
//!
//! Every decomposition of a rank-`r` density matrix into `L ≥ r` pure states
//! arises from an `L×L` unitary mixing its weighted eigenvectors, with the
//! eigenvector list padded by zero vectors. The engine searches over those
//! unitaries, written as `exp(iH)·U₀` with `H` Hermitian (`L²` real
//! parameters) and `U₀` a Haar-random starting point, using Nelder–Mead from
//! several starts. Reported values are upper bounds on the true roof.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::negativity::negativity_pure;
use crate::qstate::{Bipartition, DensityMatrix, PureState, RANK_THRESHOLD};
use crate::random::{haar_unitary, stream_rng};
use crate::simplex::{self, SimplexSettings};

/// Members lighter than this are dropped from an ensemble.
pub const MIN_WEIGHT: f64 = 1e-14;

/// Pure-functional values in `[-ROUNDOFF_SLACK, 0)` are treated as zero.
pub const ROUNDOFF_SLACK: f64 = 1e-7;

/// Starts stop early once this many agree on the best value within `tol`.
pub const AGREEMENT: usize = 3;

/// Fixed start batches, independent of the thread count so early stopping
/// stays deterministic: the eigen-decomposition start alone, then groups of 4.
fn start_batches(starts: usize) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::with_capacity(1 + starts / 4);
    out.push(0..starts.min(1));
    let mut lo = 1;
    while lo < starts {
        let hi = (lo + 4).min(starts);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Optimizer knobs shared by every roof computation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RoofConfig {
    /// Ensemble size `L`; `None` means the rank of the state.
    pub ensemble_size: Option<usize>,
    /// Maximum number of starts, the first of which is the eigen-decomposition.
    pub starts: usize,
    /// Nelder–Mead iteration budget per start.
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Initial simplex edge in Hermitian-generator coordinates.
    pub step: f64,
}

impl Default for RoofConfig {
    fn default() -> Self {
        Self { ensemble_size: None, starts: 16, max_iters: 2000, tol: 1e-6, seed: 0, step: 0.5 }
    }
}

/// Weighted pure-state decomposition `ρ = Σ p_h |ψ_h⟩⟨ψ_h|`.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub members: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.members.iter().map(|(p, _)| p).sum()
    }

    /// `Σ p_h |ψ_h⟩⟨ψ_h|`.
    pub fn density(&self) -> CMatrix {
        let n = self.members.first().map_or(0, |(_, s)| s.dimension());
        let mut m = CMatrix::zeros(n, n);
        for (p, s) in &self.members {
            let v = s.amplitudes();
            m += (v * v.adjoint()).scale(*p);
        }
        m
    }

    /// `Σ p_h f(ψ_h)`.
    pub fn average(&self, mut f: impl FnMut(&PureState) -> Result<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for (p, s) in &self.members {
            acc += p * f(s)?;
        }
        Ok(acc)
    }
}

/// Unitary mixing matrix acting on a rank-`source_rank` eigen-decomposition.
#[derive(Clone, Debug)]
pub struct MixingUnitary {
    matrix: CMatrix,
    source_rank: usize,
}

impl MixingUnitary {
    pub fn new(matrix: CMatrix, source_rank: usize) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidArgument("mixing matrix must be square".into()));
        }
        let defect = linalg::unitarity_defect(&matrix);
        if !(defect <= 1e-9) {
            return Err(Error::InvalidArgument(format!("mixing matrix not unitary (defect {defect:e})")));
        }
        if matrix.nrows() < source_rank {
            return Err(Error::EnsembleTooSmall { rank: source_rank, size: matrix.nrows() });
        }
        Ok(Self { matrix, source_rank })
    }

    pub fn identity(size: usize, source_rank: usize) -> Result<Self> {
        Self::new(CMatrix::identity(size, size), source_rank)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn source_rank(&self) -> usize {
        self.source_rank
    }
}

/// Weighted eigenvectors `√λ_i |e_i⟩` above the rank threshold, as columns.
#[derive(Clone, Debug)]
pub struct Spectral {
    dims: Vec<usize>,
    weighted: CMatrix,
}

impl Spectral {
    pub fn of(rho: &DensityMatrix) -> Self {
        let (values, vectors) = linalg::eigh(rho.matrix());
        let rank = values.iter().filter(|&&v| v > RANK_THRESHOLD).count();
        let n = rho.dimension();
        let weighted = CMatrix::from_fn(n, rank, |r, c| vectors[(r, c)] * values[c].sqrt());
        Self { dims: rho.dims().to_vec(), weighted }
    }

    pub fn rank(&self) -> usize {
        self.weighted.ncols()
    }

    /// Members `ψ̃_h = Σ_{i<r} u_{hi} √λ_i |e_i⟩`, normalized, zero-weight ones dropped.
    fn mix(&self, u: &CMatrix) -> Ensemble {
        let r = self.rank();
        let mixed = &self.weighted * u.columns(0, r).transpose();
        let mut members = Vec::with_capacity(u.nrows());
        for col in mixed.column_iter() {
            let weight = col.norm_squared();
            if weight < MIN_WEIGHT {
                continue;
            }
            let v: CVector = col.unscale(weight.sqrt());
            let state = PureState::normalized(self.dims.clone(), v).expect("nonzero member");
            members.push((weight, state));
        }
        Ensemble { members }
    }
}

/// The decomposition of `rho` obtained by mixing its eigen-decomposition with `u`.
pub fn hjw_ensemble(rho: &DensityMatrix, u: &MixingUnitary) -> Result<Ensemble> {
    let spectral = Spectral::of(rho);
    if u.size() < spectral.rank() {
        return Err(Error::EnsembleTooSmall { rank: spectral.rank(), size: u.size() });
    }
    Ok(spectral.mix(u.matrix()))
}

/// Per-start optimizer record.
#[derive(Clone, Debug, Serialize)]
pub struct StartRecord {
    pub start: usize,
    pub best: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    #[serde(skip)]
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RoofResult {
    pub value: f64,
    pub ensemble: Ensemble,
    pub starts: usize,
    pub converged: bool,
    pub history: Vec<StartRecord>,
}

/// Optimizer summary without the ensemble, for reports.
#[derive(Clone, Debug, Serialize)]
pub struct RoofDiagnostics {
    pub starts: usize,
    pub converged: bool,
    pub ensemble_size: usize,
    pub evaluations: usize,
}

impl RoofResult {
    pub fn diagnostics(&self) -> RoofDiagnostics {
        RoofDiagnostics {
            starts: self.starts,
            converged: self.converged,
            ensemble_size: self.ensemble.len(),
            evaluations: self.history.iter().map(|h| h.evaluations).sum(),
        }
    }

    fn exact(value: f64, ensemble: Ensemble) -> Self {
        Self { value, ensemble, starts: 0, converged: true, history: Vec::new() }
    }
}

/// Square of a roof of `√f`, together with the underlying search.
#[derive(Clone, Debug)]
pub struct SquaredRoof {
    pub value: f64,
    pub roof: RoofResult,
}

/// Minimizes `Σ_h p_h objective(ψ_h)` over decompositions of `rho`.
pub fn roof_minimize<F>(rho: &DensityMatrix, objective: &F, config: &RoofConfig) -> Result<RoofResult>
where
    F: Fn(&PureState) -> Result<f64> + Sync,
{
    minimize_with_floor(rho, objective, config, None)
}

fn minimize_with_floor<F>(
    rho: &DensityMatrix,
    objective: &F,
    config: &RoofConfig,
    floor: Option<f64>,
) -> Result<RoofResult>
where
    F: Fn(&PureState) -> Result<f64> + Sync,
{
    let spectral = Spectral::of(rho);
    let rank = spectral.rank();
    if rank == 0 {
        return Err(Error::InvalidArgument("density matrix has no support".into()));
    }
    if rank == 1 {
        let ensemble = spectral.mix(&CMatrix::identity(1, 1));
        let value = ensemble.average(objective)?;
        return Ok(RoofResult::exact(value, ensemble));
    }
    let size = config.ensemble_size.unwrap_or(rank);
    if size < rank {
        return Err(Error::EnsembleTooSmall { rank, size });
    }
    if size > rank * (rank + 1) {
        return Err(Error::InvalidArgument(format!(
            "ensemble size {size} exceeds rank·(rank+1) = {}",
            rank * (rank + 1)
        )));
    }
    if config.starts == 0 {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }

    let settings = SimplexSettings {
        step: config.step,
        tol: config.tol,
        max_iters: config.max_iters,
        floor,
        max_restarts: 4,
    };

    let run_start = |start: usize| -> Result<(f64, CMatrix, StartRecord)> {
        let base = if start == 0 {
            CMatrix::identity(size, size)
        } else {
            haar_unitary(size, &mut stream_rng(config.seed, start as u64))
        };
        let unitary_at = |params: &[f64]| linalg::expi_hermitian(&linalg::hermitian_from_params(size, params)) * &base;
        let evaluate = |params: &[f64]| -> Result<f64> { spectral.mix(&unitary_at(params)).average(objective) };
        let out = simplex::minimize(evaluate, &vec![0.0; size * size], &settings)?;
        let record = StartRecord {
            start,
            best: out.value,
            iterations: out.iterations,
            evaluations: out.evaluations,
            converged: out.converged,
            trace: out.trace,
        };
        Ok((out.value, unitary_at(&out.x), record))
    };

    let mut history = Vec::with_capacity(config.starts);
    let mut best: Option<(f64, CMatrix, bool)> = None;
    for batch in start_batches(config.starts) {
        let outcomes: Vec<Result<(f64, CMatrix, StartRecord)>> = batch.into_par_iter().map(run_start).collect();
        for outcome in outcomes {
            let (value, u, record) = outcome?;
            if best.as_ref().is_none_or(|(b, _, _)| value < *b) {
                best = Some((value, u, record.converged));
            }
            history.push(record);
        }
        let best_value = best.as_ref().map(|b| b.0).expect("nonempty batch");
        let agreeing = history.iter().filter(|h| h.best <= best_value + config.tol).count();
        if floor.is_some_and(|fl| best_value <= fl) || agreeing >= AGREEMENT {
            break;
        }
    }
    let (_, u, converged) = best.expect("at least one start");
    let ensemble = spectral.mix(&u);
    // re-evaluate so the value is exactly the objective on the stored ensemble
    let value = ensemble.average(objective)?;
    Ok(RoofResult { value, ensemble, starts: history.len(), converged, history })
}

/// Convex-roof extended negativity `min Σ p_k N(φ_k)`.
pub fn cren(rho: &DensityMatrix, part: &Bipartition, config: &RoofConfig) -> Result<RoofResult> {
    if part.parties() != rho.parties() {
        return Err(Error::InvalidBipartition(format!(
            "cut over {} parties applied to a {}-party state",
            part.parties(),
            rho.parties()
        )));
    }
    let objective = |psi: &PureState| negativity_pure(psi, part);
    minimize_with_floor(rho, &objective, config, Some(0.0))
}

/// Square of the convex-roof extended negativity.
pub fn scren2(rho: &DensityMatrix, part: &Bipartition, config: &RoofConfig) -> Result<SquaredRoof> {
    let roof = cren(rho, part, config)?;
    Ok(SquaredRoof { value: roof.value * roof.value, roof })
}

/// `[min Σ_h p_h √f(ψ_h)]²`. Values of `f` slightly below zero are clamped;
/// anything under `-ROUNDOFF_SLACK` aborts with [`Error::ConjectureViolation`].
pub fn roof_sqrt_functional<F>(rho: &DensityMatrix, pure_fn: &F, config: &RoofConfig) -> Result<SquaredRoof>
where
    F: Fn(&PureState) -> Result<f64> + Sync,
{
    let objective = |psi: &PureState| -> Result<f64> {
        let v = pure_fn(psi)?;
        if v < -ROUNDOFF_SLACK {
            return Err(Error::ConjectureViolation { value: v, state: Box::new(psi.clone()) });
        }
        Ok(v.max(0.0).sqrt())
    };
    let roof = minimize_with_floor(rho, &objective, config, Some(0.0))?;
    Ok(SquaredRoof { value: roof.value * roof.value, roof })
}

/// Average of `f` over the eigen-decomposition, the trivial roof upper bound.
pub fn eigen_average(rho: &DensityMatrix, f: impl FnMut(&PureState) -> Result<f64>) -> Result<f64> {
    let spectral = Spectral::of(rho);
    let r = spectral.rank();
    spectral.mix(&CMatrix::identity(r, r)).average(f)
}

/// Random mixing unitary of size `size` for a rank-`rank` state.
pub fn random_mixing<R: rand::Rng + ?Sized>(size: usize, rank: usize, rng: &mut R) -> Result<MixingUnitary> {
    MixingUnitary::new(haar_unitary(size, rng), rank)
}
