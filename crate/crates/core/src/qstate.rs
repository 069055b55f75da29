//! Multi-qudit states and the structural operations every measure relies on.
//!
//! Subsystems are ordered row-major: party 0 is the slowest-varying digit of
//! a basis index. All index sets in this module refer to that fixed order.

use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};

/// Schmidt coefficients at or below this are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-12;

const NORM_TOL: f64 = 1e-9;
const DENSITY_TOL: f64 = 1e-9;
const LOADER_NORM_TOL: f64 = 1e-6;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!("dimension {d} < 2")));
    }
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d)).ok_or_else(|| {
        Error::InvalidDims("total dimension overflows".into())
    })
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("A{k}")).collect()
}

/// Row-major strides for `dims`.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// For each basis index of the full space, the (row, col) pair obtained when
/// the parties in `rows` index the rows and the remaining parties the columns.
fn split_indices(dims: &[usize], rows: &[usize]) -> (Vec<(usize, usize)>, usize, usize) {
    let cols: Vec<usize> = (0..dims.len()).filter(|k| !rows.contains(k)).collect();
    let row_dims: Vec<usize> = rows.iter().map(|&k| dims[k]).collect();
    let col_dims: Vec<usize> = cols.iter().map(|&k| dims[k]).collect();
    let rs = strides(&row_dims);
    let cs = strides(&col_dims);
    let total: usize = dims.iter().product();
    let full = strides(dims);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let digit = |k: usize| (idx / full[k]) % dims[k];
        let r: usize = rows.iter().zip(&rs).map(|(&k, s)| digit(k) * s).sum();
        let c: usize = cols.iter().zip(&cs).map(|(&k, s)| digit(k) * s).sum();
        out.push((r, c));
    }
    (out, row_dims.iter().product(), col_dims.iter().product())
}

fn check_subset(parties: usize, set: &[usize]) -> Result<Vec<usize>> {
    let mut v = set.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&bad) = v.iter().find(|&&k| k >= parties) {
        return Err(Error::IndexOutOfRange { index: bad, parties });
    }
    Ok(v)
}

/// Normalized pure state over an ordered list of qudits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
    labels: Option<Vec<String>>,
}

impl PureState {
    /// Validating constructor; the amplitudes must already be normalized.
    pub fn new(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::LengthMismatch { expected: total, got: amplitudes.len() });
        }
        let v = CVector::from_vec(amplitudes);
        let dev = (v.norm_squared() - 1.0).abs();
        if !(dev <= NORM_TOL) {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { dims, amplitudes: v, labels: None })
    }

    /// Builds a state from any nonzero vector, rescaling it to unit norm.
    pub fn normalized(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amplitudes.len() != total {
            return Err(Error::LengthMismatch { expected: total, got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(f64::INFINITY));
        }
        Ok(Self { dims, amplitudes: amplitudes.unscale(norm), labels: None })
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(dims: Vec<usize>, digits: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if digits.len() != dims.len() || digits.iter().zip(&dims).any(|(x, d)| x >= d) {
            return Err(Error::InvalidArgument(format!("basis digits {digits:?} do not fit dims {dims:?}")));
        }
        let idx: usize = digits.iter().zip(strides(&dims)).map(|(x, s)| x * s).sum();
        let mut v = CVector::zeros(total);
        v[idx] = Complex64::new(1.0, 0.0);
        Self::normalized(dims, v)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.dims.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} parties",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Party names, `A1..An` unless set explicitly.
    pub fn labels(&self) -> Vec<String> {
        self.labels.clone().unwrap_or_else(|| default_labels(self.dims.len()))
    }

    /// Coefficient matrix with the parties in `rows` (ascending) on the row index.
    pub fn coefficient_matrix(&self, rows: &[usize]) -> CMatrix {
        let (map, nr, nc) = split_indices(&self.dims, rows);
        let mut m = CMatrix::zeros(nr, nc);
        for (idx, (r, c)) in map.into_iter().enumerate() {
            m[(r, c)] = self.amplitudes[idx];
        }
        m
    }

    /// Reduced density matrix on `keep`, computed directly from the amplitudes.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let keep = check_subset(self.parties(), keep)?;
        if keep.is_empty() {
            return Err(Error::InvalidArgument("keep set is empty".into()));
        }
        let m = self.coefficient_matrix(&keep);
        let rho = &m * m.adjoint();
        Ok(DensityMatrix {
            dims: keep.iter().map(|&k| self.dims[k]).collect(),
            matrix: rho,
        })
    }

    /// Reorders parties: party `k` of the result is party `order[k]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        let n = self.parties();
        let mut seen = order.to_vec();
        seen.sort_unstable();
        if seen != (0..n).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!("{order:?} is not a permutation of 0..{n}")));
        }
        let new_dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let old_strides = strides(&self.dims);
        let new_strides = strides(&new_dims);
        let mut out = CVector::zeros(self.dimension());
        for idx in 0..self.dimension() {
            let mut new_idx = 0;
            for (pos, &k) in order.iter().enumerate() {
                let digit = (idx / old_strides[k]) % self.dims[k];
                new_idx += digit * new_strides[pos];
            }
            out[new_idx] = self.amplitudes[idx];
        }
        Ok(Self {
            dims: new_dims,
            amplitudes: out,
            labels: self.labels.as_ref().map(|l| order.iter().map(|&k| l[k].clone()).collect()),
        })
    }

    /// Squared overlap `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        let total = check_dims(&dims)?;
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::LengthMismatch { expected: total, got: matrix.nrows() });
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if !(herm <= DENSITY_TOL) {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace_re(&matrix);
        if !((tr - 1.0).abs() <= DENSITY_TOL) {
            return Err(Error::BadTrace(tr));
        }
        let min_eig = linalg::eigvalsh(&matrix).last().copied().unwrap_or(0.0);
        if min_eig < -DENSITY_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { dims, matrix })
    }

    /// Convex mixture `Σ w_k ρ_k`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let mut m = CMatrix::zeros(first.dimension(), first.dimension());
        for (w, rho) in parts {
            if rho.dims != first.dims {
                return Err(Error::InvalidDims("mixture components differ in dims".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidArgument(format!("negative weight {w}")));
            }
            m += rho.matrix.scale(*w);
        }
        Self::new(first.dims.clone(), m)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let total = check_dims(&dims)?;
        Self::new(dims, CMatrix::identity(total, total).unscale(total as f64))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    /// Number of eigenvalues above [`RANK_THRESHOLD`].
    pub fn rank(&self) -> usize {
        self.eigenvalues().iter().filter(|&&v| v > RANK_THRESHOLD).count()
    }

    /// `ρ ⊗ σ`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix { dims, matrix: linalg::kron(&self.matrix, &other.matrix) }
    }
}

/// A cut `A|B` of the parties; `side_a` is stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    parties: usize,
    side_a: Vec<usize>,
}

impl Bipartition {
    pub fn new(parties: usize, side_a: &[usize]) -> Result<Self> {
        let side_a = check_subset(parties, side_a)?;
        if side_a.is_empty() || side_a.len() >= parties {
            return Err(Error::InvalidBipartition(format!(
                "side A {side_a:?} must be a non-empty proper subset of 0..{parties}"
            )));
        }
        Ok(Self { parties, side_a })
    }

    /// The cut separating party `k` from all others.
    pub fn single(parties: usize, k: usize) -> Result<Self> {
        Self::new(parties, &[k])
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn side_a(&self) -> &[usize] {
        &self.side_a
    }

    pub fn side_b(&self) -> Vec<usize> {
        (0..self.parties).filter(|k| !self.side_a.contains(k)).collect()
    }

    fn check_against(&self, dims: &[usize]) -> Result<()> {
        if dims.len() != self.parties {
            return Err(Error::InvalidBipartition(format!(
                "cut over {} parties applied to a {}-party state",
                self.parties,
                dims.len()
            )));
        }
        Ok(())
    }
}

/// `ψ = Σ √λ_i |e_i⟩⊗|f_i⟩` across a bipartition.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub basis_a: Vec<CVector>,
    pub basis_b: Vec<CVector>,
    dims: Vec<usize>,
    part: Bipartition,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.iter().filter(|&&l| l > RANK_THRESHOLD).count()
    }

    /// Rebuilds the state from coefficients and bases, in the original party order.
    pub fn reconstruct(&self) -> CVector {
        let da = self.basis_a.first().map_or(0, |v| v.len());
        let db = self.basis_b.first().map_or(0, |v| v.len());
        let mut m = CMatrix::zeros(da, db);
        for ((l, e), f) in self.coefficients.iter().zip(&self.basis_a).zip(&self.basis_b) {
            m += (e * f.transpose()).scale(l.max(0.0).sqrt());
        }
        let (map, _, _) = split_indices(&self.dims, self.part.side_a());
        CVector::from_iterator(map.len(), map.into_iter().map(|(r, c)| m[(r, c)]))
    }
}

/// Kronecker product of pure states; dims are concatenated.
pub fn tensor(states: &[PureState]) -> Result<PureState> {
    let (first, rest) = states.split_first().ok_or(Error::EmptyTensor)?;
    let mut dims = first.dims.clone();
    let mut amps = first.amplitudes.clone();
    let mut labels = first.labels();
    for s in rest {
        let a = CMatrix::from_column_slice(amps.len(), 1, amps.as_slice());
        let b = CMatrix::from_column_slice(s.dimension(), 1, s.amplitudes.as_slice());
        amps = CVector::from_column_slice(linalg::kron(&a, &b).as_slice());
        dims.extend_from_slice(&s.dims);
        labels.extend(s.labels());
    }
    let n = dims.len();
    let mut out = PureState::normalized(dims, amps)?;
    // keep caller labels unless they collide after concatenation
    let mut uniq = labels.clone();
    uniq.sort();
    uniq.dedup();
    if uniq.len() == n && labels != default_labels(n) {
        out.labels = Some(labels);
    }
    Ok(out)
}

/// `|ψ⟩⟨ψ|`.
pub fn to_density(psi: &PureState) -> DensityMatrix {
    let v = &psi.amplitudes;
    DensityMatrix { dims: psi.dims.clone(), matrix: v * v.adjoint() }
}

/// Traces out every party not in `keep`; kept parties retain their order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let keep = check_subset(rho.parties(), keep)?;
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep set is empty".into()));
    }
    let (map, nk, nt) = split_indices(&rho.dims, &keep);
    // full index for every (kept, traced) pair
    let mut full = vec![0usize; nk * nt];
    for (idx, (r, c)) in map.into_iter().enumerate() {
        full[r * nt + c] = idx;
    }
    let mut out = CMatrix::zeros(nk, nk);
    for a in 0..nk {
        for b in 0..nk {
            let mut acc = ZERO;
            for t in 0..nt {
                acc += rho.matrix[(full[a * nt + t], full[b * nt + t])];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(DensityMatrix { dims: keep.iter().map(|&k| rho.dims[k]).collect(), matrix: out })
}

/// Transposes the side-B indices: `ρ^{T_B}[a b, a' b'] = ρ[a b', a' b]`.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<CMatrix> {
    partial_transpose_matrix(&rho.dims, &rho.matrix, part)
}

/// [`partial_transpose`] on an arbitrary square matrix over `dims`, so the
/// map can be applied to its own output.
pub fn partial_transpose_matrix(dims: &[usize], matrix: &CMatrix, part: &Bipartition) -> Result<CMatrix> {
    let n = check_dims(dims)?;
    part.check_against(dims)?;
    let st = strides(dims);
    let side_b = part.side_b();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::LengthMismatch { expected: n, got: matrix.nrows() });
    }
    // B-digit contribution of each index
    let b_part: Vec<usize> = (0..n)
        .map(|idx| side_b.iter().map(|&k| ((idx / st[k]) % dims[k]) * st[k]).sum())
        .collect();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let src_i = i - b_part[i] + b_part[j];
            let src_j = j - b_part[j] + b_part[i];
            out[(i, j)] = matrix[(src_i, src_j)];
        }
    }
    Ok(out)
}

/// Schmidt decomposition across `part`, coefficients descending.
pub fn schmidt(psi: &PureState, part: &Bipartition) -> Result<SchmidtDecomposition> {
    part.check_against(&psi.dims)?;
    let m = psi.coefficient_matrix(part.side_a());
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    Ok(SchmidtDecomposition {
        coefficients: order.iter().map(|&i| svd.singular_values[i].powi(2)).collect(),
        basis_a: order.iter().map(|&i| u.column(i).into_owned()).collect(),
        basis_b: order.iter().map(|&i| v_t.row(i).transpose()).collect(),
        dims: psi.dims.clone(),
        part: part.clone(),
    })
}

/// Squared Schmidt coefficients only (no basis vectors), descending.
pub fn schmidt_coefficients(psi: &PureState, part: &Bipartition) -> Result<Vec<f64>> {
    part.check_against(&psi.dims)?;
    let m = psi.coefficient_matrix(part.side_a());
    let mut s: Vec<f64> = m.singular_values().iter().map(|x| x * x).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

// ---------------------------------------------------------------------------
// JSON formats

#[derive(Serialize, Deserialize)]
struct PureFile {
    dims: Vec<usize>,
    amplitudes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct DensityFile {
    dims: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

/// A state read from JSON, either pure or mixed.
#[derive(Clone, Debug)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateInput {
    pub fn dims(&self) -> &[usize] {
        match self {
            StateInput::Pure(p) => p.dims(),
            StateInput::Mixed(m) => m.dims(),
        }
    }
}

fn parse_err(e: impl std::fmt::Display) -> Error {
    Error::Parse(e.to_string())
}

impl PureState {
    pub fn to_json_value(&self) -> serde_json::Value {
        let file = PureFile {
            dims: self.dims.clone(),
            amplitudes: self.amplitudes.iter().map(|z| [z.re, z.im]).collect(),
            labels: self.labels.clone(),
        };
        serde_json::to_value(file).expect("plain data serializes")
    }
}

impl DensityMatrix {
    pub fn to_json_value(&self) -> serde_json::Value {
        let n = self.dimension();
        let file = DensityFile {
            dims: self.dims.clone(),
            matrix: (0..n)
                .map(|r| (0..n).map(|c| [self.matrix[(r, c)].re, self.matrix[(r, c)].im]).collect())
                .collect(),
        };
        serde_json::to_value(file).expect("plain data serializes")
    }
}

/// Parses the JSON state format. Pure states whose norm is off by at most
/// 1e-6 (density matrices: trace) are renormalized; larger deviations are
/// rejected.
pub fn state_from_json(text: &str) -> Result<StateInput> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(parse_err)?;
    if value.get("amplitudes").is_some() {
        let file: PureFile = serde_json::from_value(value).map_err(parse_err)?;
        let total = check_dims(&file.dims)?;
        if file.amplitudes.len() != total {
            return Err(Error::LengthMismatch { expected: total, got: file.amplitudes.len() });
        }
        let v = CVector::from_iterator(total, file.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)));
        let dev = (v.norm() - 1.0).abs();
        if !(dev <= LOADER_NORM_TOL) {
            return Err(Error::NotNormalized(dev));
        }
        let mut psi = PureState::normalized(file.dims, v)?;
        if let Some(labels) = file.labels {
            psi = psi.with_labels(labels)?;
        }
        Ok(StateInput::Pure(psi))
    } else if value.get("matrix").is_some() {
        let file: DensityFile = serde_json::from_value(value).map_err(parse_err)?;
        let total = check_dims(&file.dims)?;
        if file.matrix.len() != total || file.matrix.iter().any(|row| row.len() != total) {
            return Err(Error::LengthMismatch { expected: total, got: file.matrix.len() });
        }
        let m = CMatrix::from_fn(total, total, |r, c| {
            let [re, im] = file.matrix[r][c];
            Complex64::new(re, im)
        });
        let tr = linalg::trace_re(&m);
        if !((tr - 1.0).abs() <= LOADER_NORM_TOL) {
            return Err(Error::BadTrace(tr));
        }
        Ok(StateInput::Mixed(DensityMatrix::new(file.dims, m.unscale(tr))?))
    } else {
        Err(Error::Parse("expected an \"amplitudes\" or \"matrix\" field".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn tensor_of_basis_states() {
        let z = PureState::basis(vec![2], &[0]).unwrap();
        let zz = tensor(&[z.clone(), z]).unwrap();
        assert_eq!(zz.dims(), &[2, 2]);
        assert_eq!(zz.amplitudes()[0], c(1.0));
    }

    #[test]
    fn tensor_plus_with_one() {
        let h = 0.5f64.sqrt();
        let plus = PureState::new(vec![2], vec![c(h), c(h)]).unwrap();
        let one = PureState::basis(vec![2], &[1]).unwrap();
        let s = tensor(&[plus, one]).unwrap();
        let want = [c(0.0), c(h), c(0.0), c(h)];
        for (a, b) in s.amplitudes().iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_three_qutrits() {
        let q = PureState::basis(vec![3], &[2]).unwrap();
        let s = tensor(&[q.clone(), q.clone(), q]).unwrap();
        assert_eq!(s.dims(), &[3, 3, 3]);
        assert_eq!(s.dimension(), 27);
    }

    #[test]
    fn empty_tensor_is_an_error() {
        assert!(matches!(tensor(&[]), Err(Error::EmptyTensor)));
    }

    #[test]
    fn density_of_basis_and_bell() {
        let rho = to_density(&PureState::basis(vec![2], &[0]).unwrap());
        assert_eq!(rho.matrix()[(0, 0)], c(1.0));
        assert_eq!(rho.matrix()[(1, 1)], c(0.0));
        let bell = to_density(&fixtures::bell());
        let halves = bell.matrix().iter().filter(|z| (z.re - 0.5).abs() < 1e-15).count();
        assert_eq!(halves, 4);
        assert!((bell.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = partial_trace(&to_density(&fixtures::bell()), &[0]).unwrap();
        let want = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), want.matrix()) < 1e-15);
    }

    #[test]
    fn counterexample_qutrit_marginal() {
        // Direct contraction of the four amplitudes: every A-digit carries 1/3.
        let rho = partial_trace(&to_density(&fixtures::qutrit_ckw_counterexample()), &[0]).unwrap();
        for r in 0..3 {
            for col in 0..3 {
                let want = if r == col { 1.0 / 3.0 } else { 0.0 };
                assert!((rho.matrix()[(r, col)] - c(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_out_of_range() {
        let rho = to_density(&fixtures::bell());
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn partial_transpose_of_bell() {
        let rho = to_density(&fixtures::bell());
        let pt = partial_transpose(&rho, &Bipartition::single(2, 0).unwrap()).unwrap();
        let vals = linalg::eigvalsh(&pt);
        let want = [0.5, 0.5, 0.5, -0.5];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_is_psd() {
        let a = to_density(&PureState::new(vec![2], vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap());
        let b = DensityMatrix::maximally_mixed(vec![3]).unwrap();
        let pt = partial_transpose(&a.tensor(&b), &Bipartition::single(2, 0).unwrap()).unwrap();
        assert!(*linalg::eigvalsh(&pt).last().unwrap() > -1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let cut = Bipartition::single(2, 0).unwrap();
        let prod = PureState::basis(vec![2, 2], &[0, 0]).unwrap();
        let s = schmidt(&prod, &cut).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-15);

        let s = schmidt(&fixtures::bell(), &cut).unwrap();
        assert!((s.coefficients[0] - 0.5).abs() < 1e-12 && (s.coefficients[1] - 0.5).abs() < 1e-12);

        let s = schmidt(&fixtures::qutrit_ckw_counterexample(), &Bipartition::single(3, 0).unwrap()).unwrap();
        assert_eq!(s.rank(), 3);
        for l in &s.coefficients {
            assert!((l - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_state_validation() {
        assert!(matches!(PureState::new(vec![2], vec![c(1.0)]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(PureState::new(vec![2], vec![c(1.0), c(1.0)]), Err(Error::NotNormalized(_))));
        assert!(matches!(PureState::new(vec![1, 2], vec![c(1.0), c(0.0)]), Err(Error::InvalidDims(_))));
    }

    #[test]
    fn density_validation() {
        let mut m = CMatrix::identity(2, 2);
        assert!(matches!(DensityMatrix::new(vec![2], m.clone()), Err(Error::BadTrace(_))));
        m[(0, 0)] = c(1.5);
        m[(1, 1)] = c(-0.5);
        assert!(matches!(DensityMatrix::new(vec![2], m.clone()), Err(Error::NotPsd(_))));
        m[(0, 1)] = c(0.1);
        assert!(matches!(DensityMatrix::new(vec![2], m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn bipartition_validation() {
        assert!(Bipartition::new(3, &[]).is_err());
        assert!(Bipartition::new(3, &[0, 1, 2]).is_err());
        assert!(Bipartition::new(3, &[3]).is_err());
        let p = Bipartition::new(3, &[2, 0]).unwrap();
        assert_eq!(p.side_a(), &[0, 2]);
        assert_eq!(p.side_b(), vec![1]);
    }

    #[test]
    fn json_loader_normalizes_small_deviation_only() {
        let ok = r#"{"dims":[2],"amplitudes":[[1.0000004,0],[0,0]]}"#;
        match state_from_json(ok).unwrap() {
            StateInput::Pure(p) => assert!((p.amplitudes().norm() - 1.0).abs() < 1e-15),
            _ => panic!("expected pure"),
        }
        let bad = r#"{"dims":[2],"amplitudes":[[1.1,0],[0,0]]}"#;
        assert!(matches!(state_from_json(bad), Err(Error::NotNormalized(_))));
        assert!(matches!(state_from_json("{\"dims\":[2]}"), Err(Error::Parse(_))));
        assert!(matches!(state_from_json("not json"), Err(Error::Parse(_))));
    }

    #[test]
    fn json_round_trip_density() {
        let rho = to_density(&fixtures::bell());
        let text = rho.to_json_value().to_string();
        match state_from_json(&text).unwrap() {
            StateInput::Mixed(m) => assert!(linalg::max_abs_diff(m.matrix(), rho.matrix()) < 1e-15),
            _ => panic!("expected mixed"),
        }
    }

    #[test]
    fn permute_swaps_parties() {
        let s = PureState::basis(vec![2, 3], &[1, 2]).unwrap();
        let p = s.permute(&[1, 0]).unwrap();
        assert_eq!(p.dims(), &[3, 2]);
        let want = PureState::basis(vec![3, 2], &[2, 1]).unwrap();
        assert!((p.fidelity(&want) - 1.0).abs() < 1e-15);
    }
}
