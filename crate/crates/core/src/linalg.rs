//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending
/// with eigenvectors as matching columns.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // symmetrize so roundoff in the input cannot leak into the solver
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues only, descending.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut values: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Largest elementwise modulus of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub fn trace_re(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// Apply `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let n = m.nrows();
    let mut scaled = vectors.clone();
    for (c, v) in values.iter().enumerate() {
        let fv = Complex64::new(f(*v), 0.0);
        for r in 0..n {
            scaled[(r, c)] *= fv;
        }
    }
    scaled * vectors.adjoint()
}

/// `exp(i H)` for Hermitian `H`.
pub fn expi_hermitian(h: &CMatrix) -> CMatrix {
    let (values, vectors) = eigh(h);
    let n = h.nrows();
    let mut scaled = vectors.clone();
    for (c, v) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, *v);
        for r in 0..n {
            scaled[(r, c)] *= phase;
        }
    }
    scaled * vectors.adjoint()
}

/// Hermitian matrix from `n²` real parameters: diagonal first, then
/// (re, im) pairs of the strict upper triangle in row order.
pub fn hermitian_from_params(n: usize, params: &[f64]) -> CMatrix {
    debug_assert_eq!(params.len(), n * n);
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Max elementwise deviation of `U†U` from the identity.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((g[(r, c)] - target).norm());
        }
    }
    worst
}

/// Kronecker product of two matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
