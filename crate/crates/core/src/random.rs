//! Seeded sampling of Haar-random unitaries, pure states and mixed states.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, CVector};
use crate::qstate::{DensityMatrix, PureState};

/// Deterministic RNG for a master seed and a stream index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed `n×n` unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let total: usize = dims.iter().product();
    let v = CVector::from_fn(total, |_, _| complex_gaussian(rng));
    PureState::normalized(dims.to_vec(), v).expect("gaussian vector is nonzero")
}

/// Random mixed state of the given rank: Haar-random eigenvectors with
/// uniformly drawn weights.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let total: usize = dims.iter().product();
    assert!(rank >= 1 && rank <= total, "rank {rank} out of range for dimension {total}");
    let u = haar_unitary(total, rng);
    let mut weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    let mut m = CMatrix::zeros(total, total);
    for (k, w) in weights.iter().enumerate() {
        let col = u.column(k);
        m += (col * col.adjoint()).scale(*w);
    }
    DensityMatrix::new(dims.to_vec(), m).expect("convex mixture of projectors")
}
