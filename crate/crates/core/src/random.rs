//! Seeded generators for the random matrices used by the suites and tests.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;

use crate::spectral::{CMatrix, HermitianOperator};

/// A ChaCha8 generator for `(seed, stream)`; different streams are
/// independent, so trial `t` of a suite always sees the same numbers.
pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// GUE-type Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = random_matrix(n, n, rng);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).expect("symmetrized matrix is Hermitian")
}

/// Haar-distributed unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_matrix(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Positive semidefinite perturbation `Σ_{j<rank} w_j w_j*` with Gaussian
/// vectors scaled by `strength / n`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, strength: f64, rng: &mut R) -> HermitianOperator {
    let w = random_matrix(n, rank, rng).scale((strength / n as f64).sqrt());
    HermitianOperator::new(&w * w.adjoint()).expect("Gram matrix is Hermitian")
}

/// Hermitian perturbation of rank `rank` with random signs.
pub fn random_low_rank<R: Rng + ?Sized>(n: usize, rank: usize, strength: f64, rng: &mut R) -> HermitianOperator {
    let w = random_matrix(n, rank, rng).scale((strength / n as f64).sqrt());
    let signs: Vec<Complex64> = (0..rank)
        .map(|_| Complex64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0))
        .collect();
    let s = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs));
    HermitianOperator::new(&w * s * w.adjoint()).expect("signed Gram matrix is Hermitian")
}
