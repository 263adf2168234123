//! Dense Hermitian linear algebra: eigendecompositions, functional calculus,
//! resolvent powers, singular values, Schatten norms and `det(I + M)`.
//!
//! Everything here works on `DMatrix<Complex64>` and is pure; values are
//! immutable after construction.

mod function;
mod json;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub use function::ScalarFunction;
pub use json::MatrixJson;

pub type CMatrix = DMatrix<Complex64>;

/// Relative cluster width below which eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Relative Hermiticity tolerance for declared Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute floor used wherever a scale could vanish.
pub const ABS_FLOOR: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("function is undefined at eigenvalue {eigenvalue}")]
    FunctionUndefined { eigenvalue: f64 },
    #[error("spectral parameter {z} lies on the real axis")]
    RealSpectralParameter { z: Complex64 },
    #[error("Schatten index p = {p} is below 1")]
    InvalidSchattenIndex { p: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("malformed matrix JSON: {0}")]
    Json(String),
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)))
}

pub fn diag_matrix(values: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// A declared-Hermitian dense operator.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: CMatrix,
}

impl HermitianOperator {
    /// Validates `entries` against `HERMITIAN_TOL · max|entry|` and stores the
    /// exactly symmetrized matrix.
    pub fn new(entries: CMatrix) -> Result<Self, SpectralError> {
        if !entries.is_square() {
            return Err(SpectralError::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        let asymmetry = max_abs(&(&entries - entries.adjoint()));
        let tolerance = (HERMITIAN_TOL * max_abs(&entries)).max(ABS_FLOOR);
        if asymmetry > tolerance {
            return Err(SpectralError::NotHermitian {
                asymmetry,
                tolerance,
            });
        }
        let sym = (&entries + entries.adjoint()).scale(0.5);
        Ok(Self { entries: sym })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self, SpectralError> {
        Self::new(real_matrix(dim, dim, data))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self {
            entries: diag_matrix(&d),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self, SpectralError> {
        if self.dim() != other.dim() {
            return Err(SpectralError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries + &other.entries,
        })
    }
}

/// Eigenvalues in ascending order with a unitary matrix whose columns are the
/// matching eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// `U · diag(λ) · U*`.
    pub fn reconstruct(&self) -> CMatrix {
        let d: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        conjugate_diagonal(&self.eigenvectors, &d)
    }

    /// Number of eigenvalues `≤ λ`.
    pub fn count_le(&self, lambda: f64) -> usize {
        self.eigenvalues.partition_point(|&x| x <= lambda)
    }
}

/// `U · diag(d) · U*` without forming the diagonal matrix.
pub fn conjugate_diagonal(u: &CMatrix, d: &[Complex64]) -> CMatrix {
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= d[j];
    }
    scaled * u.adjoint()
}

/// Hermitian eigendecomposition with a reproducible eigenvector choice.
///
/// Eigenvalues are sorted ascending. Eigenvectors of each simple eigenvalue
/// are normalized so their largest-modulus component (lowest index on ties)
/// is real and positive. A cluster of eigenvalues whose consecutive gaps are
/// below `DEGENERACY_TOL · spectral radius` is rebuilt from its spectral
/// projector `P`: the vectors `P e_j` are orthonormalized greedily, always
/// taking the candidate with the largest remaining norm (lowest `j` on ties),
/// and the result is rotated to diagonalize the compressed operator unless the
/// cluster is numerically exactly degenerate.
pub fn eig_hermitian(a: &HermitianOperator) -> SpectralDecomposition {
    let n = a.dim();
    if n == 0 {
        return SpectralDecomposition {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = a.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut u = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &eig.eigenvectors.column(src));
    }

    let radius = eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = (DEGENERACY_TOL * radius).max(ABS_FLOOR);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] < tol {
            end += 1;
        }
        if end - start > 1 {
            canonical_cluster(a.matrix(), &mut u, start, end, radius);
        }
        start = end;
    }
    for mut col in u.column_iter_mut() {
        fix_phase(&mut col);
    }
    SpectralDecomposition {
        eigenvalues,
        eigenvectors: u,
    }
}

fn fix_phase(col: &mut nalgebra::DVectorViewMut<'_, Complex64>) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, c) in col.iter().enumerate() {
        let nrm = c.norm();
        if nrm > best_norm * (1.0 + 1e-10) {
            best = i;
            best_norm = nrm;
        }
    }
    if best_norm > 0.0 {
        let phase = col[best].conj() / best_norm;
        *col *= phase;
    }
}

fn canonical_cluster(a: &CMatrix, u: &mut CMatrix, start: usize, end: usize, radius: f64) {
    let n = u.nrows();
    let k = end - start;
    let block = u.columns(start, k).into_owned();
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(k);
    let mut candidates: Vec<nalgebra::DVector<Complex64>> = (0..n)
        .map(|j| {
            // P e_j = B (B* e_j) = B · conj(row j of B)
            let coeffs = block.row(j).adjoint();
            &block * coeffs
        })
        .collect();
    for _ in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (j, c) in candidates.iter().enumerate() {
            let nrm = c.norm();
            if nrm > best_norm * (1.0 + 1e-10) {
                best = j;
                best_norm = nrm;
            }
        }
        let mut v = candidates[best].clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let nrm = v.norm();
        v /= Complex64::new(nrm, 0.0);
        for c in candidates.iter_mut() {
            let proj = v.dotc(c);
            *c -= &v * proj;
        }
        basis.push(v);
    }
    let q = CMatrix::from_columns(&basis);
    let compressed = q.adjoint() * a * &q;
    let compressed = (&compressed + compressed.adjoint()).scale(0.5);
    let small = compressed.symmetric_eigen();
    let spread = small.eigenvalues.max() - small.eigenvalues.min();
    let rotated = if spread < 1e-12 * radius.max(1.0) {
        q
    } else {
        let mut idx: Vec<usize> = (0..k).collect();
        idx.sort_by(|&i, &j| small.eigenvalues[i].total_cmp(&small.eigenvalues[j]));
        let mut w = CMatrix::zeros(k, k);
        for (dst, &src) in idx.iter().enumerate() {
            w.set_column(dst, &small.eigenvectors.column(src));
        }
        q * w
    };
    u.columns_mut(start, k).copy_from(&rotated);
}

/// `U · diag(f(λ_i)) · U*`.
pub fn apply_function(
    d: &SpectralDecomposition,
    f: &ScalarFunction,
) -> Result<CMatrix, SpectralError> {
    apply_map(d, |x| f.eval(x))
}

/// Functional calculus with a bare closure.
pub fn apply_map<F>(d: &SpectralDecomposition, f: F) -> Result<CMatrix, SpectralError>
where
    F: Fn(f64) -> Complex64,
{
    let values = d
        .eigenvalues
        .iter()
        .map(|&x| {
            let v = f(x);
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(SpectralError::FunctionUndefined { eigenvalue: x })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(conjugate_diagonal(&d.eigenvectors, &values))
}

/// `(H - z)^{-k}`.
pub fn resolvent_power(
    d: &SpectralDecomposition,
    z: Complex64,
    k: u32,
) -> Result<CMatrix, SpectralError> {
    check_off_axis(z)?;
    let k = k as i32;
    apply_map(d, |x| (Complex64::new(x, 0.0) - z).powi(-k))
}

pub(crate) fn check_off_axis(z: Complex64) -> Result<(), SpectralError> {
    if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
        Err(SpectralError::RealSpectralParameter { z })
    } else {
        Ok(())
    }
}

/// Singular values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularValueProfile {
    values: Vec<f64>,
    source_dims: (usize, usize),
}

impl SingularValueProfile {
    /// Builds a profile from arbitrary values; they are sorted descending.
    pub fn from_values(mut values: Vec<f64>, source_dims: (usize, usize)) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self {
            values,
            source_dims,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_dims(&self) -> (usize, usize) {
        self.source_dims
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

pub fn singular_values(m: &CMatrix) -> Result<SingularValueProfile, SpectralError> {
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let dims = (m.nrows(), m.ncols());
    if dims.0 == 0 || dims.1 == 0 {
        return Ok(SingularValueProfile::from_values(vec![], dims));
    }
    let s = m.clone().singular_values();
    Ok(SingularValueProfile::from_values(
        s.iter().map(|&x| x.max(0.0)).collect(),
        dims,
    ))
}

/// `(Σ s_i^p)^{1/p}`; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(profile: &SingularValueProfile, p: f64) -> Result<f64, SpectralError> {
    if p.is_nan() || p < 1.0 {
        return Err(SpectralError::InvalidSchattenIndex { p });
    }
    let top = profile.largest();
    if p.is_infinite() || top == 0.0 {
        return Ok(top);
    }
    let sum: f64 = profile.values.iter().map(|s| (s / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

/// Shorthand for `schatten_norm(singular_values(m), p)`.
pub fn schatten_norm_of(m: &CMatrix, p: f64) -> Result<f64, SpectralError> {
    schatten_norm(&singular_values(m)?, p)
}

/// `det(I + M)` through an LU factorization with partial pivoting.
pub fn det_id_plus(m: &CMatrix) -> Result<Complex64, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    let shifted = m + CMatrix::identity(n, n);
    Ok(shifted.lu().determinant())
}

/// Inverse of `M`, or `None` if LU breaks down.
pub fn inverse(m: &CMatrix) -> Option<CMatrix> {
    m.clone().lu().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix, random_unitary, seeded};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn diagonal_input_gives_permutation() {
        let d = eig_hermitian(&HermitianOperator::diagonal(&[3.0, 1.0, 2.0]));
        assert_eq!(d.eigenvalues(), &[1.0, 2.0, 3.0]);
        let u = d.eigenvectors();
        for j in 0..3 {
            let nz: Vec<_> = (0..3).filter(|&i| u[(i, j)].norm() > 1e-12).collect();
            assert_eq!(nz.len(), 1);
            assert_relative_eq!(u[(nz[0], j)].re, 1.0, epsilon = 1e-14);
        }
        assert_eq!(u[(1, 0)], c(1.0));
        assert_eq!(u[(2, 1)], c(1.0));
        assert_eq!(u[(0, 2)], c(1.0));
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let h = HermitianOperator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let d = eig_hermitian(&h);
        assert_relative_eq!(d.eigenvalues()[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(d.eigenvalues()[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_reconstruction_seed_42() {
        let mut rng = seeded(42, 0);
        let h = random_hermitian(8, &mut rng);
        let d = eig_hermitian(&h);
        let resid = max_abs(&(d.reconstruct() - h.matrix()));
        assert!(resid <= 1e-10 * d.spectral_radius());
        let u = d.eigenvectors();
        assert!(max_abs(&(u.adjoint() * u - CMatrix::identity(8, 8))) <= 1e-12);
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let err = HermitianOperator::from_real(2, &[0.0, 1.0, 2.0, 0.0]).unwrap_err();
        match err {
            SpectralError::NotHermitian { asymmetry, .. } => assert_relative_eq!(asymmetry, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_clusters_are_canonical() {
        // Same operator presented in two rotated bases of its degenerate
        // eigenspace must yield the same eigenvectors.
        let mut rng = seeded(3, 0);
        let w = random_unitary(6, &mut rng);
        let diag: Vec<Complex64> = [1.0, 1.0, 1.0, 2.0, 2.0, 5.0].iter().map(|&x| c(x)).collect();
        let a = HermitianOperator::new(conjugate_diagonal(&w, &diag)).unwrap();
        let d1 = eig_hermitian(&a);
        // rotate within the first cluster
        let v = random_unitary(3, &mut rng);
        let mut w2 = w.clone();
        let rotated = w.columns(0, 3) * &v;
        w2.columns_mut(0, 3).copy_from(&rotated);
        let a2 = HermitianOperator::new(conjugate_diagonal(&w2, &diag)).unwrap();
        let d2 = eig_hermitian(&a2);
        assert!(max_abs(&(d1.eigenvectors() - d2.eigenvectors())) < 1e-9);
        assert!(max_abs(&(d1.reconstruct() - a.matrix())) < 1e-12 * 5.0);
    }

    #[test]
    fn identity_function_reproduces_operator() {
        let mut rng = seeded(5, 0);
        let h = random_hermitian(6, &mut rng);
        let d = eig_hermitian(&h);
        let back = apply_function(&d, &ScalarFunction::identity()).unwrap();
        assert!(max_abs(&(back - h.matrix())) < 1e-12);
    }

    #[test]
    fn square_of_pauli_is_identity() {
        let h = HermitianOperator::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let d = eig_hermitian(&h);
        let sq = apply_function(&d, &ScalarFunction::polynomial(vec![0.0, 0.0, 1.0])).unwrap();
        assert!(max_abs(&(sq - CMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn resolvent_matches_direct_inverse() {
        let mut rng = seeded(6, 0);
        let h = random_hermitian(6, &mut rng);
        let d = eig_hermitian(&h);
        let z = Complex64::i();
        let f = ScalarFunction::resolvent_power(z, 1);
        let via_fc = apply_function(&d, &f).unwrap();
        let direct = inverse(&(h.matrix() - CMatrix::identity(6, 6) * z)).unwrap();
        assert!(max_abs(&(via_fc - direct)) < 1e-10);
    }

    #[test]
    fn pole_at_eigenvalue_is_reported() {
        let d = eig_hermitian(&HermitianOperator::diagonal(&[0.0, 1.0]));
        let f = ScalarFunction::new(|x| c(1.0 / (x - 1.0)), |x| c(-1.0 / (x - 1.0).powi(2)));
        assert_eq!(
            apply_function(&d, &f).unwrap_err(),
            SpectralError::FunctionUndefined { eigenvalue: 1.0 }
        );
    }

    #[test]
    fn resolvent_power_examples() {
        let d = eig_hermitian(&HermitianOperator::diagonal(&[0.0]));
        let r = resolvent_power(&d, Complex64::i(), 1).unwrap();
        assert_relative_eq!(r[(0, 0)].im, 1.0, epsilon = 1e-15);
        assert_relative_eq!(r[(0, 0)].re, 0.0, epsilon = 1e-15);

        let d = eig_hermitian(&HermitianOperator::diagonal(&[1.0, -1.0]));
        let r = resolvent_power(&d, Complex64::i(), 3).unwrap();
        let want_a = (c(1.0) - Complex64::i()).powi(-3);
        let want_b = (c(-1.0) - Complex64::i()).powi(-3);
        // eigenvalues are sorted, so the basis is permuted back by U
        assert!((r[(0, 0)] - want_a).norm() < 1e-14);
        assert!((r[(1, 1)] - want_b).norm() < 1e-14);
        assert!(r[(0, 1)].norm() < 1e-15);

        let mut rng = seeded(9, 0);
        let h = random_hermitian(6, &mut rng);
        let d = eig_hermitian(&h);
        let z = Complex64::new(0.0, 2.0);
        let r2 = resolvent_power(&d, z, 2).unwrap();
        let inv = inverse(&(h.matrix() - CMatrix::identity(6, 6) * z)).unwrap();
        assert!(max_abs(&(r2 - &inv * &inv)) < 1e-10);

        assert!(matches!(
            resolvent_power(&d, c(0.5), 1),
            Err(SpectralError::RealSpectralParameter { .. })
        ));
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values(&real_matrix(2, 2, &[3.0, 0.0, 0.0, -4.0])).unwrap();
        assert_relative_eq!(s.values()[0], 4.0, epsilon = 1e-14);
        assert_relative_eq!(s.values()[1], 3.0, epsilon = 1e-14);
        assert_eq!(schatten_norm(&s, 1.0).unwrap(), 7.0);
        assert_eq!(schatten_norm(&s, f64::INFINITY).unwrap(), 4.0);
        assert!(schatten_norm(&s, 0.5).is_err());

        let mut rng = seeded(1, 0);
        let u = random_matrix(5, 1, &mut rng);
        let v = random_matrix(5, 1, &mut rng);
        let u = &u / Complex64::new(u.norm(), 0.0);
        let v = &v / Complex64::new(v.norm(), 0.0);
        let s = singular_values(&(u * v.adjoint())).unwrap();
        assert_relative_eq!(s.values()[0], 1.0, epsilon = 1e-12);
        assert!(s.values()[1..].iter().all(|&x| x < 1e-12));
        assert_eq!(s.values().len(), 5);

        let m = random_matrix(5, 5, &mut rng);
        let s = singular_values(&m).unwrap();
        let sum_sq: f64 = s.values().iter().map(|x| x * x).sum();
        assert_relative_eq!(sum_sq, frobenius(&m).powi(2), max_relative = 1e-10);
        assert_relative_eq!(schatten_norm(&s, 2.0).unwrap(), frobenius(&m), max_relative = 1e-12);
    }

    #[test]
    fn det_examples() {
        assert_eq!(det_id_plus(&CMatrix::zeros(3, 3)).unwrap(), c(1.0));
        let m = real_matrix(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        assert_relative_eq!(det_id_plus(&m).unwrap().re, 6.0, epsilon = 1e-14);

        let mut rng = seeded(2, 0);
        let m = random_matrix(6, 6, &mut rng);
        let shifted = &m + CMatrix::identity(6, 6);
        let (_, t) = shifted.schur().unpack();
        let eig_prod: Complex64 = t.diagonal().iter().product();
        let det = det_id_plus(&m).unwrap();
        assert!((det - eig_prod).norm() <= 1e-9 * det.norm());
        assert!(det_id_plus(&CMatrix::zeros(2, 3)).is_err());
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0..2.0f64, 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn functional_calculus_is_multiplicative(seed in 0u64..10_000, f in poly_strategy(), g in poly_strategy()) {
            let mut rng = seeded(seed, 1);
            let h = random_hermitian(8, &mut rng);
            let d = eig_hermitian(&h);
            let mut fg = vec![0.0; f.len() + g.len() - 1];
            for (i, a) in f.iter().enumerate() {
                for (j, b) in g.iter().enumerate() {
                    fg[i + j] += a * b;
                }
            }
            let lhs = apply_function(&d, &ScalarFunction::polynomial(fg)).unwrap();
            let rhs = apply_function(&d, &ScalarFunction::polynomial(f)).unwrap()
                * apply_function(&d, &ScalarFunction::polynomial(g)).unwrap();
            let scale = max_abs(&rhs).max(1.0);
            prop_assert!(max_abs(&(lhs - rhs)) <= 1e-10 * scale);
        }

        #[test]
        fn holder_trace_norm_inequality(seed in 0u64..10_000, p in 1.0..6.0f64) {
            let mut rng = seeded(seed, 2);
            let a = random_matrix(6, 6, &mut rng);
            let b = random_matrix(6, 6, &mut rng);
            let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
            let lhs = schatten_norm_of(&(&a * &b), 1.0).unwrap();
            let rhs = schatten_norm_of(&a, p).unwrap() * schatten_norm_of(&b, q).unwrap();
            prop_assert!(lhs <= rhs + 1e-10);
        }

        #[test]
        fn singular_values_are_unitarily_invariant(seed in 0u64..10_000) {
            let mut rng = seeded(seed, 3);
            let m = random_matrix(5, 5, &mut rng);
            let u = random_unitary(5, &mut rng);
            let v = random_unitary(5, &mut rng);
            let s1 = singular_values(&m).unwrap();
            let s2 = singular_values(&(&u * &m * &v)).unwrap();
            for (a, b) in s1.values().iter().zip(s2.values()) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn det_is_multiplicative(seed in 0u64..10_000) {
            let mut rng = seeded(seed, 4);
            let a = random_matrix(5, 5, &mut rng).scale(0.5);
            let b = random_matrix(5, 5, &mut rng).scale(0.5);
            let lhs = det_id_plus(&(&a + &b + &a * &b)).unwrap();
            let rhs = det_id_plus(&a).unwrap() * det_id_plus(&b).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(ABS_FLOOR));
        }
    }
}
