//! The spectral shift function of a finite-dimensional pair `(H₀, H)`.
//!
//! In finite dimensions the compactly supported solution of
//! `Tr(f(H) - f(H₀)) = ∫ ξ f'` is `ξ = N₀ - N`, the difference of the
//! eigenvalue counting functions. Three routes are provided and cross-checked:
//! direct counting, the change of variables `ξ(λ; H, H₀) = ξ(φ(λ); φ(H), φ(H₀))`,
//! and the boundary phase of the perturbation determinant
//! `D(z) = det(I + V(H₀ - z)^{-1})`.

mod admissible;
mod phase;
mod phi;
mod step;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::spectral::{
    apply_function, conjugate_diagonal, det_id_plus, eig_hermitian, CMatrix, HermitianOperator,
    ScalarFunction, SpectralDecomposition, SpectralError,
};

pub use admissible::{check_admissible, AdmissibilityReport, AdmissibleFunction, TailFit, TAIL_RADII};
pub use phase::{default_schedule, richardson, track_phase, PhaseEstimate, MAX_PHASE_STEP, STEP_FLOOR};
pub use phi::{build_phi, quintic_coefficients, ChangeOfVariable, MONOTONICITY_GRID};
pub use step::StepFunction;

/// Distance from the spectrum below which the determinant route refuses λ.
pub const JUMP_EXCLUSION: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SsfError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("malformed step function: {0}")]
    MalformedStep(String),
    #[error("order m = {m} must be a positive odd integer")]
    InvalidOrder { m: u32 },
    #[error("cutoff radius {cutoff} must be positive and finite")]
    InvalidCutoff { cutoff: f64 },
    #[error("change of variables is not monotone: min slope {min_slope:e}")]
    NonMonotone { min_slope: f64 },
    #[error("λ = {lambda} is within {distance:e} of eigenvalue {eigenvalue} (a jump point)")]
    JumpPoint {
        lambda: f64,
        eigenvalue: f64,
        distance: f64,
    },
    #[error("ε schedule must be a non-empty, strictly decreasing list of positive numbers")]
    BadSchedule,
    #[error("phase tracking hit the step floor at height {height:e}")]
    PhaseStepFloor { height: f64 },
    #[error("perturbation determinant vanished or overflowed at height {height:e}")]
    DegenerateDeterminant { height: f64 },
}

fn check_dims(left: usize, right: usize) -> Result<(), SsfError> {
    if left != right {
        Err(SsfError::DimensionMismatch { left, right })
    } else {
        Ok(())
    }
}

/// `ξ(λ) = N₀(λ) - N(λ)` with `N(λ) = #{eigenvalues ≤ λ}`.
pub fn ssf_counting(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
) -> Result<StepFunction, SsfError> {
    check_dims(d0.dim(), d.dim())?;
    let jumps = d0
        .eigenvalues()
        .iter()
        .map(|&x| (x, 1))
        .chain(d.eigenvalues().iter().map(|&x| (x, -1)))
        .collect();
    Ok(StepFunction::from_jumps(jumps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceFormulaCheck {
    /// `Tr(f(H) - f(H₀))` from the functional calculus.
    pub lhs: Complex64,
    /// `∫ ξ f'` evaluated exactly on the step function.
    pub rhs: Complex64,
    pub residual: f64,
    /// `Σ|f(λ_i)| + Σ|f(μ_i)|`.
    pub scale: f64,
}

impl TraceFormulaCheck {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale.max(crate::spectral::ABS_FLOOR)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol * self.scale.max(crate::spectral::ABS_FLOOR)
    }
}

/// Compares both sides of the trace formula. The left side is the trace of
/// `f(H) - f(H₀)` formed as matrices; the right side integrates `f'`
/// against the counting step function.
pub fn trace_formula_residual(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    f: &ScalarFunction,
) -> Result<TraceFormulaCheck, SsfError> {
    let xi = ssf_counting(d0, d)?;
    let lhs = apply_function(d, f)?.trace() - apply_function(d0, f)?.trace();
    let rhs = xi.integrate_derivative(f);
    let scale = d0
        .eigenvalues()
        .iter()
        .chain(d.eigenvalues())
        .map(|&x| f.eval(x).norm())
        .sum();
    Ok(TraceFormulaCheck {
        lhs,
        rhs,
        residual: (lhs - rhs).norm(),
        scale,
    })
}

/// Builds `φ(H₀)` and `φ(H)` as operators, computes their spectral shift
/// function by counting, and pulls the breakpoints back through `ψ = φ^{-1}`.
pub fn ssf_via_invariance(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    phi: &ChangeOfVariable,
) -> Result<StepFunction, SsfError> {
    check_dims(d0.dim(), d.dim())?;
    if !(phi.lower_slope() > 0.0) {
        return Err(SsfError::NonMonotone {
            min_slope: phi.lower_slope(),
        });
    }
    let f = phi.as_scalar_function();
    let h0 = HermitianOperator::new(apply_function(d0, &f)?)?;
    let h = HermitianOperator::new(apply_function(d, &f)?)?;
    let xi_phi = ssf_counting(&eig_hermitian(&h0), &eig_hermitian(&h))?;
    Ok(xi_phi.map_breakpoints(|b| phi.inverse(b)))
}

/// `(H₀ - z)^{-1}` from a decomposition, without the off-axis check.
fn resolvent(d0: &SpectralDecomposition, z: Complex64) -> CMatrix {
    let diag: Vec<Complex64> = d0
        .eigenvalues()
        .iter()
        .map(|&x| 1.0 / (Complex64::new(x, 0.0) - z))
        .collect();
    conjugate_diagonal(d0.eigenvectors(), &diag)
}

/// `D(z) = det(I + V (H₀ - z)^{-1})`.
pub fn perturbation_determinant(
    d0: &SpectralDecomposition,
    v: &HermitianOperator,
    z: Complex64,
) -> Result<Complex64, SsfError> {
    check_dims(d0.dim(), v.dim())?;
    crate::spectral::check_off_axis(z)?;
    Ok(det_id_plus(&(v.matrix() * resolvent(d0, z)))?)
}

/// `ξ(λ) = π^{-1} lim_{ε→0+} arg D(λ + iε)`, with the argument continued
/// from `λ + 10i·ρ` (ρ the larger spectral radius) and the limit taken by
/// Richardson extrapolation over `schedule` (default: `gap / 2^k`,
/// `k = 1..8`, where `gap` is the distance from λ to both spectra).
pub fn ssf_via_determinant(
    d0: &SpectralDecomposition,
    v: &HermitianOperator,
    lambda: f64,
    schedule: Option<&[f64]>,
) -> Result<PhaseEstimate, SsfError> {
    check_dims(d0.dim(), v.dim())?;
    let h = HermitianOperator::new(d0.reconstruct() + v.matrix())?;
    let d = eig_hermitian(&h);
    let mut gap = f64::INFINITY;
    let mut nearest = f64::NAN;
    for &x in d0.eigenvalues().iter().chain(d.eigenvalues()) {
        let dist = (x - lambda).abs();
        if dist < gap {
            gap = dist;
            nearest = x;
        }
    }
    if gap < JUMP_EXCLUSION {
        return Err(SsfError::JumpPoint {
            lambda,
            eigenvalue: nearest,
            distance: gap,
        });
    }
    let radius = d0.spectral_radius().max(d.spectral_radius()).max(1.0);
    let owned;
    let schedule = match schedule {
        Some(s) => s,
        None => {
            owned = default_schedule(gap.min(radius));
            &owned
        }
    };
    track_phase(
        |z| perturbation_determinant(d0, v, z),
        lambda,
        10.0 * radius,
        schedule,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_low_rank, random_psd, seeded};
    use crate::spectral::max_abs;

    fn diag_pair() -> (SpectralDecomposition, SpectralDecomposition, HermitianOperator) {
        let h0 = HermitianOperator::diagonal(&[0.0, 2.0]);
        let v = HermitianOperator::diagonal(&[1.0, 1.0]);
        let h = h0.add(&v).unwrap();
        (eig_hermitian(&h0), eig_hermitian(&h), v)
    }

    #[test]
    fn unit_shift_counting() {
        let (d0, d, _) = diag_pair();
        let xi = ssf_counting(&d0, &d).unwrap();
        assert_eq!(xi.breakpoints(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(xi.values(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn identical_operators_give_zero() {
        let mut rng = seeded(4, 0);
        let d = eig_hermitian(&random_hermitian(6, &mut rng));
        assert_eq!(ssf_counting(&d, &d).unwrap(), StepFunction::zero());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = eig_hermitian(&HermitianOperator::diagonal(&[0.0]));
        let b = eig_hermitian(&HermitianOperator::diagonal(&[0.0, 1.0]));
        assert!(matches!(ssf_counting(&a, &b), Err(SsfError::DimensionMismatch { .. })));
    }

    #[test]
    fn rank_one_positive_perturbation_interlaces() {
        let mut rng = seeded(8, 0);
        let h0 = random_hermitian(8, &mut rng);
        let v = random_psd(8, 1, 4.0, &mut rng);
        let d0 = eig_hermitian(&h0);
        let d = eig_hermitian(&h0.add(&v).unwrap());
        let xi = ssf_counting(&d0, &d).unwrap();
        // interlacing brute force: λ_i ≤ μ_i ≤ λ_{i+1}
        let (l, m) = (d0.eigenvalues(), d.eigenvalues());
        for i in 0..8 {
            assert!(l[i] <= m[i] + 1e-12);
            if i + 1 < 8 {
                assert!(m[i] <= l[i + 1] + 1e-12);
            }
        }
        // so ξ = 1 exactly on [λ_i, μ_i) and 0 elsewhere
        for i in 0..8 {
            let mid = 0.5 * (l[i] + m[i]);
            assert_eq!(xi.eval(mid), 1);
            if i + 1 < 8 {
                assert_eq!(xi.eval(0.5 * (m[i] + l[i + 1])), 0);
            }
        }
        assert!(xi.values().iter().all(|&v| v == 0 || v == 1));
    }

    #[test]
    fn trace_formula_examples() {
        let (d0, d, _) = diag_pair();
        let chk = trace_formula_residual(&d0, &d, &ScalarFunction::constant(3.0)).unwrap();
        assert_eq!(chk.lhs.norm(), 0.0);
        assert_eq!(chk.rhs.norm(), 0.0);

        let chk = trace_formula_residual(&d0, &d, &ScalarFunction::polynomial(vec![0.0, 0.0, 1.0])).unwrap();
        assert!((chk.lhs.re - 6.0).abs() < 1e-14);
        assert_eq!(chk.rhs.re, 6.0);
        assert!(chk.residual < 1e-14);

        let mut rng = seeded(16, 0);
        let h0 = random_hermitian(16, &mut rng);
        let h = random_hermitian(16, &mut rng);
        let f = ScalarFunction::real(
            |x| (x * x + 1.0).powi(-2),
            |x| -4.0 * x * (x * x + 1.0).powi(-3),
            |x| (20.0 * x * x - 4.0) * (x * x + 1.0).powi(-4),
        );
        let chk = trace_formula_residual(&eig_hermitian(&h0), &eig_hermitian(&h), &f).unwrap();
        assert!(chk.passes(1e-10), "{chk:?}");
    }

    #[test]
    fn invariance_examples() {
        let (d0, d, _) = diag_pair();
        let direct = ssf_counting(&d0, &d).unwrap();
        let via_id = ssf_via_invariance(&d0, &d, &ChangeOfVariable::identity()).unwrap();
        assert!(via_id.matches(&direct, 1e-12));
        let phi = build_phi(3, 5.0).unwrap();
        let via = ssf_via_invariance(&d0, &d, &phi).unwrap();
        assert!(via.matches(&direct, 1e-9), "{via:?}");

        let mut rng = seeded(21, 0);
        let h0 = random_hermitian(8, &mut rng);
        let h = h0.add(&random_low_rank(8, 3, 2.0, &mut rng)).unwrap();
        let (d0, d) = (eig_hermitian(&h0), eig_hermitian(&h));
        let radius = d0.spectral_radius().max(d.spectral_radius());
        let phi = build_phi(3, 2.0 * radius).unwrap();
        let via = ssf_via_invariance(&d0, &d, &phi).unwrap();
        assert!(via.matches(&ssf_counting(&d0, &d).unwrap(), 1e-9));
    }

    #[test]
    fn determinant_examples() {
        let mut rng = seeded(30, 0);
        let h0 = random_hermitian(6, &mut rng);
        let d0 = eig_hermitian(&h0);
        let zero = HermitianOperator::new(CMatrix::zeros(6, 6)).unwrap();
        let z = Complex64::new(0.3, 1.1);
        assert_eq!(perturbation_determinant(&d0, &zero, z).unwrap(), Complex64::new(1.0, 0.0));

        let one = eig_hermitian(&HermitianOperator::diagonal(&[0.0]));
        let v = HermitianOperator::diagonal(&[1.0]);
        let dz = perturbation_determinant(&one, &v, Complex64::i()).unwrap();
        assert!((dz - Complex64::new(1.0, 1.0)).norm() < 1e-15);

        // eigenvalue-product oracle
        let v = random_hermitian(6, &mut rng);
        let d = eig_hermitian(&h0.add(&v).unwrap());
        let num: Complex64 = d.eigenvalues().iter().map(|&m| Complex64::new(m, 0.0) - z).product();
        let den: Complex64 = d0.eigenvalues().iter().map(|&l| Complex64::new(l, 0.0) - z).product();
        let dz = perturbation_determinant(&d0, &v, z).unwrap();
        assert!((dz - num / den).norm() <= 1e-9 * dz.norm());

        assert!(matches!(
            perturbation_determinant(&d0, &v, Complex64::new(1.0, 0.0)),
            Err(SsfError::Spectral(SpectralError::RealSpectralParameter { .. }))
        ));
    }

    #[test]
    fn determinant_route_examples() {
        let mut rng = seeded(31, 0);
        let d0 = eig_hermitian(&random_hermitian(5, &mut rng));
        let zero = HermitianOperator::new(CMatrix::zeros(5, 5)).unwrap();
        let lam = 0.5 * (d0.eigenvalues()[1] + d0.eigenvalues()[2]);
        let est = ssf_via_determinant(&d0, &zero, lam, None).unwrap();
        assert!(est.value.abs() < 1e-12);

        let (d0, _, v) = diag_pair();
        let est = ssf_via_determinant(&d0, &v, 0.5, None).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{est:?}");

        assert!(matches!(
            ssf_via_determinant(&d0, &v, 1.0 + 1e-8, None),
            Err(SsfError::JumpPoint { .. })
        ));
    }

    #[test]
    fn determinant_route_matches_counting_for_rank_two() {
        let mut rng = seeded(32, 0);
        let h0 = random_hermitian(8, &mut rng);
        let v = random_low_rank(8, 2, 3.0, &mut rng);
        let d0 = eig_hermitian(&h0);
        let d = eig_hermitian(&h0.add(&v).unwrap());
        let xi = ssf_counting(&d0, &d).unwrap();
        let mut all: Vec<f64> = d0.eigenvalues().iter().chain(d.eigenvalues()).copied().collect();
        all.sort_by(f64::total_cmp);
        for w in all.windows(2) {
            if w[1] - w[0] < 1e-4 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let est = ssf_via_determinant(&d0, &v, mid, None).unwrap();
            assert!((est.value - xi.eval(mid) as f64).abs() < 1e-6, "at {mid}: {} vs {}", est.value, xi.eval(mid));
        }
    }

    #[test]
    fn chain_rule_is_exact() {
        let mut rng = seeded(33, 0);
        let ds: Vec<_> = (0..3).map(|_| eig_hermitian(&random_hermitian(7, &mut rng))).collect();
        let direct = ssf_counting(&ds[0], &ds[2]).unwrap();
        let chained = ssf_counting(&ds[1], &ds[2]).unwrap().add(&ssf_counting(&ds[0], &ds[1]).unwrap());
        assert_eq!(direct, chained);
    }

    #[test]
    fn rank_and_sign_bounds() {
        for seed in 0..20 {
            let mut rng = seeded(seed, 7);
            let h0 = random_hermitian(10, &mut rng);
            let v = random_psd(10, 2, 5.0, &mut rng);
            let xi = ssf_counting(&eig_hermitian(&h0), &eig_hermitian(&h0.add(&v).unwrap())).unwrap();
            assert!(xi.min_value() >= 0);
            assert!(xi.sup_abs() <= 2);
            let w = random_low_rank(10, 3, 5.0, &mut rng);
            let xi = ssf_counting(&eig_hermitian(&h0), &eig_hermitian(&h0.add(&w).unwrap())).unwrap();
            assert!(xi.sup_abs() <= 3);
        }
        let _ = max_abs(&CMatrix::zeros(1, 1));
    }
}
