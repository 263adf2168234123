use num_complex::Complex64;
use serde::Serialize;

use super::kernel::{resolvent_g, DoiKernel, KernelMode};
use super::poly::{check_order, p_value};
use super::DoiError;
use crate::spectral::{
    apply_function, max_abs, schatten_norm_of, CMatrix, ScalarFunction, SpectralDecomposition,
    SpectralError, ABS_FLOOR,
};
use crate::ssf::{build_phi, ChangeOfVariable};

/// Anything that can be sampled as `K(λ, μ)`.
pub trait Kernel {
    fn value(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError>;
}

impl Kernel for DoiKernel {
    fn value(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        self.eval(lambda, mu)
    }
}

/// Wraps a plain closure as an infallible kernel.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64, f64) -> Complex64> Kernel for FnKernel<F> {
    fn value(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        Ok((self.0)(lambda, mu))
    }
}

/// `K_{j,i} = K(λ_i, μ_j)`: rows indexed by the spectrum of `H`, columns by
/// that of `H₀`.
pub fn kernel_matrix<K: Kernel + ?Sized>(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    kernel: &K,
) -> Result<CMatrix, DoiError> {
    let (l, u) = (d0.eigenvalues(), d.eigenvalues());
    let mut k = CMatrix::zeros(u.len(), l.len());
    for (j, &mu) in u.iter().enumerate() {
        for (i, &lambda) in l.iter().enumerate() {
            k[(j, i)] = kernel.value(lambda, mu)?;
        }
    }
    Ok(k)
}

/// The transformer `T ↦ ∬ K(λ, μ) dE(μ) T dE₀(λ)` in eigenbases:
/// `U (Kmat ∘ U* T U₀) U₀*`.
pub fn doi_apply<K: Kernel + ?Sized>(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    kernel: &K,
    t: &CMatrix,
) -> Result<CMatrix, DoiError> {
    let kmat = kernel_matrix(d0, d, kernel)?;
    hadamard_transform(d0, d, &kmat, t)
}

pub(crate) fn hadamard_transform(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    kmat: &CMatrix,
    t: &CMatrix,
) -> Result<CMatrix, DoiError> {
    if t.nrows() != d.dim() {
        return Err(SpectralError::DimensionMismatch { left: t.nrows(), right: d.dim() }.into());
    }
    if t.ncols() != d0.dim() {
        return Err(SpectralError::DimensionMismatch { left: t.ncols(), right: d0.dim() }.into());
    }
    let (u0, u) = (d0.eigenvectors(), d.eigenvectors());
    let inner = u.adjoint() * t * u0;
    Ok(u * inner.component_mul(kmat) * u0.adjoint())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoiIdentityCheck {
    pub m: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    /// `‖f(H) - f(H₀) - Φ(T)‖_∞` (largest entry).
    pub residual: f64,
    /// `max_i |f(λ_i)| + max_j |f(μ_j)|`.
    pub scale: f64,
    /// `‖T‖_1`.
    pub t_trace_norm: f64,
    /// Pairs treated as coincident (kernel set to `f'/g'`).
    pub coincident_pairs: usize,
}

impl DoiIdentityCheck {
    pub fn relative(&self) -> f64 {
        self.residual / self.scale.max(ABS_FLOOR)
    }
}

/// Relative size of `|p(λ_i, μ_j; z)|` against `(|λ_i-z| + |μ_j-z|)^{m-1}`
/// below which a pair counts as an antidiagonal collision.
pub const COLLISION_TOL: f64 = 1e-6;
/// Relative distance below which `λ_i` and `μ_j` count as the same point.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Checks `f(H) - f(H₀) = Φ(T)` with kernel `(f(λ)-f(μ))/(g(λ)-g(μ))`,
/// `g(λ) = (λ-z)^{-m}` and `T = g(H) - g(H₀)`.
///
/// Pairs with `g(λ_i) = g(μ_j)` but `λ_i ≠ μ_j` make the representation
/// meaningless and are reported as [`DoiError::AntidiagonalCollision`].
pub fn doi_identity_residual(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    f: &ScalarFunction,
    m: u32,
    z: Complex64,
) -> Result<DoiIdentityCheck, DoiError> {
    if d0.dim() != d.dim() {
        return Err(SpectralError::DimensionMismatch { left: d0.dim(), right: d.dim() }.into());
    }
    check_order(m)?;
    let kernel = DoiKernel::new(f.clone(), m, z, KernelMode::Factored)?;
    let g = resolvent_g(m, z);
    let mut coincident_pairs = 0;
    let (l, u) = (d0.eigenvalues(), d.eigenvalues());
    let mut kmat = CMatrix::zeros(u.len(), l.len());
    for (j, &mu) in u.iter().enumerate() {
        for (i, &lambda) in l.iter().enumerate() {
            let reach = (lambda - z).norm() + (mu - z).norm();
            if (lambda - mu).abs() <= COINCIDENCE_TOL * reach {
                coincident_pairs += 1;
                kmat[(j, i)] = f.deriv(lambda) / g.deriv(lambda);
                continue;
            }
            let p = p_value(m, z, lambda, mu);
            if p.norm() < COLLISION_TOL * reach.powi(m as i32 - 1) {
                return Err(DoiError::AntidiagonalCollision {
                    lambda,
                    mu,
                    p_abs: p.norm(),
                });
            }
            kmat[(j, i)] = kernel.eval(lambda, mu)?;
        }
    }
    let t = apply_function(d, &g)? - apply_function(d0, &g)?;
    let lhs = apply_function(d, f)? - apply_function(d0, f)?;
    let rhs = hadamard_transform(d0, d, &kmat, &t)?;
    let peak = |xs: &[f64]| xs.iter().map(|&x| f.eval(x).norm()).fold(0.0, f64::max);
    Ok(DoiIdentityCheck {
        m,
        z,
        residual: max_abs(&(lhs - rhs)),
        scale: peak(l) + peak(u),
        t_trace_norm: schatten_norm_of(&t, 1.0)?,
        coincident_pairs,
    })
}

/// `S(t) = 6t⁵ - 15t⁴ + 10t³` on `[0, 1]`, clamped outside.
fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = t * t;
        (
            t2 * t * (10.0 + t * (6.0 * t - 15.0)),
            30.0 * t2 * (t - 1.0).powi(2),
            60.0 * t * (t - 1.0) * (2.0 * t - 1.0),
        )
    }
}

/// `θ(λ) = S((|λ| - r)/r)`: zero on `[-r, r]`, one off `[-2r, 2r]`, `C²`.
pub fn cutoff_theta(r: f64) -> ScalarFunction {
    let eval = move |x: f64, order: u8| {
        let (s, ds, d2s) = smoothstep((x.abs() - r) / r);
        match order {
            0 => s,
            1 => x.signum() * ds / r,
            _ => d2s / (r * r),
        }
    };
    ScalarFunction::real(move |x| eval(x, 0), move |x| eval(x, 1), move |x| eval(x, 2))
}

/// `θ(λ) (λ^m - i)^{-1}`.
pub fn tail_function(m: u32, r: f64) -> ScalarFunction {
    let power = ScalarFunction::polynomial({
        let mut c = vec![0.0; m as usize + 1];
        c[m as usize] = 1.0;
        c
    });
    cutoff_theta(r).mul(&ScalarFunction::resolvent_power(Complex64::i(), 1).compose(&power))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionCheck {
    pub m: u32,
    pub r: f64,
    /// `‖(φ(H)-i)^{-1} - (φ(H₀)-i)^{-1} - (f₀-term) - (f-term)‖_∞`.
    pub residual: f64,
    pub lhs_trace_norm: f64,
    pub compact_term_trace_norm: f64,
    pub tail_term_trace_norm: f64,
}

/// Splits `(φ(H)-i)^{-1} - (φ(H₀)-i)^{-1}` into the compactly supported
/// part `f₀ = (1-θ)(φ-i)^{-1}` and the tail `f = θ(λ^m-i)^{-1}`. The change
/// of variables is built with cutoff `R = r`, so that `φ = λ^m` wherever
/// `θ ≠ 0` and the split is exact.
pub fn theorem_rm_decomposition_check(
    d0: &SpectralDecomposition,
    d: &SpectralDecomposition,
    m: u32,
    r: f64,
) -> Result<DecompositionCheck, DoiError> {
    let phi: ChangeOfVariable = build_phi(m, r)?;
    let theta = cutoff_theta(r);
    let resolvent = phi.shifted_resolvent();
    let one_minus_theta = ScalarFunction::constant(1.0).add(&theta.scale(Complex64::new(-1.0, 0.0)));
    let f0 = one_minus_theta.mul(&resolvent);
    let f = tail_function(m, r);
    let diff = |h: &ScalarFunction| -> Result<CMatrix, DoiError> {
        Ok(apply_function(d, h)? - apply_function(d0, h)?)
    };
    let lhs = diff(&resolvent)?;
    let compact = diff(&f0)?;
    let tail = diff(&f)?;
    Ok(DecompositionCheck {
        m,
        r,
        residual: max_abs(&(&lhs - &compact - &tail)),
        lhs_trace_norm: schatten_norm_of(&lhs, 1.0)?,
        compact_term_trace_norm: schatten_norm_of(&compact, 1.0)?,
        tail_term_trace_norm: schatten_norm_of(&tail, 1.0)?,
    })
}
