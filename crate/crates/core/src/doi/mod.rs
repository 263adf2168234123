//! Double operator integrals for the pair `(H₀, H)` with the resolvent-power
//! denominator `g(λ) = (λ - z)^{-m}`.
//!
//! In finite dimensions the transformer is a Hadamard multiplier in the two
//! eigenbases, so every identity here can be checked exactly against the
//! functional calculus. The continuous bounds (lower bounds on `p`, kernel
//! boundedness and derivative decay) are sampled on grids with a resolution
//! correction.

mod kernel;
mod poly;
mod report;
mod transform;

use num_complex::Complex64;
use serde::Serializer;
use thiserror::Error;

use crate::spectral::SpectralError;
use crate::ssf::SsfError;

pub use kernel::{
    default_band, divided_difference, divided_difference_dlambda, resolvent_g, DoiKernel,
    KernelMode, DENOMINATOR_FLOOR,
};
pub use poly::{
    certificate_threshold, p_lower_bound_cert, sigma_roots, LowerBoundCertificate, PPolynomial,
    Region, ThresholdReport,
};
pub use report::{bs_hypotheses_report, symmetric_grid, BsReport, RegionStats, LIMIT_TOL};
pub use transform::{
    cutoff_theta, doi_apply, doi_identity_residual, kernel_matrix, tail_function,
    theorem_rm_decomposition_check, DecompositionCheck, DoiIdentityCheck, FnKernel, Kernel,
    COINCIDENCE_TOL, COLLISION_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DoiError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ssf(#[from] SsfError),
    #[error("order m = {m} must be odd")]
    InvalidOrder { m: u32 },
    #[error("grid needs at least 3 nodes per axis, got {grid_n}")]
    InvalidGrid { grid_n: usize },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("g(λ) - g(μ) is negligible at (λ, μ) = ({lambda}, {mu}): |Δg| = {denominator:e}")]
    NearDegenerateDenominator { lambda: f64, mu: f64, denominator: f64 },
    #[error("antidiagonal collision: g(λ) = g(μ) with λ = {lambda} ≠ μ = {mu} (|p| = {p_abs:e})")]
    AntidiagonalCollision { lambda: f64, mu: f64, p_abs: f64 },
}

/// Complex numbers serialize as `[re, im]`.
pub(crate) fn ser_complex<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}
