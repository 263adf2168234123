//! A one-dimensional lattice scattering model where the scattering matrix and
//! the spectral shift function can both be computed and compared.
//!
//! `h₀` is the nearest-neighbour operator `u(n+1) + u(n-1)` on `ℤ` with band
//! `[-2, 2]`, `λ = 2cos κ`. The perturbation is a real potential supported on
//! `|n| ≤ s`. Plane waves `e^{∓iκn}` move right and left respectively.

mod green;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::random::seeded;
use crate::spectral::{det_id_plus, CMatrix, SpectralError};
use crate::ssf::{track_phase, PhaseEstimate, SsfError};

pub use green::{
    band_momentum, boundary_root, free_green, green_root, truncated_count_below, truncated_green,
};

/// Smallest accepted distance from `±2` for boundary values on the band.
pub const EDGE_MARGIN: f64 = 1e-3;
/// Smallest accepted distance from a discrete eigenvalue off the band.
pub const EIGEN_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("spectral parameter {z} lies on the band [-2, 2]")]
    OnBand { z: Complex64 },
    #[error("λ = {lambda} is within {margin:e} of a band edge or outside the band")]
    NearBandEdge { lambda: f64, margin: f64 },
    #[error("λ = {lambda} is within {distance:e} of the eigenvalue {eigenvalue}")]
    NearEigenvalue { lambda: f64, eigenvalue: f64, distance: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("the Lippmann-Schwinger system is singular at λ = {lambda}")]
    Singular { lambda: f64 },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ssf(#[from] SsfError),
}

/// Potential generators for the lattice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum ScatteringPotential {
    SingleSite { v: f64 },
    /// Values on sites `-s..=s`, so the length must be odd.
    Sites { values: Vec<f64> },
    /// `amplitude · u_n` with `u_n` uniform in `[lo, 1]` on `|n| ≤ half_width`;
    /// `lo = -1` gives mixed signs, a negative amplitude flips them all.
    Random { half_width: usize, amplitude: f64, lo: f64, seed: u64 },
}

impl ScatteringPotential {
    pub fn values(&self) -> Result<Vec<f64>, ScatteringError> {
        match self {
            ScatteringPotential::SingleSite { v } => Ok(vec![*v]),
            ScatteringPotential::Sites { values } => Ok(values.clone()),
            ScatteringPotential::Random { half_width, amplitude, lo, seed } => {
                if !(lo.is_finite() && *lo >= -1.0 && *lo < 1.0) {
                    return Err(ScatteringError::InvalidPotential(format!(
                        "lower end lo = {lo} must lie in [-1, 1)"
                    )));
                }
                let mut rng = seeded(*seed, 0);
                Ok((0..2 * half_width + 1).map(|_| amplitude * rng.random_range(*lo..=1.0)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeScatteringModel {
    values: Vec<f64>,
    half_width: usize,
    truncation: usize,
}

/// Default truncation half-length for the matrix oracles.
pub const DEFAULT_TRUNCATION: usize = 2000;

impl LatticeScatteringModel {
    /// `values` on sites `-s..=s`; `truncation` is the half-length `L` used by
    /// the truncated-matrix oracles and must satisfy `s < L/4`.
    pub fn new(values: Vec<f64>, truncation: usize) -> Result<Self, ScatteringError> {
        if values.len() % 2 == 0 {
            return Err(ScatteringError::InvalidPotential(format!(
                "{} values cannot be centred on the origin",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ScatteringError::InvalidPotential("non-finite value".into()));
        }
        let half_width = values.len() / 2;
        if 4 * half_width >= truncation {
            return Err(ScatteringError::InvalidPotential(format!(
                "support half-width {half_width} must be below L/4 = {}",
                truncation as f64 / 4.0
            )));
        }
        Ok(Self { values, half_width, truncation })
    }

    pub fn from_spec(spec: &ScatteringPotential, truncation: usize) -> Result<Self, ScatteringError> {
        Self::new(spec.values()?, truncation)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `v(n)`, zero off the support.
    pub fn potential(&self, n: i64) -> f64 {
        let s = self.half_width as i64;
        if n.abs() <= s {
            self.values[(n + s) as usize]
        } else {
            0.0
        }
    }

    fn sites(&self) -> impl Iterator<Item = i64> + '_ {
        let s = self.half_width as i64;
        -s..=s
    }

    fn support_len(&self) -> usize {
        self.values.len()
    }

    /// `G(n, m) = r₀(n, m)` restricted to the support, for the root `w`.
    fn green_block(&self, w: Complex64) -> CMatrix {
        let sites: Vec<i64> = self.sites().collect();
        DMatrix::from_fn(sites.len(), sites.len(), |i, j| green::green_from_root(w, sites[i] - sites[j]))
    }

    /// `V G` on the support.
    fn vg(&self, w: Complex64) -> CMatrix {
        let mut m = self.green_block(w);
        for (i, mut row) in m.row_iter_mut().enumerate() {
            row *= Complex64::new(self.values[i], 0.0);
        }
        m
    }

    /// `det(I + V r₀(z))` on the support.
    pub fn perturbation_determinant(&self, z: Complex64) -> Result<Complex64, ScatteringError> {
        Ok(det_id_plus(&self.vg(green_root(z)?))?)
    }

    /// The same determinant at `λ + i0` in closed form.
    pub fn boundary_determinant(&self, lambda: f64) -> Result<Complex64, ScatteringError> {
        check_band(lambda)?;
        Ok(det_id_plus(&self.vg(boundary_root(lambda)))?)
    }

    /// Discrete eigenvalues of the truncated operator outside `[-2, 2]`, by
    /// bisection on Sturm counts. Exact bound states decay geometrically, so
    /// the truncation error is negligible for `s < L/4`.
    pub fn bound_states(&self) -> Vec<f64> {
        let bound = 2.0 + self.values.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        let count = |x: f64| truncated_count_below(self.truncation, |n| self.potential(n), x);
        let mut out = Vec::new();
        for (lo, hi) in [(-bound, -2.0 - 1e-12), (2.0 + 1e-12, bound)] {
            let (c_lo, c_hi) = (count(lo), count(hi));
            for j in c_lo..c_hi {
                // the (j+1)-th eigenvalue: smallest x with count(x) > j
                let (mut a, mut b) = (lo, hi);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if count(mid) > j {
                        b = mid;
                    } else {
                        a = mid;
                    }
                    if b - a < 1e-14 * b.abs().max(1.0) {
                        break;
                    }
                }
                out.push(0.5 * (a + b));
            }
        }
        out
    }
}

fn check_band(lambda: f64) -> Result<(), ScatteringError> {
    if !(lambda.is_finite() && lambda.abs() <= 2.0 - EDGE_MARGIN) {
        return Err(ScatteringError::NearBandEdge { lambda, margin: EDGE_MARGIN });
    }
    Ok(())
}

/// `S = [[t_L, r_R], [r_L, t_R]]`: column one is the wave incoming from the
/// left, column two the wave incoming from the right; rows are the outgoing
/// amplitudes to the right and to the left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMatrix {
    pub t_left: Complex64,
    pub r_left: Complex64,
    pub t_right: Complex64,
    pub r_right: Complex64,
}

impl SMatrix {
    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[self.t_left, self.r_right, self.r_left, self.t_right])
    }

    pub fn det(&self) -> Complex64 {
        self.t_left * self.t_right - self.r_left * self.r_right
    }

    /// `max |S*S - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.matrix();
        crate::spectral::max_abs(&(s.adjoint() * &s - CMatrix::identity(2, 2)))
    }
}

/// Solves `(I + r₀(λ+i0) V)ψ = ψ₀` on the support for both incoming waves
/// and reads the amplitudes off the far field.
pub fn s_matrix(model: &LatticeScatteringModel, lambda: f64) -> Result<SMatrix, ScatteringError> {
    check_band(lambda)?;
    let kappa = band_momentum(lambda);
    let w = boundary_root(lambda);
    let n = model.support_len();
    let sites: Vec<i64> = model.sites().collect();
    let mut a = model.green_block(w);
    for (j, mut col) in a.column_iter_mut().enumerate() {
        col *= Complex64::new(model.values[j], 0.0);
    }
    a += CMatrix::identity(n, n);
    let wave = |sign: f64| -> Vec<Complex64> {
        sites.iter().map(|&m| Complex64::from_polar(1.0, sign * kappa * m as f64)).collect()
    };
    let (right_moving, left_moving) = (wave(-1.0), wave(1.0));
    let mut rhs = CMatrix::zeros(n, 2);
    for i in 0..n {
        rhs[(i, 0)] = right_moving[i];
        rhs[(i, 1)] = left_moving[i];
    }
    let psi = a.lu().solve(&rhs).ok_or(ScatteringError::Singular { lambda })?;
    let coupling = Complex64::new(0.0, 2.0 * kappa.sin()).inv();
    // Σ_m e^{±iκm} v_m ψ_m / (2i sin κ)
    let project = |col: usize, phases: &[Complex64]| -> Complex64 {
        (0..n).map(|m| phases[m].conj() * model.values[m] * psi[(m, col)]).sum::<Complex64>() * coupling
    };
    let one = Complex64::new(1.0, 0.0);
    Ok(SMatrix {
        t_left: one + project(0, &right_moving),
        r_left: project(0, &left_moving),
        t_right: one + project(1, &left_moving),
        r_right: project(1, &right_moving),
    })
}

/// `ε_k = 10^{-2} / 2^k`, `k = 1..=10`.
pub fn default_schedule() -> Vec<f64> {
    (1..=10).map(|k| 1e-2 / 2f64.powi(k)).collect()
}

/// `ξ(λ) = π^{-1} lim arg det(I + V r₀(λ + iε))`, with the argument tracked
/// continuously down from a height where the determinant is close to 1.
/// Points off the band are accepted if they keep clear of bound states.
pub fn ssf_scattering(
    model: &LatticeScatteringModel,
    lambda: f64,
    schedule: Option<&[f64]>,
) -> Result<PhaseEstimate, ScatteringError> {
    if !lambda.is_finite() {
        return Err(ScatteringError::NearBandEdge { lambda, margin: EDGE_MARGIN });
    }
    if lambda.abs() < 2.0 + EDGE_MARGIN {
        check_band(lambda)?;
    } else {
        for e in model.bound_states() {
            let distance = (e - lambda).abs();
            if distance < EIGEN_MARGIN {
                return Err(ScatteringError::NearEigenvalue { lambda, eigenvalue: e, distance });
            }
        }
    }
    let owned;
    let schedule = match schedule {
        Some(s) => s,
        None => {
            owned = default_schedule();
            &owned
        }
    };
    let height = 10.0 * (2.0 + model.values.iter().map(|v| v.abs()).sum::<f64>());
    let est = track_phase(
        |z| model.perturbation_determinant(z).map_err(to_ssf),
        lambda,
        height,
        schedule,
    )?;
    Ok(est)
}

fn to_ssf(e: ScatteringError) -> SsfError {
    match e {
        ScatteringError::Spectral(s) => SsfError::Spectral(s),
        ScatteringError::Ssf(s) => s,
        ScatteringError::OnBand { z } => SsfError::Spectral(SpectralError::RealSpectralParameter { z }),
        other => SsfError::Spectral(SpectralError::Json(other.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BirmanKreinPoint {
    pub lambda: f64,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub det_s: Complex64,
    pub xi: f64,
    /// `|det S - e^{-2πiξ}|`.
    pub residual: f64,
    pub unitarity_defect: f64,
}

/// Both sides of `det S(λ) = e^{-2πiξ(λ)}`, computed independently.
pub fn birman_krein_residual(model: &LatticeScatteringModel, lambda: f64) -> Result<BirmanKreinPoint, ScatteringError> {
    birman_krein_with_schedule(model, lambda, None)
}

pub fn birman_krein_with_schedule(
    model: &LatticeScatteringModel,
    lambda: f64,
    schedule: Option<&[f64]>,
) -> Result<BirmanKreinPoint, ScatteringError> {
    let s = s_matrix(model, lambda)?;
    let xi = ssf_scattering(model, lambda, schedule)?.value;
    let det_s = s.det();
    let phase = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * xi);
    Ok(BirmanKreinPoint {
        lambda,
        det_s,
        xi,
        residual: (det_s - phase).norm(),
        unitarity_defect: s.unitarity_defect(),
    })
}

/// `λ_j = 2cos(πj/(n+1))`, `j = 1..=n`, ascending.
pub fn band_grid(n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (1..=n)
        .map(|j| 2.0 * (std::f64::consts::PI * j as f64 / (n + 1) as f64).cos())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSweep {
    pub points: Vec<BirmanKreinPoint>,
    pub max_residual: f64,
    pub max_unitarity_defect: f64,
    /// Largest `|ξ(λ_{j+1}) - ξ(λ_j)|` on the grid.
    pub max_xi_step: f64,
}

pub fn band_sweep(
    model: &LatticeScatteringModel,
    lambdas: &[f64],
    schedule: Option<&[f64]>,
) -> Result<BandSweep, ScatteringError> {
    use rayon::prelude::*;
    let points = lambdas
        .par_iter()
        .map(|&l| birman_krein_with_schedule(model, l, schedule))
        .collect::<Result<Vec<_>, _>>()?;
    let max_xi_step = points.windows(2).map(|w| (w[1].xi - w[0].xi).abs()).fold(0.0, f64::max);
    Ok(BandSweep {
        max_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        max_unitarity_defect: points.iter().map(|p| p.unitarity_defect).fold(0.0, f64::max),
        max_xi_step,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: f64) -> LatticeScatteringModel {
        LatticeScatteringModel::from_spec(&ScatteringPotential::SingleSite { v }, DEFAULT_TRUNCATION).unwrap()
    }

    fn five_site(seed: u64, amplitude: f64, lo: f64) -> LatticeScatteringModel {
        let spec = ScatteringPotential::Random { half_width: 2, amplitude, lo, seed };
        LatticeScatteringModel::from_spec(&spec, DEFAULT_TRUNCATION).unwrap()
    }

    #[test]
    fn free_model_has_trivial_scattering() {
        let m = single(0.0);
        for l in band_grid(10) {
            let s = s_matrix(&m, l).unwrap();
            assert!(s.unitarity_defect() < 1e-15);
            assert_eq!(s.det(), Complex64::new(1.0, 0.0));
            let p = birman_krein_residual(&m, l).unwrap();
            assert_eq!(p.xi, 0.0);
            assert_eq!(p.residual, 0.0);
        }
    }

    #[test]
    fn single_site_transmission_closed_form() {
        for v in [0.7, -1.3, 2.5] {
            let m = single(v);
            for l in band_grid(25) {
                let s = s_matrix(&m, l).unwrap();
                let r00 = green::green_from_root(boundary_root(l), 0);
                let t = (Complex64::new(1.0, 0.0) + v * r00).inv();
                assert!((s.t_left - t).norm() < 1e-13);
                assert!((s.t_right - t).norm() < 1e-13);
                assert!((s.r_left - (t - 1.0)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn scattering_matrix_is_unitary() {
        for seed in 0..3 {
            let m = five_site(seed, 1.5, -1.0);
            for l in band_grid(50) {
                assert!(s_matrix(&m, l).unwrap().unitarity_defect() <= 1e-8);
            }
        }
    }

    #[test]
    fn birman_krein_single_site() {
        let p = birman_krein_residual(&single(0.7), 0.0).unwrap();
        assert!(p.residual <= 1e-6, "{p:?}");
        assert!(p.xi > 0.0);
        assert!(p.det_s.arg() < 0.0);
    }

    #[test]
    fn birman_krein_five_sites() {
        let m = five_site(4, 1.2, -1.0);
        let sweep = band_sweep(&m, &band_grid(50), None).unwrap();
        assert!(sweep.max_residual <= 1e-5, "{}", sweep.max_residual);
        assert!(sweep.max_unitarity_defect <= 1e-8);
        assert!(sweep.max_xi_step < 0.5);
    }

    #[test]
    fn determinant_phase_is_conjugate_ratio() {
        let m = five_site(2, 0.9, -1.0);
        for l in band_grid(12) {
            let d = m.boundary_determinant(l).unwrap();
            let s = s_matrix(&m, l).unwrap();
            assert!((s.det() - d.conj() / d).norm() < 1e-12);
        }
    }

    #[test]
    fn bound_state_below_band() {
        let v = -1.5;
        let m = single(v);
        let states = m.bound_states();
        assert_eq!(states.len(), 1);
        let exact = -(4.0 + v * v).sqrt();
        assert!((states[0] - exact).abs() < 1e-10);
        let between = ssf_scattering(&m, -2.01, None).unwrap().value;
        assert!((between + 1.0).abs() < 1e-6, "{between}");
        let below = ssf_scattering(&m, -3.0, None).unwrap().value;
        assert!(below.abs() < 1e-6, "{below}");
        // both counting routes agree
        let count = truncated_count_below(m.truncation(), |n| m.potential(n), -2.01);
        assert_eq!(count, 1);
        assert!(matches!(
            ssf_scattering(&m, exact, None),
            Err(ScatteringError::NearEigenvalue { .. })
        ));
    }

    #[test]
    fn extrapolation_is_stable() {
        let m = five_site(7, 1.0, -1.0);
        for l in [-1.2, 0.1, 1.4] {
            let full = default_schedule();
            let a = ssf_scattering(&m, l, Some(&full)).unwrap().value;
            let mut finer = full.clone();
            finer.push(full[full.len() - 1] / 2.0);
            let b = ssf_scattering(&m, l, Some(&finer)).unwrap().value;
            assert!((a - b).abs() <= 1e-7, "{a} {b}");
        }
    }

    #[test]
    fn edges_and_bad_models_are_rejected() {
        let m = single(0.5);
        assert!(s_matrix(&m, 1.9995).is_err());
        assert!(s_matrix(&m, 2.5).is_err());
        assert!(LatticeScatteringModel::new(vec![1.0, 2.0], 100).is_err());
        assert!(LatticeScatteringModel::new(vec![0.0; 51], 100).is_err());
        assert!(LatticeScatteringModel::new(vec![f64::NAN], 100).is_err());
    }
}
