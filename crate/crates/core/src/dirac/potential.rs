use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::lattice::LatticeModel;
use super::DiracError;
use crate::random::{random_hermitian, seeded};
use crate::spectral::{max_abs, singular_values, CMatrix, MatrixJson, HERMITIAN_TOL};

/// Declared bound `‖V(x)‖ ≤ C(1 + |x|)^{-ρ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub c: f64,
    pub rho: f64,
}

impl DecayBound {
    pub fn envelope(&self, radius: f64) -> f64 {
        self.c * (1.0 + radius).powf(-self.rho)
    }
}

/// A Hermitian `spinor_dim × spinor_dim` matrix at every lattice site.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPotential {
    spinor_dim: usize,
    sites: Vec<CMatrix>,
    decay: Option<DecayBound>,
}

/// Sitewise comparison with the declared envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayCheck {
    pub c: f64,
    pub rho: f64,
    /// `max_x ‖V(x)‖ / (C(1 + |x|)^{-ρ})`.
    pub max_ratio: f64,
    pub worst_radius: f64,
    pub pass: bool,
}

impl MatrixPotential {
    pub fn new(spinor_dim: usize, sites: Vec<CMatrix>, decay: Option<DecayBound>) -> Result<Self, DiracError> {
        for (i, v) in sites.iter().enumerate() {
            if v.nrows() != spinor_dim || v.ncols() != spinor_dim {
                return Err(DiracError::InvalidPotential(format!(
                    "site {i}: expected {spinor_dim}x{spinor_dim}, got {}x{}",
                    v.nrows(),
                    v.ncols()
                )));
            }
            if v.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(DiracError::InvalidPotential(format!("site {i}: non-finite entry")));
            }
            let asym = max_abs(&(v - v.adjoint()));
            if asym > HERMITIAN_TOL * max_abs(v).max(1.0) {
                return Err(DiracError::InvalidPotential(format!(
                    "site {i}: not Hermitian (asymmetry {asym:e})"
                )));
            }
        }
        if let Some(b) = decay {
            if !(b.c.is_finite() && b.c >= 0.0 && b.rho.is_finite() && b.rho >= 0.0) {
                return Err(DiracError::InvalidPotential(format!(
                    "decay bound needs C ≥ 0 and ρ ≥ 0, got C = {}, ρ = {}",
                    b.c, b.rho
                )));
            }
        }
        Ok(Self { spinor_dim, sites, decay })
    }

    pub fn zero(model: &LatticeModel) -> Self {
        let s = model.spinor_dim();
        Self {
            spinor_dim: s,
            sites: vec![CMatrix::zeros(s, s); model.sites()],
            decay: None,
        }
    }

    pub fn sites(&self) -> &[CMatrix] {
        &self.sites
    }

    pub fn decay(&self) -> Option<DecayBound> {
        self.decay
    }

    pub fn is_zero(&self) -> bool {
        self.sites.iter().all(|v| v.iter().all(|c| *c == Complex64::new(0.0, 0.0)))
    }

    fn check_model(&self, model: &LatticeModel) -> Result<(), DiracError> {
        if self.spinor_dim != model.spinor_dim() || self.sites.len() != model.sites() {
            return Err(DiracError::InvalidPotential(format!(
                "potential has {} sites of size {}, lattice has {} sites of size {}",
                self.sites.len(),
                self.spinor_dim,
                model.sites(),
                model.spinor_dim()
            )));
        }
        Ok(())
    }

    /// Block-diagonal matrix acting on the lattice.
    pub fn operator(&self, model: &LatticeModel) -> Result<CMatrix, DiracError> {
        self.check_model(model)?;
        let s = self.spinor_dim;
        let mut out = CMatrix::zeros(model.total_dim(), model.total_dim());
        for (i, v) in self.sites.iter().enumerate() {
            out.view_mut((i * s, i * s), (s, s)).copy_from(v);
        }
        Ok(out)
    }

    /// Largest sitewise operator norm.
    pub fn sup_norm(&self) -> f64 {
        self.sites.iter().map(site_norm).fold(0.0, f64::max)
    }

    /// `None` when no decay was declared.
    pub fn check_decay(&self, model: &LatticeModel) -> Result<Option<DecayCheck>, DiracError> {
        self.check_model(model)?;
        let Some(b) = self.decay else {
            return Ok(None);
        };
        let mut max_ratio = 0.0f64;
        let mut worst_radius = 0.0;
        for (i, v) in self.sites.iter().enumerate() {
            let r = model.radius(i);
            let norm = site_norm(v);
            let env = b.envelope(r);
            let ratio = if norm == 0.0 { 0.0 } else if env == 0.0 { f64::INFINITY } else { norm / env };
            if ratio > max_ratio {
                max_ratio = ratio;
                worst_radius = r;
            }
        }
        Ok(Some(DecayCheck {
            c: b.c,
            rho: b.rho,
            max_ratio,
            worst_radius,
            pass: max_ratio <= 1.0 + 1e-12,
        }))
    }
}

fn site_norm(v: &CMatrix) -> f64 {
    singular_values(v).map(|p| p.largest()).unwrap_or(f64::INFINITY)
}

/// Potential generators. Scalar profiles multiply the identity matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Zero,
    /// `amplitude · (1 - (|x|/radius)²)³` inside the ball, zero outside.
    CompactBump { amplitude: f64, radius: f64 },
    /// `C(1 + |x|)^{-ρ}`, declared decaying with the same `(C, ρ)`.
    PowerLaw { c: f64, rho: f64 },
    /// A random Hermitian matrix at each site with norm
    /// `u·C(1 + |x|)^{-ρ}`, `u ∈ [1/2, 1]`. Site `i` draws from stream `i`
    /// of `seed`, so values do not depend on evaluation order.
    RandomDecaying { c: f64, rho: f64, seed: u64 },
    /// Sitewise matrices in basis order.
    Explicit {
        sites: Vec<MatrixJson>,
        #[serde(default)]
        decay: Option<DecayBound>,
    },
}

impl PotentialSpec {
    pub fn build(&self, model: &LatticeModel) -> Result<MatrixPotential, DiracError> {
        let s = model.spinor_dim();
        let id = CMatrix::identity(s, s);
        let scalar = |f: &dyn Fn(f64) -> f64| -> Vec<CMatrix> {
            (0..model.sites()).map(|i| id.scale(f(model.radius(i)))).collect()
        };
        match self {
            PotentialSpec::Zero => Ok(MatrixPotential::zero(model)),
            PotentialSpec::CompactBump { amplitude, radius } => {
                if !(radius.is_finite() && *radius > 0.0 && amplitude.is_finite()) {
                    return Err(DiracError::InvalidPotential(format!(
                        "compact bump needs a finite amplitude and radius > 0, got {amplitude}, {radius}"
                    )));
                }
                let sites = scalar(&|r| {
                    let t = r / radius;
                    if t < 1.0 { amplitude * (1.0 - t * t).powi(3) } else { 0.0 }
                });
                MatrixPotential::new(s, sites, None)
            }
            PotentialSpec::PowerLaw { c, rho } => {
                let b = DecayBound { c: *c, rho: *rho };
                MatrixPotential::new(s, scalar(&|r| b.envelope(r)), Some(b))
            }
            PotentialSpec::RandomDecaying { c, rho, seed } => {
                let b = DecayBound { c: *c, rho: *rho };
                let sites = (0..model.sites())
                    .map(|i| {
                        let mut rng = seeded(*seed, i as u64);
                        let g = random_hermitian(s, &mut rng).into_matrix();
                        let u: f64 = rng.random_range(0.5..=1.0);
                        let n = site_norm(&g);
                        let target = u * b.envelope(model.radius(i));
                        if n > 0.0 { g.scale(target / n) } else { g }
                    })
                    .collect();
                MatrixPotential::new(s, sites, Some(b))
            }
            PotentialSpec::Explicit { sites, decay } => {
                if sites.len() != model.sites() {
                    return Err(DiracError::InvalidPotential(format!(
                        "explicit potential lists {} sites, lattice has {}",
                        sites.len(),
                        model.sites()
                    )));
                }
                let mats = sites
                    .iter()
                    .map(|m| m.to_matrix().map_err(DiracError::from))
                    .collect::<Result<Vec<_>, _>>()?;
                MatrixPotential::new(s, mats, *decay)
            }
        }
    }
}
