use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrices::{diagonalize_symbol, free_symbol, symbol_energy, DiracMatrices};
use super::DiracError;
use crate::spectral::{check_off_axis, conjugate_diagonal, CMatrix, HermitianOperator};

/// A periodic lattice `{h·n : n ∈ [-N/2, N/2-1]^d}` carrying `spinor_dim`
/// components per site. Basis index = `site · spinor_dim + component`, with
/// the first axis varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    d: usize,
    n: usize,
    h: f64,
    mass: f64,
    matrices: DiracMatrices,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeSummary {
    pub d: usize,
    pub n: usize,
    pub h: f64,
    pub mass: f64,
    pub total_dim: usize,
}

impl LatticeModel {
    pub fn new(d: usize, n: usize, h: f64, mass: f64) -> Result<Self, DiracError> {
        let matrices = DiracMatrices::new(d)?;
        if n < 2 || n % 2 != 0 {
            return Err(DiracError::InvalidLattice(format!("N = {n} must be even and at least 2")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(DiracError::InvalidLattice(format!("spacing h = {h} must be positive")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(DiracError::InvalidLattice(format!("mass = {mass} must be positive")));
        }
        Ok(Self { d, n, h, mass, matrices })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn matrices(&self) -> &DiracMatrices {
        &self.matrices
    }

    pub fn spinor_dim(&self) -> usize {
        self.matrices.spinor_dim()
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.sites() * self.spinor_dim()
    }

    pub fn summary(&self) -> LatticeSummary {
        LatticeSummary {
            d: self.d,
            n: self.n,
            h: self.h,
            mass: self.mass,
            total_dim: self.total_dim(),
        }
    }

    /// Integer coordinates of a site, each in `[-N/2, N/2-1]`.
    pub fn site_coords(&self, site: usize) -> Vec<i64> {
        let n = self.n;
        let mut rest = site;
        let mut out = vec![0i64; self.d];
        for a in (0..self.d).rev() {
            out[a] = (rest % n) as i64 - (n / 2) as i64;
            rest /= n;
        }
        out
    }

    pub fn position(&self, site: usize) -> Vec<f64> {
        self.site_coords(site).iter().map(|&c| c as f64 * self.h).collect()
    }

    /// Distance to the origin on the torus. With sites centred on the origin
    /// this is just `h·|n|`.
    pub fn radius(&self, site: usize) -> f64 {
        self.position(site).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `ξ = 2πk/(Nh)` for the momentum with integer label `k` at `index`.
    pub fn momentum(&self, index: usize) -> Vec<f64> {
        let scale = 2.0 * PI / (self.n as f64 * self.h);
        self.site_coords(index).iter().map(|&k| k as f64 * scale).collect()
    }

    /// Largest grid `|ξ|` per axis, attained at `k = -N/2`.
    pub fn xi_max(&self) -> f64 {
        PI / self.h
    }

    /// `(F* M F)(x, y) = N^{-d} Σ_ξ e^{iξ·(x-y)} M(ξ)`, assembled through
    /// the displacement kernel so that each block is one sum over momenta.
    pub fn circulant<F>(&self, symbol: F) -> Result<CMatrix, DiracError>
    where
        F: Fn(&[f64]) -> Result<CMatrix, DiracError> + Sync,
    {
        let (n, d, s) = (self.n, self.d, self.spinor_dim());
        let sites = self.sites();
        let symbols: Vec<CMatrix> = (0..sites)
            .into_par_iter()
            .map(|k| symbol(&self.momentum(k)))
            .collect::<Result<_, _>>()?;
        let labels: Vec<Vec<i64>> = (0..sites).map(|k| self.site_coords(k)).collect();
        let phases: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
            .collect();
        let norm = 1.0 / sites as f64;
        // Displacement δ is stored with each component reduced into [0, N).
        let kernel: Vec<CMatrix> = (0..sites)
            .into_par_iter()
            .map(|delta| {
                let mut dcoords = vec![0usize; d];
                let mut rest = delta;
                for a in (0..d).rev() {
                    dcoords[a] = rest % n;
                    rest /= n;
                }
                let mut acc = CMatrix::zeros(s, s);
                for (sym, k) in symbols.iter().zip(&labels) {
                    let mut idx: i64 = 0;
                    for a in 0..d {
                        idx += k[a] * dcoords[a] as i64;
                    }
                    let ph = phases[idx.rem_euclid(n as i64) as usize];
                    acc += sym * ph;
                }
                acc * Complex64::new(norm, 0.0)
            })
            .collect();
        let coords = &labels;
        let mut out = CMatrix::zeros(sites * s, sites * s);
        for x in 0..sites {
            for y in 0..sites {
                let mut delta = 0usize;
                for a in 0..d {
                    delta = delta * n + (coords[x][a] - coords[y][a]).rem_euclid(n as i64) as usize;
                }
                out.view_mut((x * s, y * s), (s, s)).copy_from(&kernel[delta]);
            }
        }
        Ok(out)
    }

    /// Symbol eigenvalues `±(|ξ|² + mass²)^{1/2}` over all grid momenta, each
    /// repeated `spinor_dim/2` times, ascending.
    pub fn symbol_spectrum(&self) -> Vec<f64> {
        let half = self.spinor_dim() / 2;
        let mut out = Vec::with_capacity(self.total_dim());
        for k in 0..self.sites() {
            let e = symbol_energy(self.mass, &self.momentum(k));
            for _ in 0..half {
                out.push(e);
                out.push(-e);
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// `⟨x⟩ = (1 + |x|²)^{1/2}` per basis index.
    pub fn bracket(&self) -> Vec<f64> {
        let s = self.spinor_dim();
        let mut out = Vec::with_capacity(self.total_dim());
        for site in 0..self.sites() {
            let r = self.radius(site);
            let b = (1.0 + r * r).sqrt();
            out.extend(std::iter::repeat_n(b, s));
        }
        out
    }
}

pub fn build_h00(model: &LatticeModel) -> Result<HermitianOperator, DiracError> {
    let m = model.circulant(|xi| free_symbol(model.matrices(), model.mass(), xi))?;
    Ok(HermitianOperator::new(m)?)
}

/// `R₀₀(z)^k = (H₀₀ - z)^{-k}`, built from the symbol `(A(ξ) - z)^{-k}`.
pub fn free_resolvent_power(model: &LatticeModel, z: Complex64, k: u32) -> Result<CMatrix, DiracError> {
    check_off_axis(z)?;
    model.circulant(|xi| {
        let diag = diagonalize_symbol(model.matrices(), model.mass(), xi)?;
        let vals: Vec<Complex64> = diag
            .lambda
            .iter()
            .map(|&l| (Complex64::new(l, 0.0) - z).powi(-(k as i32)))
            .collect();
        Ok(conjugate_diagonal(&diag.t, &vals))
    })
}

/// Diagonal of `⟨x⟩^{-r}` per basis index.
pub fn weight_operator(model: &LatticeModel, r: f64) -> Result<Vec<f64>, DiracError> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(DiracError::InvalidWeight { r });
    }
    Ok(model.bracket().into_iter().map(|b| b.powf(-r)).collect())
}

/// `diag(w) · M`.
pub fn scale_rows(m: &CMatrix, w: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= Complex64::new(w[i], 0.0);
    }
    out
}

/// `M · diag(w)`.
pub fn scale_cols(m: &CMatrix, w: &[f64]) -> CMatrix {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= Complex64::new(w[j], 0.0);
    }
    out
}

/// How the spacing changes along an `N`-refinement, relative to a base
/// `(N_ref, h_ref)`: fixed spacing grows the box, fixed length refines the
/// mesh, and the balanced scheme `h = h_ref·(N_ref/N)^{1/2}` grows both the
/// box and the momentum cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Refinement {
    FixedSpacing,
    FixedLength,
    Balanced,
}

impl Refinement {
    pub fn spacing(self, h_ref: f64, n_ref: usize, n: usize) -> f64 {
        let ratio = n_ref as f64 / n as f64;
        match self {
            Refinement::FixedSpacing => h_ref,
            Refinement::FixedLength => h_ref * ratio,
            Refinement::Balanced => h_ref * ratio.sqrt(),
        }
    }

    pub fn models(
        self,
        d: usize,
        ns: &[usize],
        h_ref: f64,
        n_ref: usize,
        mass: f64,
    ) -> Result<Vec<LatticeModel>, DiracError> {
        ns.iter()
            .map(|&n| LatticeModel::new(d, n, self.spacing(h_ref, n_ref, n), mass))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eig_hermitian, max_abs, schatten_norm_of};

    #[test]
    fn rejects_bad_parameters() {
        assert!(LatticeModel::new(1, 7, 0.5, 1.0).is_err());
        assert!(LatticeModel::new(1, 8, 0.0, 1.0).is_err());
        assert!(LatticeModel::new(1, 8, 0.5, -1.0).is_err());
        assert!(LatticeModel::new(5, 8, 0.5, 1.0).is_err());
    }

    #[test]
    fn grids_are_centred() {
        let m = LatticeModel::new(2, 4, 0.5, 1.0).unwrap();
        assert_eq!(m.site_coords(0), vec![-2, -2]);
        assert_eq!(m.site_coords(5), vec![-1, -1]);
        assert_eq!(m.site_coords(15), vec![1, 1]);
        assert_eq!(m.position(10), vec![0.0, 0.0]);
        let xi = m.momentum(0);
        assert!((xi[0] + PI / 0.5).abs() < 1e-15);
        assert_eq!(m.total_dim(), 32);
    }

    #[test]
    fn small_one_dimensional_example() {
        let m = LatticeModel::new(1, 4, 0.7, 1.0).unwrap();
        let h = build_h00(&m).unwrap();
        assert_eq!(h.dim(), 8);
        let eig = eig_hermitian(&h);
        let expect = m.symbol_spectrum();
        for (a, b) in eig.eigenvalues().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-10, "{:?} vs {:?}", eig.eigenvalues(), expect);
        }
    }

    #[test]
    fn spectrum_matches_symbol_in_every_dimension() {
        for (d, n) in [(1, 32), (2, 8), (3, 4)] {
            let m = LatticeModel::new(d, n, 0.6, 1.3).unwrap();
            let h = build_h00(&m).unwrap();
            let eig = eig_hermitian(&h);
            for (a, b) in eig.eigenvalues().iter().zip(m.symbol_spectrum()) {
                assert!((a - b).abs() < 1e-10, "d={d}");
            }
        }
    }

    #[test]
    fn operator_norm_is_symbol_maximum() {
        let m = LatticeModel::new(1, 16, 0.5, 1.0).unwrap();
        let h = build_h00(&m).unwrap();
        let norm = schatten_norm_of(h.matrix(), f64::INFINITY).unwrap();
        let expect = (m.xi_max().powi(2) + 1.0).sqrt();
        assert!((norm - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn h00_is_hermitian_before_symmetrization() {
        let m = LatticeModel::new(1, 32, 0.5, 1.0).unwrap();
        let raw = m.circulant(|xi| free_symbol(m.matrices(), 1.0, xi)).unwrap();
        assert!(max_abs(&(&raw - raw.adjoint())) <= 1e-12 * max_abs(&raw));
    }

    #[test]
    fn free_resolvent_matches_inverse() {
        let m = LatticeModel::new(1, 16, 0.5, 1.0).unwrap();
        let z = Complex64::new(0.3, 1.0);
        let h = build_h00(&m).unwrap();
        let shifted = h.matrix() - CMatrix::identity(32, 32) * z;
        let inv = shifted.try_inverse().unwrap();
        let r2 = free_resolvent_power(&m, z, 2).unwrap();
        assert!(max_abs(&(&inv * &inv - r2)) < 1e-12);
        assert!(free_resolvent_power(&m, Complex64::new(1.0, 0.0), 1).is_err());
    }

    #[test]
    fn weights() {
        let m = LatticeModel::new(1, 8, 1.0, 1.0).unwrap();
        let w = weight_operator(&m, 2.0).unwrap();
        // site n = 0 has index 4, n = 1 has index 5
        assert_eq!(w[8], 1.0);
        assert_eq!(w[9], 1.0);
        assert!((w[10] - 0.5).abs() < 1e-15);
        for n in 0..3 {
            assert!(w[2 * (4 + n)] > w[2 * (5 + n)]);
            assert_eq!(w[2 * (4 + n)], w[2 * (4 - n)]);
        }
        assert!(weight_operator(&m, -1.0).is_err());
        let ones = weight_operator(&m, 0.0).unwrap();
        assert!(ones.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn refinement_spacings() {
        assert_eq!(Refinement::FixedSpacing.spacing(0.5, 128, 256), 0.5);
        assert_eq!(Refinement::FixedLength.spacing(0.5, 128, 256), 0.25);
        assert!((Refinement::Balanced.spacing(0.5, 128, 512) - 0.25).abs() < 1e-15);
    }
}
