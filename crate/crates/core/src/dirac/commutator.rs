use num_complex::Complex64;
use serde::Serialize;

use super::lattice::{build_h00, scale_cols, scale_rows, weight_operator, LatticeModel, LatticeSummary};
use super::potential::MatrixPotential;
use super::schatten::{RefinementLevel, RefinementPlan, RefinementTrend};
use super::DiracError;
use crate::spectral::{
    check_off_axis, eig_hermitian, inverse, max_abs, resolvent_power, schatten_norm_of, CMatrix,
    HermitianOperator,
};

/// `[H₀₀, diag(w)]`.
pub fn weight_commutator(h00: &CMatrix, w: &[f64]) -> CMatrix {
    scale_cols(h00, w) - scale_rows(h00, w)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorIdentityCheck {
    pub lattice: LatticeSummary,
    pub r: f64,
    pub k: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    /// `max |⟨x⟩^{-r}R^{k+1} - R⟨x⟩^{-r}R^k - R[H₀₀,⟨x⟩^{-r}]R^{k+1}|`.
    pub residual: f64,
    pub scale: f64,
    /// `max |C + C*|` for `C = [H₀₀, ⟨x⟩^{-r}]`.
    pub anti_hermitian_defect: f64,
    /// `max |(R⟨x⟩^{-r₀})(⟨x⟩^{-kr₀}R^k) - R⟨x⟩^{-r}R^k|`, `r₀ = r/(k+1)`.
    pub splitting_residual: f64,
    pub pass: bool,
}

/// Tolerance (relative to `scale`) for the commutator identity.
pub const COMMUTATOR_TOL: f64 = 1e-10;

/// The left side uses the eigendecomposition of `H`, the right side an LU
/// resolvent. The identity is exact because `V₀`, `V` and the weight all act
/// sitewise with the weight a scalar on each site.
pub fn commutator_identity_residual(
    model: &LatticeModel,
    v0: &MatrixPotential,
    v: &MatrixPotential,
    r: f64,
    k: u32,
    z: Complex64,
) -> Result<CommutatorIdentityCheck, DiracError> {
    check_off_axis(z)?;
    let h00 = build_h00(model)?;
    let h = HermitianOperator::new(h00.matrix() + v0.operator(model)? + v.operator(model)?)?;
    let n = h.dim();
    let w = weight_operator(model, r)?;
    let lhs = scale_rows(&resolvent_power(&eig_hermitian(&h), z, k + 1)?, &w);
    let res = inverse(&(h.matrix() - CMatrix::identity(n, n) * z)).ok_or(DiracError::Singular)?;
    let mut rk = CMatrix::identity(n, n);
    for _ in 0..k {
        rk = &rk * &res;
    }
    let rk1 = &rk * &res;
    let comm = weight_commutator(h00.matrix(), &w);
    let first = &res * scale_rows(&rk, &w);
    let second = &res * &comm * &rk1;
    let residual = max_abs(&(&lhs - &first - &second));
    let scale = max_abs(&lhs) + max_abs(&first) + max_abs(&second);

    let r0 = r / (k as f64 + 1.0);
    let w0 = weight_operator(model, r0)?;
    let wk = weight_operator(model, k as f64 * r0)?;
    let split = scale_cols(&res, &w0) * scale_rows(&rk, &wk);
    let splitting_residual = max_abs(&(split - scale_cols(&res, &w) * &rk));

    Ok(CommutatorIdentityCheck {
        lattice: model.summary(),
        r,
        k,
        z,
        residual,
        scale,
        anti_hermitian_defect: max_abs(&(&comm + comm.adjoint())),
        splitting_residual,
        pass: residual <= COMMUTATOR_TOL * scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub radius: f64,
    /// Largest column norm of `[H₀₀, ⟨x⟩^{-r}]` over the sites at this radius.
    pub raw: f64,
    /// The same for `⟨x⟩^{r+1}[H₀₀, ⟨x⟩^{-r}]`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorDecayReport {
    pub lattice: LatticeSummary,
    pub r: f64,
    pub profile: Vec<ProfilePoint>,
    /// `max` of the weighted profile.
    pub sup_constant: f64,
    /// Operator norm of `⟨x⟩^{r+1}[H₀₀, ⟨x⟩^{-r}]`.
    pub weighted_operator_norm: f64,
    /// Fitted `s` in `raw ~ ⟨x⟩^{-s}` over `|x| ≥ 1`; the continuum value is
    /// `r + 1`.
    pub raw_decay_exponent: f64,
    /// Raw profile at the largest radius is below its value at the origin.
    pub raw_decays: bool,
}

pub fn commutator_decay_report(model: &LatticeModel, r: f64) -> Result<CommutatorDecayReport, DiracError> {
    let h00 = build_h00(model)?;
    let w = weight_operator(model, r)?;
    let comm = weight_commutator(h00.matrix(), &w);
    let lift: Vec<f64> = model.bracket().iter().map(|b| b.powf(r + 1.0)).collect();
    let weighted = scale_rows(&comm, &lift);
    let s = model.spinor_dim();
    let col_norm = |m: &CMatrix, site: usize| {
        (0..s).map(|a| m.column(site * s + a).norm()).fold(0.0, f64::max)
    };
    let mut points: Vec<ProfilePoint> = (0..model.sites())
        .map(|site| ProfilePoint {
            radius: model.radius(site),
            raw: col_norm(&comm, site),
            weighted: col_norm(&weighted, site),
        })
        .collect();
    points.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let mut profile: Vec<ProfilePoint> = Vec::new();
    for p in points {
        match profile.last_mut() {
            Some(q) if (p.radius - q.radius).abs() <= 1e-12 * p.radius.max(1.0) => {
                q.raw = q.raw.max(p.raw);
                q.weighted = q.weighted.max(p.weighted);
            }
            _ => profile.push(p),
        }
    }
    let sup_constant = profile.iter().map(|p| p.weighted).fold(0.0, f64::max);
    let fit: Vec<(f64, f64)> = profile
        .iter()
        .filter(|p| p.radius >= 1.0 && p.raw > 0.0)
        .map(|p| ((1.0 + p.radius * p.radius).sqrt().ln(), p.raw.ln()))
        .collect();
    let raw_decay_exponent = if fit.len() >= 2 {
        let n = fit.len() as f64;
        let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
        let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    let raw_decays = match (profile.first(), profile.last()) {
        (Some(a), Some(b)) => b.raw < a.raw,
        _ => false,
    };
    Ok(CommutatorDecayReport {
        lattice: model.summary(),
        r,
        sup_constant,
        weighted_operator_norm: schatten_norm_of(&weighted, f64::INFINITY)?,
        raw_decay_exponent,
        raw_decays,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommutatorRefinement {
    pub r: f64,
    pub sup_constant: RefinementTrend,
    pub operator_norm: RefinementTrend,
    /// Both the sup constant and the operator norm change by at most `tol`
    /// between the last two levels.
    pub bounded_uniformly: bool,
}

pub fn commutator_decay_refinement(plan: &RefinementPlan, r: f64, tol: f64) -> Result<CommutatorRefinement, DiracError> {
    let mut sup = Vec::new();
    let mut op = Vec::new();
    for m in plan.models()? {
        let rep = commutator_decay_report(&m, r)?;
        sup.push(RefinementLevel { n: m.n(), h: m.h(), value: rep.sup_constant });
        op.push(RefinementLevel { n: m.n(), h: m.h(), value: rep.weighted_operator_norm });
    }
    let sup_constant = RefinementTrend::new(sup, tol);
    let operator_norm = RefinementTrend::new(op, tol);
    Ok(CommutatorRefinement {
        r,
        bounded_uniformly: sup_constant.stabilized && operator_norm.stabilized,
        sup_constant,
        operator_norm,
    })
}
