use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lattice::{
    build_h00, free_resolvent_power, scale_cols, scale_rows, weight_operator, LatticeModel,
    LatticeSummary, Refinement,
};
use super::potential::{DecayCheck, MatrixPotential, PotentialSpec};
use super::DiracError;
use crate::spectral::{
    check_off_axis, eig_hermitian, inverse, max_abs, resolvent_power, schatten_norm,
    schatten_norm_of, singular_values, CMatrix, HermitianOperator,
};

/// `p(r, k) = d / min{r, k}`.
pub fn threshold_p(d: usize, r: f64, k: f64) -> f64 {
    d as f64 / r.min(k)
}

/// A sequence of lattices along one refinement scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementPlan {
    pub d: usize,
    pub ns: Vec<usize>,
    pub scheme: Refinement,
    pub h_ref: f64,
    pub n_ref: usize,
    pub mass: f64,
}

impl RefinementPlan {
    pub fn models(&self) -> Result<Vec<LatticeModel>, DiracError> {
        if self.ns.len() < 2 {
            return Err(DiracError::InvalidLattice("a refinement needs at least two levels".into()));
        }
        self.scheme.models(self.d, &self.ns, self.h_ref, self.n_ref, self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchattenNorm {
    pub p: f64,
    pub norm: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSchattenReport {
    pub lattice: LatticeSummary,
    pub r: f64,
    pub k: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    pub threshold_p: f64,
    pub norms: Vec<SchattenNorm>,
    pub operator_norm: f64,
    /// `s` in `s_n ~ n^{-s}`, fitted over the 1-based index window.
    pub decay_exponent: f64,
    pub predicted_exponent: f64,
    pub fit_window: (usize, usize),
    pub decay_relative_error: f64,
    pub decay_pass: bool,
    #[serde(skip)]
    pub singular_values: Vec<f64>,
}

/// Relative tolerance for the fitted decay exponent.
pub const DECAY_FIT_TOL: f64 = 0.15;

fn validate_weight_power(r: f64, k: u32) -> Result<(), DiracError> {
    if !(r.is_finite() && r > 0.0) || k == 0 {
        return Err(DiracError::InvalidExponent(format!("need r > 0 and k ≥ 1, got r = {r}, k = {k}")));
    }
    Ok(())
}

/// Singular values of `⟨x⟩^{-r} R₀₀(z)^k`.
pub fn weighted_singular_values(model: &LatticeModel, r: f64, k: u32, z: Complex64) -> Result<Vec<f64>, DiracError> {
    validate_weight_power(r, k)?;
    let rk = free_resolvent_power(model, z, k)?;
    let w = weight_operator(model, r)?;
    Ok(singular_values(&scale_rows(&rk, &w))?.values().to_vec())
}

/// Least-squares slope of `log s_n` against `log n` over `n ∈ [lo, hi]`,
/// negated; zero singular values are skipped.
pub fn fit_decay_exponent(values: &[f64], window: (usize, usize)) -> f64 {
    let pts: Vec<(f64, f64)> = (window.0..=window.1.min(values.len()))
        .filter(|&n| n >= 1 && values[n - 1] > 0.0)
        .map(|n| ((n as f64).ln(), values[n - 1].ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}

/// Default fit window: indices 5 through `dim/8`, which stays clear of both
/// the few largest values and the momentum-cutoff tail.
pub fn default_fit_window(dim: usize) -> (usize, usize) {
    (5, (dim / 8).max(6))
}

pub fn weighted_resolvent_schatten(
    model: &LatticeModel,
    r: f64,
    k: u32,
    z: Complex64,
    p_list: &[f64],
) -> Result<WeightedSchattenReport, DiracError> {
    check_off_axis(z)?;
    if let Some(&p) = p_list.iter().find(|p| p.is_nan() || **p < 1.0) {
        return Err(DiracError::Spectral(crate::spectral::SpectralError::InvalidSchattenIndex { p }));
    }
    let values = weighted_singular_values(model, r, k, z)?;
    let dim = values.len();
    let profile = crate::spectral::SingularValueProfile::from_values(values.clone(), (dim, dim));
    let threshold = threshold_p(model.d(), r, k as f64);
    let norms = p_list
        .iter()
        .map(|&p| {
            Ok(SchattenNorm {
                p,
                norm: schatten_norm(&profile, p)?,
                above_threshold: p > threshold,
            })
        })
        .collect::<Result<Vec<_>, DiracError>>()?;
    let window = default_fit_window(dim);
    let decay_exponent = fit_decay_exponent(&values, window);
    let predicted = r.min(k as f64) / model.d() as f64;
    let rel = (decay_exponent - predicted).abs() / predicted;
    Ok(WeightedSchattenReport {
        lattice: model.summary(),
        r,
        k,
        z,
        threshold_p: threshold,
        norms,
        operator_norm: profile.largest(),
        decay_exponent,
        predicted_exponent: predicted,
        fit_window: window,
        decay_relative_error: rel,
        decay_pass: rel <= DECAY_FIT_TOL,
        singular_values: values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub h: f64,
    pub value: f64,
}

/// A quantity tracked along a refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTrend {
    pub levels: Vec<RefinementLevel>,
    /// `value_{i+1} - value_i`.
    pub increments: Vec<f64>,
    /// `|v_last / v_prev - 1|`.
    pub last_relative_change: f64,
    pub monotone_increasing: bool,
    /// The last increment is smaller in size than the one before it.
    pub contracting: bool,
    pub tol: f64,
    pub stabilized: bool,
}

impl RefinementTrend {
    pub fn new(levels: Vec<RefinementLevel>, tol: f64) -> Self {
        let increments: Vec<f64> = levels.windows(2).map(|w| w[1].value - w[0].value).collect();
        let n = levels.len();
        let last_relative_change = if n >= 2 {
            (levels[n - 1].value / levels[n - 2].value - 1.0).abs()
        } else {
            f64::NAN
        };
        let contracting = increments.len() >= 2
            && increments[increments.len() - 1].abs() < increments[increments.len() - 2].abs();
        Self {
            monotone_increasing: increments.iter().all(|&d| d > 0.0),
            contracting,
            stabilized: last_relative_change <= tol,
            levels,
            increments,
            last_relative_change,
            tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchattenRefinement {
    pub r: f64,
    pub k: u32,
    pub p: f64,
    pub threshold_p: f64,
    pub scheme: Refinement,
    pub trend: RefinementTrend,
}

/// `‖⟨x⟩^{-r} R₀₀(z)^k‖_p` for every `p` in `p_list` along the plan. The
/// singular values are computed once per level.
pub fn schatten_refinement(
    plan: &RefinementPlan,
    r: f64,
    k: u32,
    z: Complex64,
    p_list: &[f64],
    tol: f64,
) -> Result<Vec<SchattenRefinement>, DiracError> {
    check_off_axis(z)?;
    let models = plan.models()?;
    let mut per_level = Vec::with_capacity(models.len());
    for m in &models {
        let rep = weighted_resolvent_schatten(m, r, k, z, p_list)?;
        per_level.push((m.n(), m.h(), rep.norms));
    }
    Ok(p_list
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let levels = per_level
                .iter()
                .map(|(n, h, norms)| RefinementLevel { n: *n, h: *h, value: norms[i].norm })
                .collect();
            SchattenRefinement {
                r,
                k,
                p,
                threshold_p: threshold_p(plan.d, r, k as f64),
                scheme: plan.scheme,
                trend: RefinementTrend::new(levels, tol),
            }
        })
        .collect())
}

fn check_mpow(mpow: u32) -> Result<(), DiracError> {
    if mpow == 0 || mpow % 2 == 0 {
        return Err(DiracError::InvalidPower { mpow });
    }
    Ok(())
}

struct Pair {
    h0: HermitianOperator,
    h: HermitianOperator,
    v: CMatrix,
}

fn build_pair(model: &LatticeModel, v0: &MatrixPotential, v: &MatrixPotential) -> Result<Pair, DiracError> {
    let h00 = build_h00(model)?;
    let v0m = v0.operator(model)?;
    let vm = v.operator(model)?;
    let h0 = HermitianOperator::new(h00.matrix() + &v0m)?;
    let h = HermitianOperator::new(h0.matrix() + &vm)?;
    Ok(Pair { h0, h, v: vm })
}

fn lu_resolvent(h: &HermitianOperator, z: Complex64) -> Result<CMatrix, DiracError> {
    let n = h.dim();
    inverse(&(h.matrix() - CMatrix::identity(n, n) * z)).ok_or(DiracError::Singular)
}

/// `[I, R, R², …, R^k]`.
fn powers(r: &CMatrix, k: usize) -> Vec<CMatrix> {
    let n = r.nrows();
    let mut out = vec![CMatrix::identity(n, n)];
    for i in 0..k {
        out.push(&out[i] * r);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventDifferenceReport {
    pub lattice: LatticeSummary,
    pub mpow: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    /// `max |(R^m - R₀^m) + Σ_k R^k V R₀^{m+1-k}|`, left side from the two
    /// eigendecompositions, right side from LU resolvents.
    pub identity_residual: f64,
    pub scale: f64,
    pub identity_pass: bool,
    /// `‖R^m - R₀^m‖₁`.
    pub trace_norm: f64,
}

/// Tolerance (relative to `scale`) for the resolvent-power expansion.
pub const EXPANSION_TOL: f64 = 1e-9;

pub fn resolvent_power_difference(
    model: &LatticeModel,
    v0: &MatrixPotential,
    v: &MatrixPotential,
    z: Complex64,
    mpow: u32,
) -> Result<ResolventDifferenceReport, DiracError> {
    check_off_axis(z)?;
    check_mpow(mpow)?;
    let pair = build_pair(model, v0, v)?;
    let lhs = resolvent_power(&eig_hermitian(&pair.h), z, mpow)?
        - resolvent_power(&eig_hermitian(&pair.h0), z, mpow)?;
    let m = mpow as usize;
    let rp = powers(&lu_resolvent(&pair.h, z)?, m);
    let r0p = powers(&lu_resolvent(&pair.h0, z)?, m);
    let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
    let mut scale = max_abs(&rp[m]) + max_abs(&r0p[m]);
    for k in 1..=m {
        let term = &rp[k] * &pair.v * &r0p[m + 1 - k];
        scale += max_abs(&term);
        rhs -= term;
    }
    let identity_residual = max_abs(&(&lhs - &rhs));
    Ok(ResolventDifferenceReport {
        lattice: model.summary(),
        mpow,
        z,
        identity_residual,
        scale,
        identity_pass: identity_residual <= EXPANSION_TOL * scale,
        trace_norm: schatten_norm_of(&lhs, 1.0)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceNormRefinement {
    pub mpow: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    pub scheme: Refinement,
    pub trend: RefinementTrend,
    pub max_identity_relative: f64,
}

/// `‖R^m - R₀^m‖₁` along the plan, rebuilding both potentials on each level.
pub fn trace_norm_refinement(
    plan: &RefinementPlan,
    v0: &PotentialSpec,
    v: &PotentialSpec,
    z: Complex64,
    mpow: u32,
    tol: f64,
) -> Result<TraceNormRefinement, DiracError> {
    let mut levels = Vec::new();
    let mut worst = 0.0f64;
    for m in plan.models()? {
        let rep = resolvent_power_difference(&m, &v0.build(&m)?, &v.build(&m)?, z, mpow)?;
        worst = worst.max(rep.identity_residual / rep.scale);
        levels.push(RefinementLevel { n: m.n(), h: m.h(), value: rep.trace_norm });
    }
    Ok(TraceNormRefinement {
        mpow,
        z,
        scheme: plan.scheme,
        trend: RefinementTrend::new(levels, tol),
        max_identity_relative: worst,
    })
}

/// Exponent bookkeeping for `R^k V R₀^{m+1-k} = (R^k⟨x⟩^{-r₁})(⟨x⟩^ρ V)(⟨x⟩^{-r₂}R₀^{m+1-k})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderBudget {
    pub d: usize,
    pub rho: f64,
    pub mpow: u32,
    pub k: u32,
    pub r1: f64,
    pub r2: f64,
    pub threshold1: f64,
    pub threshold2: f64,
    /// `1/threshold1 + 1/threshold2`; the product is trace class once this
    /// exceeds 1.
    pub budget: f64,
    pub feasible: bool,
    /// Exponents just above the thresholds with `1/p₁ + 1/p₂ ≥ 1`, clamped
    /// to `p ≥ 1`. `None` when infeasible.
    pub p1: Option<f64>,
    pub p2: Option<f64>,
}

pub fn holder_budget(d: usize, rho: f64, mpow: u32, k: u32) -> Result<HolderBudget, DiracError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(DiracError::InvalidExponent(format!("ρ = {rho} must be positive")));
    }
    if mpow == 0 || k == 0 || k > mpow {
        return Err(DiracError::InvalidExponent(format!("need 1 ≤ k ≤ mpow, got k = {k}, mpow = {mpow}")));
    }
    let m1 = (mpow + 1) as f64;
    let (k1, k2) = (k as f64, m1 - k as f64);
    let r1 = k1 * rho / m1;
    let r2 = k2 * rho / m1;
    let threshold1 = threshold_p(d, r1, k1);
    let threshold2 = threshold_p(d, r2, k2);
    let budget = 1.0 / threshold1 + 1.0 / threshold2;
    let feasible = budget > 1.0;
    let (p1, p2) = if feasible {
        // 1/p₁ + 1/p₂ = (1 + budget)/2 > 1 before clamping.
        let stretch = 2.0 * budget / (1.0 + budget);
        (Some((threshold1 * stretch).max(1.0)), Some((threshold2 * stretch).max(1.0)))
    } else {
        (None, None)
    };
    Ok(HolderBudget { d, rho, mpow, k, r1, r2, threshold1, threshold2, budget, feasible, p1, p2 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    pub lattice: LatticeSummary,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    pub budget: HolderBudget,
    pub decay: Option<DecayCheck>,
    /// `max |ABC - R^k V R₀^{m+1-k}| / max |R^k V R₀^{m+1-k}|`.
    pub factorization_residual: f64,
    pub direct_trace_norm: f64,
    pub left_norm: Option<f64>,
    pub middle_norm: f64,
    pub right_norm: Option<f64>,
    pub product_bound: Option<f64>,
    pub holder_holds: Option<bool>,
    pub pass: bool,
}

/// Factorization tolerance for `ABC` against the direct product.
pub const FACTORIZATION_TOL: f64 = 1e-10;

pub fn factorization_terms(
    model: &LatticeModel,
    v0: &MatrixPotential,
    v: &MatrixPotential,
    k: u32,
    mpow: u32,
    rho: f64,
    z: Complex64,
) -> Result<FactorizationReport, DiracError> {
    check_off_axis(z)?;
    if v.decay().is_none() {
        return Err(DiracError::UndeclaredDecay);
    }
    let budget = holder_budget(model.d(), rho, mpow, k)?;
    let pair = build_pair(model, v0, v)?;
    let right_pow = (mpow + 1 - k) as usize;
    let rk = powers(&lu_resolvent(&pair.h, z)?, k as usize).pop().expect("k ≥ 1");
    let r0k = powers(&lu_resolvent(&pair.h0, z)?, right_pow).pop().expect("power ≥ 1");
    let direct = &rk * &pair.v * &r0k;
    let bracket = model.bracket();
    let w1: Vec<f64> = bracket.iter().map(|b| b.powf(-budget.r1)).collect();
    let w2: Vec<f64> = bracket.iter().map(|b| b.powf(-budget.r2)).collect();
    let wrho: Vec<f64> = bracket.iter().map(|b| b.powf(rho)).collect();
    let a = scale_cols(&rk, &w1);
    let b = scale_rows(&pair.v, &wrho);
    let c = scale_rows(&r0k, &w2);
    let factorization_residual = max_abs(&(&a * &b * &c - &direct)) / max_abs(&direct).max(f64::MIN_POSITIVE);
    let direct_trace_norm = schatten_norm_of(&direct, 1.0)?;
    let middle_norm = schatten_norm_of(&b, f64::INFINITY)?;
    let (left_norm, right_norm, product_bound, holder_holds) = match (budget.p1, budget.p2) {
        (Some(p1), Some(p2)) => {
            let ln = schatten_norm_of(&a, p1)?;
            let rn = schatten_norm_of(&c, p2)?;
            let bound = ln * middle_norm * rn;
            (Some(ln), Some(rn), Some(bound), Some(direct_trace_norm <= bound * (1.0 + 1e-10)))
        }
        _ => (None, None, None, None),
    };
    Ok(FactorizationReport {
        lattice: model.summary(),
        z,
        budget,
        decay: v.check_decay(model)?,
        factorization_residual,
        direct_trace_norm,
        left_norm,
        middle_norm,
        right_norm,
        product_bound,
        pass: budget.feasible && holder_holds == Some(true) && factorization_residual <= FACTORIZATION_TOL,
        holder_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Complex64 = Complex64::new(0.0, 1.0);

    fn balanced(ns: &[usize]) -> RefinementPlan {
        RefinementPlan {
            d: 1,
            ns: ns.to_vec(),
            scheme: Refinement::Balanced,
            h_ref: 0.5,
            n_ref: 128,
            mass: 1.0,
        }
    }

    #[test]
    fn norms_above_threshold_stabilize() {
        let out = schatten_refinement(&balanced(&[64, 128, 256]), 2.0, 2, I, &[1.5], 0.05).unwrap();
        let t = &out[0].trend;
        assert!(t.stabilized, "{t:?}");
        assert_eq!(out[0].threshold_p, 0.5);
    }

    #[test]
    fn norm_at_threshold_grows() {
        let out = schatten_refinement(&balanced(&[64, 128, 256]), 1.0, 1, I, &[1.0], 0.05).unwrap();
        assert!(out[0].trend.monotone_increasing, "{:?}", out[0].trend);
        assert!(!out[0].trend.stabilized);
    }

    #[test]
    fn sub_unit_exponent_is_rejected() {
        let m = LatticeModel::new(1, 16, 0.5, 1.0).unwrap();
        assert!(weighted_resolvent_schatten(&m, 1.0, 1, I, &[0.9]).is_err());
        assert!(weighted_resolvent_schatten(&m, 1.0, 1, Complex64::new(1.0, 0.0), &[1.0]).is_err());
    }

    #[test]
    fn large_weight_exposes_resolvent_decay() {
        let m = LatticeModel::new(1, 256, 0.05, 1.0).unwrap();
        let rep = weighted_resolvent_schatten(&m, 10.0, 3, I, &[1.0, 2.0]).unwrap();
        assert_eq!(rep.predicted_exponent, 3.0);
        assert!(rep.decay_pass, "fitted {}", rep.decay_exponent);
        assert!(rep.norms[0].norm >= rep.norms[1].norm);
        assert!(rep.norms.iter().all(|n| n.above_threshold));
    }

    #[test]
    fn trend_bookkeeping() {
        let lv = |v| RefinementLevel { n: 1, h: 1.0, value: v };
        let t = RefinementTrend::new(vec![lv(1.0), lv(1.5), lv(1.6)], 0.1);
        assert!(t.monotone_increasing && t.contracting && t.stabilized);
        let t = RefinementTrend::new(vec![lv(1.0), lv(1.5), lv(2.5)], 0.1);
        assert!(!t.contracting && !t.stabilized);
    }

    fn random_pair(m: &LatticeModel, seed: u64) -> (MatrixPotential, MatrixPotential) {
        let v0 = PotentialSpec::RandomDecaying { c: 0.5, rho: 0.0, seed }.build(m).unwrap();
        let v = PotentialSpec::RandomDecaying { c: 1.0, rho: 4.0, seed: seed + 1000 }.build(m).unwrap();
        (v0, v)
    }

    #[test]
    fn expansion_identity_is_exact() {
        let m = LatticeModel::new(1, 32, 0.5, 1.0).unwrap();
        for seed in 0..4 {
            let (v0, v) = random_pair(&m, seed);
            for mpow in [1, 3, 5] {
                let rep = resolvent_power_difference(&m, &v0, &v, Complex64::new(0.2, 1.0), mpow).unwrap();
                assert!(rep.identity_pass, "{rep:?}");
                assert!(rep.trace_norm > 0.0);
            }
        }
    }

    #[test]
    fn zero_perturbation_gives_zero_difference() {
        let m = LatticeModel::new(1, 16, 0.5, 1.0).unwrap();
        let (v0, _) = random_pair(&m, 1);
        let rep = resolvent_power_difference(&m, &v0, &MatrixPotential::zero(&m), I, 3).unwrap();
        assert!(rep.trace_norm < 1e-12);
        assert!(rep.identity_pass);
        assert!(resolvent_power_difference(&m, &v0, &v0, I, 2).is_err());
    }

    #[test]
    fn trace_norm_stabilizes_on_fixed_spacing() {
        let plan = RefinementPlan {
            d: 1,
            ns: vec![32, 64, 128],
            scheme: Refinement::FixedSpacing,
            h_ref: 0.5,
            n_ref: 128,
            mass: 1.0,
        };
        let bump = PotentialSpec::CompactBump { amplitude: 0.8, radius: 2.0 };
        let rep = trace_norm_refinement(&plan, &PotentialSpec::Zero, &bump, I, 1, 0.05).unwrap();
        assert!(rep.trend.stabilized, "{rep:?}");
        assert!(rep.max_identity_relative < 1e-9);
    }

    #[test]
    fn budget_arithmetic() {
        let b = holder_budget(1, 4.0, 3, 2).unwrap();
        assert_eq!((b.r1, b.r2), (2.0, 2.0));
        assert_eq!((b.threshold1, b.threshold2), (0.5, 0.5));
        assert_eq!(b.budget, 4.0);
        assert!(b.feasible);
        assert_eq!((b.p1, b.p2), (Some(1.0), Some(1.0)));

        let edge = holder_budget(1, 1.0, 3, 2).unwrap();
        assert_eq!(edge.budget, 1.0);
        assert!(!edge.feasible && edge.p1.is_none());

        let three = holder_budget(3, 6.0, 3, 1).unwrap();
        let (p1, p2) = (three.p1.unwrap(), three.p2.unwrap());
        assert!(p1 > three.threshold1 && p2 > three.threshold2);
        assert!(1.0 / p1 + 1.0 / p2 >= 1.0);
        assert!(holder_budget(1, 4.0, 3, 4).is_err());
        assert!(holder_budget(1, 0.0, 3, 1).is_err());
    }

    #[test]
    fn holder_inequality_on_lattice() {
        let m = LatticeModel::new(1, 32, 0.5, 1.0).unwrap();
        for seed in 0..3 {
            let (v0, v) = random_pair(&m, seed);
            for k in 1..=3 {
                let rep = factorization_terms(&m, &v0, &v, k, 3, 4.0, I).unwrap();
                assert!(rep.pass, "{rep:?}");
                assert!(rep.decay.unwrap().pass);
            }
        }
    }

    #[test]
    fn infeasible_budget_is_reported() {
        let m = LatticeModel::new(1, 16, 0.5, 1.0).unwrap();
        let v = PotentialSpec::PowerLaw { c: 1.0, rho: 1.0 }.build(&m).unwrap();
        let rep = factorization_terms(&m, &MatrixPotential::zero(&m), &v, 2, 3, 1.0, I).unwrap();
        assert!(!rep.budget.feasible && !rep.pass);
        assert!(rep.product_bound.is_none());
        assert!(rep.factorization_residual < 1e-12);
        let bump = PotentialSpec::CompactBump { amplitude: 1.0, radius: 1.0 }.build(&m).unwrap();
        assert!(matches!(
            factorization_terms(&m, &MatrixPotential::zero(&m), &bump, 1, 3, 4.0, I),
            Err(DiracError::UndeclaredDecay)
        ));
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let v: Vec<f64> = (1..=200).map(|n| (n as f64).powf(-2.5)).collect();
        assert!((fit_decay_exponent(&v, (5, 100)) - 2.5).abs() < 1e-12);
        assert!(fit_decay_exponent(&v, (5, 5)).is_nan());
    }
}
