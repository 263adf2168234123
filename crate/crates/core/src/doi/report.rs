use num_complex::Complex64;
use serde::Serialize;

use super::kernel::DoiKernel;
use super::DoiError;

/// Tolerance on `|K(+Λ, μ) - K(-Λ, μ)|` for the equal-limits condition.
pub const LIMIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub region: String,
    pub samples: usize,
    pub sup_k: f64,
    /// `sup (1+λ²) |∂K/∂λ|`.
    pub sup_weighted_dk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BsReport {
    pub m: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    pub r: f64,
    pub sup_k: f64,
    pub sup_weighted_dk: f64,
    /// `Λ`, the largest `|λ|` on the grid.
    pub lambda_edge: f64,
    /// `max_μ |K(Λ, μ) - K(-Λ, μ)|`.
    pub limit_mismatch: f64,
    /// `max_μ |K(±Λ, μ) - f(μ)/g(μ)|`.
    pub limit_error: f64,
    /// Fitted `s` in `sup_μ |∂K/∂λ| ~ |λ|^{-s}` over `|λ| ≥ 10 max(r, 1)`.
    pub dk_decay_exponent: f64,
    /// The decay the transformer bound asks for (`2`) and the decay the
    /// strip estimate delivers (`m + 1`).
    pub required_exponent: f64,
    pub strip_exponent: f64,
    /// Bounded square `|λ|, |μ| ≤ r`; strips where exactly one exceeds `r`;
    /// exterior where both do.
    pub regions: Vec<RegionStats>,
    pub pass: bool,
}

/// Samples the boundedness, derivative-decay and equal-limit conditions on
/// the product grid `λ_grid × μ_grid`. Failures are report outcomes; kernel
/// evaluation errors (a hit on an exact zero of the denominator) propagate.
pub fn bs_hypotheses_report(
    kernel: &DoiKernel,
    lambda_grid: &[f64],
    mu_grid: &[f64],
    r: f64,
) -> Result<BsReport, DoiError> {
    if lambda_grid.len() < 2 || mu_grid.is_empty() {
        return Err(DoiError::InvalidGrid {
            grid_n: lambda_grid.len().min(mu_grid.len()),
        });
    }
    let names = ["bounded", "strip", "exterior"];
    let mut regions: Vec<RegionStats> = names
        .iter()
        .map(|n| RegionStats {
            region: n.to_string(),
            samples: 0,
            sup_k: 0.0,
            sup_weighted_dk: 0.0,
        })
        .collect();
    let tail_start = 10.0 * r.max(1.0);
    let mut tail_points = Vec::new();
    for &l in lambda_grid {
        let mut sup_dk_here = 0.0f64;
        for &u in mu_grid {
            let k = kernel.eval(l, u)?.norm();
            let dk = kernel.dlambda(l, u)?.norm();
            sup_dk_here = sup_dk_here.max(dk);
            let idx = (l.abs() > r) as usize + (u.abs() > r) as usize;
            let s = &mut regions[idx];
            s.samples += 1;
            s.sup_k = s.sup_k.max(k);
            s.sup_weighted_dk = s.sup_weighted_dk.max((1.0 + l * l) * dk);
        }
        if l.abs() >= tail_start && sup_dk_here > 0.0 {
            tail_points.push((l.abs().ln(), sup_dk_here.ln()));
        }
    }
    let lo = lambda_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lambda_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut limit_mismatch = 0.0f64;
    let mut limit_error = 0.0f64;
    for &u in mu_grid {
        let (kp, km) = (kernel.eval(hi, u)?, kernel.eval(lo, u)?);
        let lim = kernel.limit(u);
        limit_mismatch = limit_mismatch.max((kp - km).norm());
        limit_error = limit_error.max((kp - lim).norm()).max((km - lim).norm());
    }
    let sup_k = regions.iter().map(|s| s.sup_k).fold(0.0, f64::max);
    let sup_weighted_dk = regions.iter().map(|s| s.sup_weighted_dk).fold(0.0, f64::max);
    let pass = sup_k.is_finite() && sup_weighted_dk.is_finite() && limit_mismatch <= LIMIT_TOL;
    Ok(BsReport {
        m: kernel.order(),
        z: kernel.z(),
        r,
        sup_k,
        sup_weighted_dk,
        lambda_edge: hi.max(-lo),
        limit_mismatch,
        limit_error,
        dk_decay_exponent: -slope(&tail_points),
        required_exponent: 2.0,
        strip_exponent: kernel.order() as f64 + 1.0,
        regions,
        pass,
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Symmetric grid: `n_inner` uniform nodes on `[-inner, inner]` and
/// `n_outer` geometric nodes on each side out to `edge`.
pub fn symmetric_grid(inner: f64, edge: f64, n_inner: usize, n_outer: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..n_inner)
        .map(|i| -inner + 2.0 * inner * i as f64 / (n_inner.max(2) - 1) as f64)
        .collect();
    let ratio = (edge / inner).ln() / n_outer.max(1) as f64;
    for k in 1..=n_outer {
        let x = inner * (ratio * k as f64).exp();
        grid.push(x);
        grid.push(-x);
    }
    grid.sort_by(f64::total_cmp);
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doi::{kernel::resolvent_g, tail_function, KernelMode};
    use crate::spectral::ScalarFunction;

    fn bump() -> ScalarFunction {
        ScalarFunction::real(
            |x| if x.abs() < 1.0 { (1.0 - x * x).powi(3) } else { 0.0 },
            |x| if x.abs() < 1.0 { -6.0 * x * (1.0 - x * x).powi(2) } else { 0.0 },
            |x| {
                if x.abs() < 1.0 {
                    -6.0 * (1.0 - x * x).powi(2) + 24.0 * x * x * (1.0 - x * x)
                } else {
                    0.0
                }
            },
        )
    }

    #[test]
    fn unit_kernel_report() {
        let z = Complex64::new(0.0, 2.0);
        let k = DoiKernel::new(resolvent_g(3, z), 3, z, KernelMode::Direct).unwrap();
        let grid = symmetric_grid(3.0, 1e3, 31, 10);
        let rep = bs_hypotheses_report(&k, &grid, &grid, 1.0).unwrap();
        assert!((rep.sup_k - 1.0).abs() < 1e-12);
        assert!(rep.sup_weighted_dk < 1e-6, "{}", rep.sup_weighted_dk);
    }

    #[test]
    fn compact_kernel_satisfies_hypotheses() {
        let k = DoiKernel::new(bump(), 3, Complex64::new(0.0, 10.0), KernelMode::Direct).unwrap();
        let lambda = symmetric_grid(3.0, 1e6, 121, 60);
        let mu = symmetric_grid(3.0, 1e3, 121, 30);
        let rep = bs_hypotheses_report(&k, &lambda, &mu, 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.regions[2].sup_k, 0.0);
        assert!((rep.dk_decay_exponent - 4.0).abs() < 0.1, "{}", rep.dk_decay_exponent);
    }

    #[test]
    fn tail_kernel_satisfies_hypotheses() {
        let k = DoiKernel::new(tail_function(3, 1.0), 3, Complex64::new(0.0, 0.01), KernelMode::Factored).unwrap();
        let lambda = symmetric_grid(3.0, 1e6, 121, 60);
        let mu = symmetric_grid(3.0, 1e3, 121, 30);
        let rep = bs_hypotheses_report(&k, &lambda, &mu, 1.0).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.regions[0].sup_k, 0.0);
    }
}
