use serde::Serialize;

use crate::spectral::ScalarFunction;

/// Radii at which the tail condition is sampled.
pub const TAIL_RADII: [f64; 4] = [10.0, 30.0, 100.0, 300.0];
/// The ratio to the model decay may grow at most this much across the radii.
const RATIO_GROWTH_LIMIT: f64 = 2.0;

/// A function with a declared tail `f(λ) ~ f₀ λ^{-m}` on both sides, with
/// remainder `O(|λ|^{-m-ε-α})` for its `α`-th derivative.
#[derive(Debug, Clone)]
pub struct AdmissibleFunction {
    pub base: ScalarFunction,
    pub tail_power: u32,
    pub tail_constant: f64,
    pub tail_epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    /// +1 for λ → +∞, -1 for λ → -∞.
    pub side: i8,
    pub alpha: u8,
    /// `|∂^α(f - f₀λ^{-m})| / |λ|^{-m-ε-α}` at each of `TAIL_RADII`.
    pub ratios: Vec<f64>,
    /// Smallest `C` that fits every sample.
    pub fitted_c: f64,
    /// Least-squares decay exponent of the remainder in `|λ|`.
    pub decay_exponent: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub tails: Vec<TailFit>,
    pub sup_f: f64,
    pub sup_df: f64,
    pub sup_d2f: f64,
    pub pass: bool,
}

/// Samples the two-sided tail condition for `α = 0, 1` and the size of `f`,
/// `f'`, `f''` on a 2001-point grid over `[-100, 100]`. A tail passes when the
/// ratios to the model decay stay bounded: the ratio at the largest radius is
/// at most twice the largest ratio at the two smallest radii.
pub fn check_admissible(f: &AdmissibleFunction) -> AdmissibilityReport {
    let m = f.tail_power as i32;
    let f0 = f.tail_constant;
    let eps = f.tail_epsilon;
    let mut tails = Vec::with_capacity(4);
    for side in [1i8, -1] {
        for alpha in [0u8, 1] {
            let residuals: Vec<f64> = TAIL_RADII
                .iter()
                .map(|&r| {
                    let x = side as f64 * r;
                    if alpha == 0 {
                        (f.base.eval(x) - f0 * x.powi(-m)).norm()
                    } else {
                        (f.base.deriv(x) + f0 * m as f64 * x.powi(-m - 1)).norm()
                    }
                })
                .collect();
            let ratios: Vec<f64> = residuals
                .iter()
                .zip(TAIL_RADII)
                .map(|(res, r)| res / r.powf(-(m as f64) - eps - alpha as f64))
                .collect();
            let fitted_c = ratios.iter().copied().fold(0.0, f64::max);
            let early = ratios[0].max(ratios[1]);
            let pass = ratios.iter().all(|r| r.is_finite())
                && ratios[3] <= RATIO_GROWTH_LIMIT * early.max(f64::MIN_POSITIVE);
            tails.push(TailFit {
                side,
                alpha,
                decay_exponent: decay_exponent(&residuals),
                ratios,
                fitted_c,
                pass,
            });
        }
    }
    let grid: Vec<f64> = (0..=2000).map(|i| -100.0 + 0.1 * i as f64).collect();
    let sup = |g: &dyn Fn(f64) -> f64| grid.iter().map(|&x| g(x)).fold(0.0, f64::max);
    let sup_f = sup(&|x| f.base.eval(x).norm());
    let sup_df = sup(&|x| f.base.deriv(x).norm());
    let sup_d2f = sup(&|x| f.base.second_or_fd(x).norm());
    let pass = tails.iter().all(|t| t.pass)
        && sup_f.is_finite()
        && sup_df.is_finite()
        && sup_d2f.is_finite();
    AdmissibilityReport {
        tails,
        sup_f,
        sup_df,
        sup_d2f,
        pass,
    }
}

/// Negative slope of `ln residual` against `ln |λ|`.
fn decay_exponent(residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = TAIL_RADII
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r > 0.0)
        .map(|(x, r)| (x.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    -sxy / sxx
}
