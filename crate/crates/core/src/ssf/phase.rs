//! Continuous tracking of `arg D(λ + iy)` as `y` decreases.

use num_complex::Complex64;
use serde::Serialize;

use super::SsfError;

/// Largest accepted phase increment per step.
pub const MAX_PHASE_STEP: f64 = std::f64::consts::FRAC_PI_4;
/// Smallest step in `ln y` before giving up.
pub const STEP_FLOOR: f64 = 1e-8;

/// Continuous phase of `D` at each `ε` of a schedule, plus the extrapolated
/// `ε → 0` value of `arg D / π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseEstimate {
    /// `(ε, arg D(λ + iε) / π)` in schedule order.
    pub samples: Vec<(f64, f64)>,
    /// Two-point Richardson extrapolation over the last two samples.
    pub value: f64,
    /// Height the path started from.
    pub start_height: f64,
    pub steps: usize,
}

/// Tracks `arg D(λ + iy)` from `y = start_height` down through every `ε` of
/// `schedule` (strictly decreasing, positive). The branch is fixed by taking
/// the principal argument at the start, where `D ≈ 1`; `start_height` is
/// doubled until `|Arg D| < π/4` there. Steps are taken in `ln y` and halved
/// whenever a phase increment reaches `MAX_PHASE_STEP`.
pub fn track_phase<F>(
    mut det: F,
    lambda: f64,
    start_height: f64,
    schedule: &[f64],
) -> Result<PhaseEstimate, SsfError>
where
    F: FnMut(Complex64) -> Result<Complex64, SsfError>,
{
    if schedule.is_empty()
        || schedule.iter().any(|e| !(*e > 0.0 && e.is_finite()))
        || schedule.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(SsfError::BadSchedule);
    }
    let mut y = start_height.max(2.0 * schedule[0]);
    let mut d = det(Complex64::new(lambda, y))?;
    let mut doublings = 0;
    while d.arg().abs() >= MAX_PHASE_STEP {
        y *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(SsfError::PhaseStepFloor { height: y });
        }
        d = det(Complex64::new(lambda, y))?;
    }
    check_nonzero(d, y)?;
    let start = y;
    let mut phase = d.arg();
    let mut t = y.ln();
    let mut dt = 0.25;
    let mut steps = 0;
    let mut samples = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let target = eps.ln();
        while t > target {
            let next = (t - dt).max(target);
            let z = Complex64::new(lambda, next.exp());
            let d_next = det(z)?;
            check_nonzero(d_next, next.exp())?;
            let inc = (d_next / d).arg();
            if inc.abs() >= MAX_PHASE_STEP {
                dt *= 0.5;
                if dt < STEP_FLOOR {
                    return Err(SsfError::PhaseStepFloor { height: next.exp() });
                }
                continue;
            }
            phase += inc;
            d = d_next;
            t = next;
            steps += 1;
            if inc.abs() < 0.25 * MAX_PHASE_STEP {
                dt = (dt * 1.5).min(0.5);
            }
        }
        samples.push((eps, phase / std::f64::consts::PI));
    }
    let value = richardson(&samples);
    Ok(PhaseEstimate {
        samples,
        value,
        start_height: start,
        steps,
    })
}

fn check_nonzero(d: Complex64, height: f64) -> Result<(), SsfError> {
    if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
        Err(SsfError::DegenerateDeterminant { height })
    } else {
        Ok(())
    }
}

/// Linear extrapolation to `ε = 0` through the last two samples; the phase is
/// an odd analytic function of `ε` away from the spectrum, so this removes
/// the first-order error.
pub fn richardson(samples: &[(f64, f64)]) -> f64 {
    match samples {
        [] => 0.0,
        [(_, v)] => *v,
        [.., (e1, v1), (e2, v2)] => (e1 * v2 - e2 * v1) / (e1 - e2),
    }
}

/// `ε_k = gap / 2^k`, `k = 1..=8`.
pub fn default_schedule(gap: f64) -> Vec<f64> {
    (1..=8).map(|k| gap / 2f64.powi(k)).collect()
}
