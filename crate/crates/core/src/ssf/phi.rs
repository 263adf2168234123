use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use super::SsfError;
use crate::spectral::ScalarFunction;

/// Number of grid points used to certify `φ' ≥ c > 0` on `[-R, R]`.
pub const MONOTONICITY_GRID: usize = 10_001;

/// Odd, increasing `C²` function equal to `λ^m` for `|λ| ≥ R` and to an odd
/// polynomial `Σ_j c_j λ^{2j+1}` on `[-R, R]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangeOfVariable {
    m: u32,
    cutoff: f64,
    /// Coefficients of λ, λ³, λ⁵, (λ⁷).
    inner_coeffs: Vec<f64>,
    lower_slope: f64,
}

impl ChangeOfVariable {
    /// Validates an explicit interpolant; fails if it is not monotone on the
    /// certification grid.
    pub fn new(m: u32, cutoff: f64, inner_coeffs: Vec<f64>) -> Result<Self, SsfError> {
        check_order(m)?;
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(SsfError::InvalidCutoff { cutoff });
        }
        let mut phi = Self {
            m,
            cutoff,
            inner_coeffs,
            lower_slope: 0.0,
        };
        let inner_min = phi.grid_min_slope();
        let outer_min = m as f64 * cutoff.powi(m as i32 - 1);
        phi.lower_slope = inner_min.min(outer_min);
        if !(phi.lower_slope > monotone_floor(m, cutoff)) {
            return Err(SsfError::NonMonotone {
                min_slope: phi.lower_slope,
            });
        }
        Ok(phi)
    }

    pub fn identity() -> Self {
        Self {
            m: 1,
            cutoff: 1.0,
            inner_coeffs: vec![1.0],
            lower_slope: 1.0,
        }
    }

    pub fn power(&self) -> u32 {
        self.m
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn inner_coeffs(&self) -> &[f64] {
        &self.inner_coeffs
    }

    /// Certified lower bound `c` for `φ'`.
    pub fn lower_slope(&self) -> f64 {
        self.lower_slope
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.cutoff {
            x.powi(self.m as i32)
        } else {
            odd_poly(&self.inner_coeffs, x, 0)
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if x.abs() >= self.cutoff {
            self.m as f64 * x.powi(self.m as i32 - 1)
        } else {
            odd_poly(&self.inner_coeffs, x, 1)
        }
    }

    pub fn second(&self, x: f64) -> f64 {
        if x.abs() >= self.cutoff {
            let m = self.m as f64;
            if self.m < 2 {
                0.0
            } else {
                m * (m - 1.0) * x.powi(self.m as i32 - 2)
            }
        } else {
            odd_poly(&self.inner_coeffs, x, 2)
        }
    }

    /// `ψ = φ^{-1}` by bisection to `1e-12` relative width.
    pub fn inverse(&self, y: f64) -> f64 {
        if self.m == 1 && self.inner_coeffs == [1.0] {
            return y;
        }
        let outer = y.abs().powf(1.0 / self.m as f64);
        let bound = 2.0 * outer.max(self.cutoff) + 1.0;
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * mid.abs().max(1.0) * 0.5 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn as_scalar_function(&self) -> ScalarFunction {
        let (a, b, c) = (self.clone(), self.clone(), self.clone());
        ScalarFunction::real(move |x| a.eval(x), move |x| b.deriv(x), move |x| c.second(x))
    }

    /// `(φ(λ) - i)^{-1}`.
    pub fn shifted_resolvent(&self) -> ScalarFunction {
        ScalarFunction::resolvent_power(Complex64::i(), 1).compose(&self.as_scalar_function())
    }

    fn grid_min_slope(&self) -> f64 {
        grid_min(&self.inner_coeffs, self.cutoff, MONOTONICITY_GRID)
    }
}

fn check_order(m: u32) -> Result<(), SsfError> {
    if m == 0 || m % 2 == 0 {
        Err(SsfError::InvalidOrder { m })
    } else {
        Ok(())
    }
}

fn monotone_floor(m: u32, cutoff: f64) -> f64 {
    1e-9 * m as f64 * cutoff.powi(m as i32 - 1)
}

/// `d^order/dx^order Σ_j c_j x^{2j+1}`.
fn odd_poly(coeffs: &[f64], x: f64, order: u32) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in coeffs.iter().enumerate() {
        let p = 2 * j as i32 + 1;
        let falling: f64 = (0..order as i32).map(|i| (p - i) as f64).product();
        if p >= order as i32 {
            acc += c * falling * x.powi(p - order as i32);
        }
    }
    acc
}

fn grid_min(coeffs: &[f64], cutoff: f64, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let x = -cutoff + 2.0 * cutoff * i as f64 / (n - 1) as f64;
            odd_poly(coeffs, x, 1)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Solves for the odd quintic `αλ + βλ³ + γλ⁵` matching value, first and
/// second derivatives of `λ^m` at `λ = R`.
pub fn quintic_coefficients(m: u32, cutoff: f64) -> [f64; 3] {
    let r = cutoff;
    let mf = m as f64;
    let a = Matrix3::new(
        r,
        r.powi(3),
        r.powi(5),
        1.0,
        3.0 * r * r,
        5.0 * r.powi(4),
        0.0,
        6.0 * r,
        20.0 * r.powi(3),
    );
    let rhs = Vector3::new(
        r.powi(m as i32),
        mf * r.powi(m as i32 - 1),
        if m >= 2 { mf * (mf - 1.0) * r.powi(m as i32 - 2) } else { 0.0 },
    );
    let sol = a.lu().solve(&rhs).expect("interpolation system is regular for R > 0");
    [sol[0], sol[1], sol[2]]
}

/// Builds the change of variables for odd `m` and cutoff `R`.
///
/// The odd quintic matching `λ^m` to second order at `R` is tried first. For
/// `m ∈ {3, 5}` it reproduces `λ^m` itself, whose slope vanishes at 0, so the
/// septic family `quintic + t·λ(λ² - R²)³` is used instead, with `t` chosen to
/// maximize the smallest slope on the grid (the objective is concave in `t`).
pub fn build_phi(m: u32, cutoff: f64) -> Result<ChangeOfVariable, SsfError> {
    check_order(m)?;
    if !(cutoff > 0.0 && cutoff.is_finite()) {
        return Err(SsfError::InvalidCutoff { cutoff });
    }
    if m == 1 {
        return Ok(ChangeOfVariable::identity());
    }
    let quintic = quintic_coefficients(m, cutoff).to_vec();
    if grid_min(&quintic, cutoff, MONOTONICITY_GRID) > monotone_floor(m, cutoff) {
        return ChangeOfVariable::new(m, cutoff, quintic);
    }

    let r2 = cutoff * cutoff;
    // λ(λ² - R²)³ = λ⁷ - 3R²λ⁵ + 3R⁴λ³ - R⁶λ
    let homogeneous = [-r2.powi(3), 3.0 * r2 * r2, -3.0 * r2, 1.0];
    let septic = |t: f64| -> Vec<f64> {
        let mut c = quintic.clone();
        c.push(0.0);
        for (ci, hi) in c.iter_mut().zip(homogeneous) {
            *ci += t * hi;
        }
        c
    };
    let coarse = 2_001;
    let objective = |t: f64| grid_min(&septic(t), cutoff, coarse);
    // φ'(0) = α - t R⁶, so useful |t| are of order m R^{m-1} / R⁶. For
    // m ≥ 7 the quintic dips below zero away from the origin and the optimal t
    // is positive.
    let scale = m as f64 * cutoff.powi(m as i32 - 1) / r2.powi(3);
    let (mut lo, mut hi) = (-4.0 * scale, 4.0 * scale);
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = objective(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = objective(x1);
        }
    }
    ChangeOfVariable::new(m, cutoff, septic(0.5 * (lo + hi)))
}
