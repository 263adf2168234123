use num_complex::Complex64;
use serde::Serialize;

use super::poly::PPolynomial;
use super::DoiError;
use crate::spectral::ScalarFunction;

/// Relative size of `|g(λ) - g(μ)|` below which the direct kernel refuses
/// to divide.
pub const DENOMINATOR_FLOOR: f64 = 1e-13;

/// Default coincidence band `δ(λ) = 1e-5 (1 + |λ|)`.
pub fn default_band(lambda: f64) -> f64 {
    1e-5 * (1.0 + lambda.abs())
}

/// `Φ(λ, μ) = (f(λ) - f(μ)) / (λ - μ)`, replaced by `f'((λ+μ)/2)` when
/// `|λ - μ| ≤ δ(λ)`.
pub fn divided_difference(f: &ScalarFunction, lambda: f64, mu: f64) -> Complex64 {
    if (lambda - mu).abs() <= default_band(lambda) {
        f.deriv(0.5 * (lambda + mu))
    } else {
        (f.eval(lambda) - f.eval(mu)) / (lambda - mu)
    }
}

/// `∂Φ/∂λ = (f(μ) - f(λ) - f'(λ)(μ - λ)) / (λ - μ)²`, replaced by
/// `f''/2` inside the coincidence band.
pub fn divided_difference_dlambda(f: &ScalarFunction, lambda: f64, mu: f64) -> Complex64 {
    if (lambda - mu).abs() <= default_band(lambda) {
        0.5 * f.second_or_fd(0.5 * (lambda + mu))
    } else {
        let d = mu - lambda;
        (f.eval(mu) - f.eval(lambda) - f.deriv(lambda) * d) / (d * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    /// `(f(λ) - f(μ)) / (g(λ) - g(μ))`.
    Direct,
    /// `-Φ(λ, μ) G(λ, μ)` with `G = (λ-z)^m (μ-z)^m / p(λ, μ; z)`.
    Factored,
}

/// The kernel `K(λ, μ) = (f(λ) - f(μ)) / (g(λ) - g(μ))` for
/// `g(λ) = (λ - z)^{-m}`.
#[derive(Debug, Clone)]
pub struct DoiKernel {
    f: ScalarFunction,
    g: ScalarFunction,
    p: PPolynomial,
    mode: KernelMode,
}

impl DoiKernel {
    pub fn new(f: ScalarFunction, m: u32, z: Complex64, mode: KernelMode) -> Result<Self, DoiError> {
        let p = PPolynomial::new(m, z)?;
        Ok(Self {
            f,
            g: resolvent_g(m, z),
            p,
            mode,
        })
    }

    pub fn with_mode(&self, mode: KernelMode) -> Self {
        Self { mode, ..self.clone() }
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn f(&self) -> &ScalarFunction {
        &self.f
    }

    pub fn g(&self) -> &ScalarFunction {
        &self.g
    }

    pub fn polynomial(&self) -> &PPolynomial {
        &self.p
    }

    pub fn order(&self) -> u32 {
        self.p.order()
    }

    pub fn z(&self) -> Complex64 {
        self.p.z()
    }

    fn in_band(lambda: f64, mu: f64) -> bool {
        (lambda - mu).abs() <= default_band(lambda)
    }

    /// `K(λ, μ)`. Inside the coincidence band both modes use the factored
    /// form, whose only singularities are zeros of `p`.
    pub fn eval(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        match self.mode {
            KernelMode::Direct if !Self::in_band(lambda, mu) => self.direct(lambda, mu),
            _ => self.factored(lambda, mu),
        }
    }

    /// `∂K/∂λ`: the quotient rule on the direct form, or the product rule
    /// on `-Φ G`.
    pub fn dlambda(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        match self.mode {
            KernelMode::Direct if !Self::in_band(lambda, mu) => {
                let dg = self.denominator(lambda, mu)?;
                let df = self.f.eval(lambda) - self.f.eval(mu);
                if dg == Complex64::new(0.0, 0.0) {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(self.f.deriv(lambda) / dg - df * self.g.deriv(lambda) / (dg * dg))
            }
            _ => self.factored_dlambda(lambda, mu),
        }
    }

    /// `g(λ) - g(μ)`, rejected when it is negligible against `|g(λ)| + |g(μ)|`.
    /// A zero numerator is allowed through (returned as an exact zero) since
    /// the kernel then vanishes.
    fn denominator(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        let (gl, gm) = (self.g.eval(lambda), self.g.eval(mu));
        let dg = gl - gm;
        if dg.norm() < DENOMINATOR_FLOOR * (gl.norm() + gm.norm()) {
            if self.f.eval(lambda) == self.f.eval(mu) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            return Err(DoiError::NearDegenerateDenominator {
                lambda,
                mu,
                denominator: dg.norm(),
            });
        }
        Ok(dg)
    }

    fn direct(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        let dg = self.denominator(lambda, mu)?;
        if dg == Complex64::new(0.0, 0.0) {
            return Ok(dg);
        }
        Ok((self.f.eval(lambda) - self.f.eval(mu)) / dg)
    }

    fn big_g(&self, lambda: f64, mu: f64) -> Result<(Complex64, Complex64), DoiError> {
        let m = self.order();
        let z = self.z();
        let a = Complex64::new(lambda, 0.0) - z;
        let b = Complex64::new(mu, 0.0) - z;
        let p = self.p.eval(lambda, mu);
        if p.norm() == 0.0 {
            return Err(DoiError::NearDegenerateDenominator {
                lambda,
                mu,
                denominator: 0.0,
            });
        }
        Ok((a.powu(m) * b.powu(m) / p, p))
    }

    fn factored(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        let phi = divided_difference(&self.f, lambda, mu);
        if phi == Complex64::new(0.0, 0.0) {
            return Ok(phi);
        }
        let (g, _) = self.big_g(lambda, mu)?;
        Ok(-phi * g)
    }

    fn factored_dlambda(&self, lambda: f64, mu: f64) -> Result<Complex64, DoiError> {
        let phi = divided_difference(&self.f, lambda, mu);
        let dphi = divided_difference_dlambda(&self.f, lambda, mu);
        if phi == Complex64::new(0.0, 0.0) && dphi == Complex64::new(0.0, 0.0) {
            return Ok(phi);
        }
        let (g, p) = self.big_g(lambda, mu)?;
        let a = Complex64::new(lambda, 0.0) - self.z();
        // ∂G/∂λ = G (m/(λ-z) - ∂p/∂λ / p)
        let dg = g * (self.order() as f64 / a - self.p.dlambda(lambda, mu) / p);
        Ok(-(dphi * g + phi * dg))
    }

    /// `f(μ)/g(μ)`, the common `λ → ±∞` limit.
    pub fn limit(&self, mu: f64) -> Complex64 {
        self.f.eval(mu) / self.g.eval(mu)
    }
}

/// `g(λ) = (λ - z)^{-m}`.
pub fn resolvent_g(m: u32, z: Complex64) -> ScalarFunction {
    ScalarFunction::resolvent_power(z, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn bump() -> ScalarFunction {
        // (1 - λ²)³ on [-1, 1], zero outside: C² with compact support
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
    fn divided_difference_examples() {
        let sq = ScalarFunction::polynomial(vec![0.0, 0.0, 1.0]);
        assert_eq!(divided_difference(&sq, 1.0, 3.0), Complex64::new(4.0, 0.0));
        assert_eq!(divided_difference(&sq, 2.0, 2.0), Complex64::new(4.0, 0.0));

        let f = ScalarFunction::gaussian(0.3, 0.8);
        // |f''| ≤ 1/w² for a Gaussian of width w
        let sup_f2 = 1.0 / 0.64;
        let mut rng = crate::random::seeded(3, 0);
        for _ in 0..200 {
            let l: f64 = rng.random_range(-3.0..3.0);
            let u: f64 = rng.random_range(-3.0..3.0);
            let phi = divided_difference(&f, l, u);
            assert!((phi - f.deriv(l)).norm() <= 0.5 * (u - l).abs() * sup_f2 + 1e-12);
        }
    }

    #[test]
    fn f_equal_g_gives_unit_kernel() {
        let z = Complex64::new(0.0, 2.0);
        for mode in [KernelMode::Direct, KernelMode::Factored] {
            let k = DoiKernel::new(resolvent_g(3, z), 3, z, mode).unwrap();
            for &(l, u) in &[(0.1, 0.7), (-2.0, 5.0), (1.0, 1.0)] {
                assert!((k.eval(l, u).unwrap() - 1.0).norm() < 1e-12);
                assert!(k.dlambda(l, u).unwrap().norm() < 1e-9);
            }
        }
    }

    #[test]
    fn compact_support_gives_zero_outside() {
        let k = DoiKernel::new(bump(), 3, Complex64::new(0.0, 10.0), KernelMode::Direct).unwrap();
        assert_eq!(k.eval(2.0, -5.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(k.with_mode(KernelMode::Factored).eval(2.0, -5.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn direct_and_factored_agree() {
        let z = Complex64::new(0.0, 2.0);
        let direct = DoiKernel::new(ScalarFunction::gaussian(0.0, 1.0), 3, z, KernelMode::Direct).unwrap();
        let factored = direct.with_mode(KernelMode::Factored);
        let mut rng = crate::random::seeded(11, 0);
        for _ in 0..2000 {
            let l: f64 = rng.random_range(-6.0..6.0);
            let u: f64 = rng.random_range(-6.0..6.0);
            if (l - u).abs() <= 1e-3 {
                continue;
            }
            let (a, b) = (direct.eval(l, u).unwrap(), factored.eval(l, u).unwrap());
            assert!((a - b).norm() <= 1e-9 * a.norm().max(b.norm()).max(1e-300), "{l} {u}: {a} {b}");
            let (da, db) = (direct.dlambda(l, u).unwrap(), factored.dlambda(l, u).unwrap());
            assert!((da - db).norm() <= 1e-8 * da.norm().max(db.norm()).max(1e-12), "{l} {u}: {da} {db}");
        }
    }

    #[test]
    fn dlambda_matches_finite_difference() {
        let z = Complex64::new(0.0, 0.5);
        let k = DoiKernel::new(ScalarFunction::gaussian(0.2, 0.7), 3, z, KernelMode::Factored).unwrap();
        let h = 1e-6;
        for &(l, u) in &[(0.3, -0.9), (2.0, 1.5), (-1.2, 0.0)] {
            let fd = (k.eval(l + h, u).unwrap() - k.eval(l - h, u).unwrap()) / (2.0 * h);
            let an = k.dlambda(l, u).unwrap();
            assert!((fd - an).norm() <= 1e-6 * an.norm().max(1.0), "{fd} {an}");
        }
    }

    #[test]
    fn limits_at_infinity_agree() {
        let z = Complex64::new(0.0, 10.0);
        let k = DoiKernel::new(bump(), 3, z, KernelMode::Direct).unwrap();
        for &u in &[-0.5, 0.0, 0.7] {
            let lim = k.limit(u);
            for &big in &[1e6, -1e6] {
                assert!((k.eval(big, u).unwrap() - lim).norm() <= 1e-6 * lim.norm());
            }
        }
    }

    #[test]
    fn near_degenerate_denominator_is_reported() {
        // g(λ) = g(μ) on a zero of p: m = 3, z = ia, μ = -λ = -√3 a
        let a = 0.5;
        let l = 3f64.sqrt() * a;
        // an off-centre bump, so that f(λ) ≠ f(-λ)
        let k = DoiKernel::new(ScalarFunction::gaussian(0.3, 1.0), 3, Complex64::new(0.0, a), KernelMode::Direct)
            .unwrap();
        assert!(matches!(k.eval(l, -l), Err(DoiError::NearDegenerateDenominator { .. })));
    }
}
