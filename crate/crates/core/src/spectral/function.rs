use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

type Evaluator = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A real-variable function together with its first (and optionally second)
/// derivative. Values may be complex, which covers resolvent kernels.
#[derive(Clone)]
pub struct ScalarFunction {
    value: Evaluator,
    derivative: Evaluator,
    second: Option<Evaluator>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("has_second_derivative", &self.second.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new<F, D>(value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
        D: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            second: None,
        }
    }

    pub fn with_second<S>(mut self, second: S) -> Self
    where
        S: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        self.second = Some(Arc::new(second));
        self
    }

    /// Real-valued function with all three derivatives.
    pub fn real<F, D, S>(value: F, derivative: D, second: S) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        S: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(
            move |x| Complex64::new(value(x), 0.0),
            move |x| Complex64::new(derivative(x), 0.0),
        )
        .with_second(move |x| Complex64::new(second(x), 0.0))
    }

    pub fn identity() -> Self {
        Self::polynomial(vec![0.0, 1.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// `Σ coeffs[j] λ^j`.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let c0 = Arc::new(coeffs);
        let c1 = c0.clone();
        let c2 = c0.clone();
        Self::real(
            move |x| horner(&c0, x),
            move |x| horner_derivative(&c1, x, 1),
            move |x| horner_derivative(&c2, x, 2),
        )
    }

    /// Gaussian bump `exp(-(λ-c)²/(2w²))`.
    pub fn gaussian(center: f64, width: f64) -> Self {
        let w2 = width * width;
        Self::real(
            move |x| (-(x - center).powi(2) / (2.0 * w2)).exp(),
            move |x| {
                let t = x - center;
                -t / w2 * (-t * t / (2.0 * w2)).exp()
            },
            move |x| {
                let t = x - center;
                (t * t / w2 - 1.0) / w2 * (-t * t / (2.0 * w2)).exp()
            },
        )
    }

    /// `(λ - z)^{-k}`.
    pub fn resolvent_power(z: Complex64, k: u32) -> Self {
        let k = k as i32;
        Self::new(
            move |x| (Complex64::new(x, 0.0) - z).powi(-k),
            move |x| -(k as f64) * (Complex64::new(x, 0.0) - z).powi(-k - 1),
        )
        .with_second(move |x| ((k * (k + 1)) as f64) * (Complex64::new(x, 0.0) - z).powi(-k - 2))
    }

    /// Real part of `self`, keeping the derivative structure.
    pub fn real_part(&self) -> Self {
        self.map_components(|c| Complex64::new(c.re, 0.0))
    }

    pub fn imag_part(&self) -> Self {
        self.map_components(|c| Complex64::new(c.im, 0.0))
    }

    fn map_components(&self, map: fn(Complex64) -> Complex64) -> Self {
        let v = self.value.clone();
        let d = self.derivative.clone();
        let out = Self::new(move |x| map(v(x)), move |x| map(d(x)));
        match &self.second {
            Some(s) => {
                let s = s.clone();
                out.with_second(move |x| map(s(x)))
            }
            None => out,
        }
    }

    /// Pointwise product, with the Leibniz rule for derivatives.
    pub fn mul(&self, other: &ScalarFunction) -> Self {
        let (fv, fd) = (self.value.clone(), self.derivative.clone());
        let (gv, gd) = (other.value.clone(), other.derivative.clone());
        let (fv2, fd2, gv2, gd2) = (fv.clone(), fd.clone(), gv.clone(), gd.clone());
        let (fv1, gv1) = (fv.clone(), gv.clone());
        let out = Self::new(
            move |x| fv1(x) * gv1(x),
            move |x| fd(x) * gv(x) + fv(x) * gd(x),
        );
        match (&self.second, &other.second) {
            (Some(fs), Some(gs)) => {
                let (fs, gs) = (fs.clone(), gs.clone());
                out.with_second(move |x| {
                    fs(x) * gv2(x) + 2.0 * fd2(x) * gd2(x) + fv2(x) * gs(x)
                })
            }
            _ => out,
        }
    }

    pub fn add(&self, other: &ScalarFunction) -> Self {
        let (fv, fd) = (self.value.clone(), self.derivative.clone());
        let (gv, gd) = (other.value.clone(), other.derivative.clone());
        let out = Self::new(move |x| fv(x) + gv(x), move |x| fd(x) + gd(x));
        match (&self.second, &other.second) {
            (Some(fs), Some(gs)) => {
                let (fs, gs) = (fs.clone(), gs.clone());
                out.with_second(move |x| fs(x) + gs(x))
            }
            _ => out,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let (fv, fd) = (self.value.clone(), self.derivative.clone());
        let out = Self::new(move |x| c * fv(x), move |x| c * fd(x));
        match &self.second {
            Some(fs) => {
                let fs = fs.clone();
                out.with_second(move |x| c * fs(x))
            }
            None => out,
        }
    }

    /// `self ∘ inner`. Only the real part of `inner` is fed to `self`.
    pub fn compose(&self, inner: &ScalarFunction) -> Self {
        let (fv, fd) = (self.value.clone(), self.derivative.clone());
        let (gv, gd) = (inner.value.clone(), inner.derivative.clone());
        let (fd2, gv2, gd2) = (fd.clone(), gv.clone(), gd.clone());
        let gv1 = gv.clone();
        let out = Self::new(
            move |x| fv(gv1(x).re),
            move |x| fd(gv(x).re) * gd(x).re,
        );
        match (&self.second, &inner.second) {
            (Some(fs), Some(gs)) => {
                let (fs, gs) = (fs.clone(), gs.clone());
                out.with_second(move |x| {
                    let y = gv2(x).re;
                    let dy = gd2(x).re;
                    fs(y) * dy * dy + fd2(y) * gs(x).re
                })
            }
            _ => out,
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        (self.value)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> Complex64 {
        (self.derivative)(x)
    }

    pub fn has_second(&self) -> bool {
        self.second.is_some()
    }

    pub fn second(&self, x: f64) -> Option<Complex64> {
        self.second.as_ref().map(|s| s(x))
    }

    /// Second derivative, falling back to a central difference of `f'`.
    pub fn second_or_fd(&self, x: f64) -> Complex64 {
        match &self.second {
            Some(s) => s(x),
            None => {
                let h = 1e-5 * (1.0 + x.abs());
                (self.deriv(x + h) - self.deriv(x - h)) / (2.0 * h)
            }
        }
    }

    /// Largest relative discrepancy between `f'` and a central difference of
    /// `f` over `points`, with step `1e-5 · scale`.
    pub fn derivative_discrepancy(&self, points: &[f64], scale: f64) -> f64 {
        let h = 1e-5 * scale;
        points
            .iter()
            .map(|&x| {
                let fd = (self.eval(x + h) - self.eval(x - h)) / (2.0 * h);
                let exact = self.deriv(x);
                (fd - exact).norm() / exact.norm().max(1e-6)
            })
            .fold(0.0, f64::max)
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_derivative(coeffs: &[f64], x: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for (j, &c) in coeffs.iter().enumerate().skip(order).rev() {
        let falling: f64 = (0..order).map(|i| (j - i) as f64).product();
        acc = acc * x + c * falling;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(f: &ScalarFunction, lo: f64, hi: f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<f64> = (0..100).map(|_| rng.random_range(lo..hi)).collect();
        let err = f.derivative_discrepancy(&pts, 1.0);
        assert!(err < 1e-6, "derivative discrepancy {err}");
    }

    #[test]
    fn derivatives_match_finite_differences() {
        check(&ScalarFunction::polynomial(vec![1.0, -2.0, 0.5, 3.0]), -3.0, 3.0);
        check(&ScalarFunction::gaussian(0.3, 0.7), -3.0, 3.0);
        check(&ScalarFunction::resolvent_power(Complex64::new(0.5, 1.5), 3), -3.0, 3.0);
        let prod = ScalarFunction::gaussian(0.0, 1.0).mul(&ScalarFunction::resolvent_power(Complex64::i(), 1));
        check(&prod, -3.0, 3.0);
        let comp = ScalarFunction::resolvent_power(Complex64::i(), 1).compose(&ScalarFunction::polynomial(vec![0.0, 0.0, 0.0, 1.0]));
        check(&comp, -2.0, 2.0);
    }

    #[test]
    fn polynomial_second_derivative() {
        let f = ScalarFunction::polynomial(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.second(2.0).unwrap().re, 12.0);
        assert_eq!(f.deriv(2.0).re, 12.0);
    }

    #[test]
    fn second_derivative_of_composition() {
        let f = ScalarFunction::gaussian(0.2, 0.9).compose(&ScalarFunction::polynomial(vec![0.1, 1.0, 0.3]));
        for x in [-1.0, 0.0, 0.7] {
            let h = 1e-4;
            let fd = (f.deriv(x + h) - f.deriv(x - h)) / (2.0 * h);
            assert!((fd - f.second(x).unwrap()).norm() < 1e-6);
        }
    }
}
