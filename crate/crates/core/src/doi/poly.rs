use num_complex::Complex64;
use serde::Serialize;

use super::DoiError;
use crate::spectral::SpectralError;

/// `p(λ, μ; z) = Σ_{j=0}^{m-1} (λ-z)^{m-1-j} (μ-z)^j`, so that
/// `(λ-z)^m - (μ-z)^m = (λ-μ) p(λ, μ; z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PPolynomial {
    m: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    z: Complex64,
}

impl PPolynomial {
    pub fn new(m: u32, z: Complex64) -> Result<Self, DoiError> {
        check_order(m)?;
        if z.im == 0.0 || !z.im.is_finite() || !z.re.is_finite() {
            return Err(SpectralError::RealSpectralParameter { z }.into());
        }
        Ok(Self { m, z })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn eval(&self, lambda: f64, mu: f64) -> Complex64 {
        p_value(self.m, self.z, lambda, mu)
    }

    /// `∂p/∂λ = Σ_{j=0}^{m-2} (m-1-j) (λ-z)^{m-2-j} (μ-z)^j`.
    pub fn dlambda(&self, lambda: f64, mu: f64) -> Complex64 {
        p_dlambda(self.m, self.z, lambda, mu)
    }

    /// `(λ-z)^{m-1} (1 + σ + … + σ^{m-1})` with `σ = (μ-z)/(λ-z)`.
    pub fn sigma_form(&self, lambda: f64, mu: f64) -> Complex64 {
        let a = Complex64::new(lambda, 0.0) - self.z;
        let sigma = (Complex64::new(mu, 0.0) - self.z) / a;
        a.powu(self.m - 1) * geometric_sum(sigma, self.m)
    }
}

pub(crate) fn check_order(m: u32) -> Result<(), DoiError> {
    if m % 2 == 0 {
        Err(DoiError::InvalidOrder { m })
    } else {
        Ok(())
    }
}

/// Horner form in `λ - z`, accumulating the powers of `μ - z` on the way.
/// `z` may be real here (the ratio `p(·;0)/p(·;z)` needs `z = 0`).
pub(crate) fn p_value(m: u32, z: Complex64, lambda: f64, mu: f64) -> Complex64 {
    let a = Complex64::new(lambda, 0.0) - z;
    let b = Complex64::new(mu, 0.0) - z;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut bpow = Complex64::new(1.0, 0.0);
    for _ in 0..m {
        acc = acc * a + bpow;
        bpow *= b;
    }
    acc
}

pub(crate) fn p_dlambda(m: u32, z: Complex64, lambda: f64, mu: f64) -> Complex64 {
    let a = Complex64::new(lambda, 0.0) - z;
    let b = Complex64::new(mu, 0.0) - z;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut bpow = Complex64::new(1.0, 0.0);
    for j in 0..m.saturating_sub(1) {
        acc = acc * a + (m - 1 - j) as f64 * bpow;
        bpow *= b;
    }
    acc
}

fn geometric_sum(sigma: Complex64, m: u32) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..m {
        acc = acc * sigma + 1.0;
    }
    acc
}

/// The zeros `exp(2πik/m)`, `k = 1..m-1`, of `1 + σ + … + σ^{m-1}`.
pub fn sigma_roots(m: u32) -> Vec<Complex64> {
    (1..m.max(1))
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `|λ|, |μ| ≤ r`; certifies `|p| ≥ c`.
    Bounded { r: f64 },
    /// `max(|λ|, |μ|) ≥ r` inside `[-Λ, Λ]²`; certifies `|p| ≥ c (|λ|+|μ|)^{m-1}`.
    Exterior { r: f64, lambda_max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundCertificate {
    pub m: u32,
    #[serde(serialize_with = "crate::doi::ser_complex")]
    pub z: Complex64,
    pub region: Region,
    pub grid_n: usize,
    /// Smallest (normalized) `|p|` over the grid nodes.
    pub c_observed: f64,
    /// `c_observed` minus the certified lower bound.
    pub slack: f64,
    /// Node where `c_observed` is attained.
    pub argmin: (f64, f64),
    pub pass: bool,
}

impl LowerBoundCertificate {
    pub fn certified(&self) -> f64 {
        self.c_observed - self.slack
    }
}

/// Grid certificate for the lower bounds on `|p|`.
///
/// The bounded region uses a uniform `grid_n × grid_n` grid on `[-r, r]²`.
/// The exterior uses, on each axis, `grid_n` nodes that are uniform on
/// `[-r, r]` and geometric on `r ≤ |λ| ≤ Λ`; only cells outside the open
/// square `|λ|, |μ| < r` are visited, and `|p|` is divided by
/// `(|λ|+|μ|)^{m-1}`.
///
/// On each cell the lower bound is the smallest corner value minus half the
/// largest corner-to-corner change along each axis (a Lipschitz estimate at
/// grid resolution). The certificate passes when the minimum of those cell
/// bounds is positive.
pub fn p_lower_bound_cert(
    p: &PPolynomial,
    region: Region,
    grid_n: usize,
) -> Result<LowerBoundCertificate, DoiError> {
    if grid_n < 3 {
        return Err(DoiError::InvalidGrid { grid_n });
    }
    let (axis, r, normalize) = match region {
        Region::Bounded { r } => {
            check_radius(r)?;
            (uniform_axis(r, grid_n), r, false)
        }
        Region::Exterior { r, lambda_max } => {
            check_radius(r)?;
            if !(lambda_max > r && lambda_max.is_finite()) {
                return Err(DoiError::InvalidRegion(format!(
                    "exterior region needs r < Λ, got r = {r}, Λ = {lambda_max}"
                )));
            }
            (exterior_axis(r, lambda_max, grid_n), r, true)
        }
    };
    let n = axis.len();
    let m = p.order();
    let mut values = vec![0.0; n * n];
    for (i, &l) in axis.iter().enumerate() {
        for (j, &u) in axis.iter().enumerate() {
            let mut v = p.eval(l, u).norm();
            if normalize {
                v /= (l.abs() + u.abs()).powi(m as i32 - 1);
            }
            values[i * n + j] = v;
        }
    }
    let inside = |i: usize, j: usize| !normalize || axis[i].abs().max(axis[j].abs()) >= r;
    let mut c_observed = f64::INFINITY;
    let mut argmin = (f64::NAN, f64::NAN);
    let mut certified = f64::INFINITY;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            if !corners.iter().all(|&(a, b)| inside(a, b)) {
                continue;
            }
            let val = |(a, b): (usize, usize)| values[a * n + b];
            let (v00, v10, v01, v11) = (val(corners[0]), val(corners[1]), val(corners[2]), val(corners[3]));
            let lower_corner = v00.min(v10).min(v01).min(v11);
            let dl = (v10 - v00).abs().max((v11 - v01).abs());
            let dm = (v01 - v00).abs().max((v11 - v10).abs());
            certified = certified.min(lower_corner - 0.5 * (dl + dm));
            for &(a, b) in &corners {
                if val((a, b)) < c_observed {
                    c_observed = val((a, b));
                    argmin = (axis[a], axis[b]);
                }
            }
        }
    }
    Ok(LowerBoundCertificate {
        m,
        z: p.z(),
        region,
        grid_n,
        c_observed,
        slack: c_observed - certified,
        argmin,
        pass: certified > 0.0,
    })
}

fn check_radius(r: f64) -> Result<(), DoiError> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(DoiError::InvalidRegion(format!("radius must be positive, got {r}")))
    }
}

fn uniform_axis(r: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64).collect()
}

fn exterior_axis(r: f64, lambda_max: f64, n: usize) -> Vec<f64> {
    let inner = (n / 3).max(2) | 1; // odd, so 0 is a node
    let outer = ((n - inner) / 2).max(1);
    let ratio = (lambda_max / r).ln() / outer as f64;
    let mut axis: Vec<f64> = (1..=outer).rev().map(|k| -r * (ratio * k as f64).exp()).collect();
    axis.extend(uniform_axis(r, inner));
    axis.extend((1..=outer).map(|k| r * (ratio * k as f64).exp()));
    axis
}

/// Direction in which the certificate improves as `a = Im z` grows.
fn passes_for_large_a(region: Region) -> bool {
    matches!(region, Region::Bounded { .. })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub m: u32,
    pub region: Region,
    pub grid_n: usize,
    /// Smallest passing `a` (bounded) or largest passing `a` (exterior),
    /// to within the bisection tolerance.
    pub threshold: f64,
    pub bracket: (f64, f64),
    pub bisections: usize,
}

/// Locates the pass/fail boundary in `a` for `z = ia` by bisection in
/// `ln a` over `[a_lo, a_hi]`. Errors if the bracket does not straddle it.
pub fn certificate_threshold(
    m: u32,
    region: Region,
    grid_n: usize,
    a_lo: f64,
    a_hi: f64,
    rel_tol: f64,
) -> Result<ThresholdReport, DoiError> {
    let pass_at = |a: f64| -> Result<bool, DoiError> {
        let p = PPolynomial::new(m, Complex64::new(0.0, a))?;
        Ok(p_lower_bound_cert(&p, region, grid_n)?.pass)
    };
    let large = passes_for_large_a(region);
    // `good` passes, `bad` fails.
    let (mut good, mut bad) = if large { (a_hi, a_lo) } else { (a_lo, a_hi) };
    if !pass_at(good)? || pass_at(bad)? {
        return Err(DoiError::InvalidRegion(format!(
            "bracket [{a_lo}, {a_hi}] does not straddle the certificate boundary"
        )));
    }
    let mut bisections = 0;
    while (good / bad).ln().abs() > rel_tol {
        let mid = (good * bad).sqrt();
        if pass_at(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
        bisections += 1;
    }
    Ok(ThresholdReport {
        m,
        region,
        grid_n,
        threshold: good,
        bracket: (good.min(bad), good.max(bad)),
        bisections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn ia(a: f64) -> Complex64 {
        Complex64::new(0.0, a)
    }

    #[test]
    fn order_one_is_constant() {
        let p = PPolynomial::new(1, ia(1.0)).unwrap();
        assert_eq!(p.eval(3.0, -7.0), Complex64::new(1.0, 0.0));
        assert_eq!(p.dlambda(3.0, -7.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cubic_examples() {
        let a = 0.7;
        let p = PPolynomial::new(3, ia(a)).unwrap();
        assert!((p.eval(0.0, 0.0) - Complex64::new(-3.0 * a * a, 0.0)).norm() < 1e-15);
        let z = Complex64::i();
        let p = PPolynomial::new(3, z).unwrap();
        let want = ((Complex64::new(1.0, 0.0) - z).powu(3) - (Complex64::new(2.0, 0.0) - z).powu(3)) / (1.0 - 2.0);
        assert!((p.eval(1.0, 2.0) - want).norm() < 1e-14);
    }

    #[test]
    fn dlambda_matches_finite_difference() {
        let p = PPolynomial::new(5, Complex64::new(0.3, 1.7)).unwrap();
        let h = 1e-6;
        for &(l, u) in &[(0.2, -1.1), (3.0, 2.5), (-4.0, 0.0)] {
            let fd = (p.eval(l + h, u) - p.eval(l - h, u)) / (2.0 * h);
            assert!((fd - p.dlambda(l, u)).norm() <= 1e-7 * p.dlambda(l, u).norm().max(1.0));
        }
    }

    #[test]
    fn telescoping_and_sigma_form() {
        let mut rng = crate::random::seeded(5, 0);
        for m in [1u32, 3, 5, 7] {
            for _ in 0..10_000 {
                let l: f64 = rng.random_range(-10.0..10.0);
                let u: f64 = rng.random_range(-10.0..10.0);
                let z = Complex64::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..5.0));
                let p = PPolynomial::new(m, z).unwrap();
                let a = Complex64::new(l, 0.0) - z;
                let b = Complex64::new(u, 0.0) - z;
                let lhs = a.powu(m) - b.powu(m);
                let rhs = (l - u) * p.eval(l, u);
                // cancellation in the difference of m-th powers sets the scale
                let scale = a.norm().powi(m as i32) + b.norm().powi(m as i32);
                assert!((lhs - rhs).norm() <= 1e-12 * scale, "m={m}");
                let pd = p.eval(l, l);
                assert!((pd - m as f64 * a.powu(m - 1)).norm() <= 1e-12 * pd.norm());
                let s = p.sigma_form(l, u);
                let bound = (a.norm() + b.norm()).powi(m as i32 - 1);
                assert!((s - p.eval(l, u)).norm() <= 1e-10 * bound);
            }
        }
    }

    #[test]
    fn sigma_root_examples() {
        assert!(sigma_roots(1).is_empty());
        let r3 = sigma_roots(3);
        let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((r3[0] - w).norm() < 1e-15 && (r3[1] - w * w).norm() < 1e-15);
        for m in [3u32, 5, 7, 9] {
            for s in sigma_roots(m) {
                assert!(geometric_sum(s, m).norm() <= 1e-12);
            }
        }
        let r5 = sigma_roots(5);
        assert_eq!(r5.len(), 4);
        for s in r5 {
            // distance from s to the segment [-1, 1]
            let dist = (s - Complex64::new(s.re.clamp(-1.0, 1.0), 0.0)).norm();
            assert!(dist > 0.5, "{s}");
        }
    }

    #[test]
    fn bounded_certificate_for_large_a() {
        let p = PPolynomial::new(3, ia(10.0)).unwrap();
        let cert = p_lower_bound_cert(&p, Region::Bounded { r: 1.0 }, 501).unwrap();
        assert!(cert.pass, "{cert:?}");
        assert!(cert.slack >= 0.0);
        // |p| ≈ 3a² near the origin
        assert!((cert.c_observed / 300.0 - 1.0).abs() < 0.05, "{}", cert.c_observed);
    }

    #[test]
    fn order_one_certificate_is_trivial() {
        let p = PPolynomial::new(1, ia(0.3)).unwrap();
        let cert = p_lower_bound_cert(&p, Region::Bounded { r: 2.0 }, 11).unwrap();
        assert_eq!(cert.c_observed, 1.0);
        assert_eq!(cert.slack, 0.0);
        assert!(cert.pass);
    }

    #[test]
    fn exterior_certificate_for_small_a() {
        let p = PPolynomial::new(3, ia(0.01)).unwrap();
        let cert = p_lower_bound_cert(&p, Region::Exterior { r: 1.0, lambda_max: 100.0 }, 501).unwrap();
        assert!(cert.pass, "{cert:?}");
        // on the real axis min over x = μ/λ ∈ [-1,1] of (1+x+x²)/(1+|x|)² is 1/4
        assert!((cert.c_observed - 0.25).abs() < 0.01, "{}", cert.c_observed);
    }

    #[test]
    fn certificates_fail_when_conditions_are_violated() {
        // zeros of p for m = 3, z = ia sit at μ = -λ = ∓√3 a
        let p = PPolynomial::new(3, ia(0.01)).unwrap();
        let cert = p_lower_bound_cert(&p, Region::Bounded { r: 1.0 }, 501).unwrap();
        assert!(!cert.pass);
        assert!(cert.c_observed < 1e-3);
        let p = PPolynomial::new(3, ia(2.0)).unwrap();
        let cert = p_lower_bound_cert(&p, Region::Exterior { r: 1.0, lambda_max: 100.0 }, 501).unwrap();
        assert!(!cert.pass);
        assert!(cert.c_observed < 0.05, "{}", cert.c_observed);
    }

    #[test]
    fn threshold_bisection_brackets_the_zero_crossing() {
        let rep = certificate_threshold(3, Region::Bounded { r: 1.0 }, 201, 0.01, 10.0, 1e-3).unwrap();
        // zeros at |λ| = √3 a must leave the square: a > 1/√3
        assert!(rep.threshold > 1.0 / 3f64.sqrt(), "{rep:?}");
        assert!(rep.threshold < 2.0);
    }

    #[test]
    fn rejects_even_order_and_real_z() {
        assert!(matches!(PPolynomial::new(2, ia(1.0)), Err(DoiError::InvalidOrder { m: 2 })));
        assert!(PPolynomial::new(3, Complex64::new(1.0, 0.0)).is_err());
    }
}
