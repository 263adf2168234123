//! Lower-bound certificates for `p` and the kernel hypothesis reports.

use num_complex::Complex64;

use super::{CertCase, ExperimentConfig, Records, SuiteOutput};
use crate::doi::{
    bs_hypotheses_report, certificate_threshold, p_lower_bound_cert, symmetric_grid, tail_function,
    DoiKernel, KernelMode, PPolynomial, Region,
};
use crate::spectral::ScalarFunction;

/// Bisection bracket and tolerance for the informational thresholds. In the
/// exterior the certificate passes again once the zeros of `p` leave
/// `[-Λ, Λ]`, so there the bracket stops at `Λ/4`.
const THRESHOLD_BRACKET: (f64, f64) = (1e-3, 1e3);
const THRESHOLD_TOL: f64 = 1e-3;

pub(super) fn run(config: &ExperimentConfig) -> SuiteOutput {
    let c = &config.rm_cert;
    let mut rec = Records::new("rm-cert");
    let grid_n = c.grid_n as usize;
    for case in &c.bounded {
        certificate(&mut rec, case, Region::Bounded { r: case.r }, grid_n, "bounded");
    }
    for case in &c.exterior {
        let region = Region::Exterior { r: case.r, lambda_max: case.lambda_max.unwrap_or(100.0) };
        certificate(&mut rec, case, region, grid_n, "exterior");
    }
    if c.thresholds {
        for case in &c.bounded {
            threshold(&mut rec, case, Region::Bounded { r: case.r }, c.threshold_grid_n as usize, "bounded");
        }
        for case in &c.exterior {
            let region = Region::Exterior { r: case.r, lambda_max: case.lambda_max.unwrap_or(100.0) };
            threshold(&mut rec, case, region, c.threshold_grid_n as usize, "exterior");
        }
    }
    let lambda = symmetric_grid(c.grid_inner, c.grid_edge, 121, 60);
    let mu = symmetric_grid(c.grid_inner, c.grid_edge.min(1e3), 121, 30);
    let k = c.compact_kernel;
    kernel_report(&mut rec, config, "compact", DoiKernel::new(bump(k.r), k.m, Complex64::new(0.0, k.a), KernelMode::Direct), k.r, &lambda, &mu);
    let k = c.tail_kernel;
    kernel_report(
        &mut rec,
        config,
        "tail",
        DoiKernel::new(tail_function(k.m, k.r), k.m, Complex64::new(0.0, k.a), KernelMode::Factored),
        k.r,
        &lambda,
        &mu,
    );
    rec.into()
}

fn label(kind: &str, case: &CertCase) -> String {
    format!("{kind}/m{}-r{}-a{}", case.m, case.r, case.a)
}

fn certificate(rec: &mut Records, case: &CertCase, region: Region, grid_n: usize, kind: &str) {
    let name = format!("certificate/{}/certified-minimum", label(kind, case));
    let cert = PPolynomial::new(case.m, Complex64::new(0.0, case.a)).and_then(|p| p_lower_bound_cert(&p, region, grid_n));
    match cert {
        Ok(c) => {
            let certified = c.certified();
            let note = format!("observed {:e}, slack {:e}", c.c_observed, c.slack);
            rec.check(&name, certified, 0.0, c.pass && certified > 0.0, Some(note));
        }
        Err(e) => rec.error(&name, e),
    }
}

fn threshold(rec: &mut Records, case: &CertCase, region: Region, grid_n: usize, kind: &str) {
    let name = format!("threshold/{kind}/m{}-r{}", case.m, case.r);
    let (lo, mut hi) = THRESHOLD_BRACKET;
    if let Region::Exterior { lambda_max, .. } = region {
        hi = hi.min(lambda_max / 4.0);
    }
    match certificate_threshold(case.m, region, grid_n, lo, hi, THRESHOLD_TOL) {
        Ok(t) => {
            let side = if matches!(region, Region::Bounded { .. }) { "smallest" } else { "largest" };
            rec.info(&name, t.threshold, Some(format!("{side} certified a on a {grid_n}-point grid")));
        }
        Err(e) => rec.error(&name, e),
    }
}

/// `(1 - (x/r)²)³` on `[-r, r]`, zero outside.
fn bump(r: f64) -> ScalarFunction {
    let s = move |x: f64| 1.0 - (x / r).powi(2);
    ScalarFunction::real(
        move |x| if x.abs() < r { s(x).powi(3) } else { 0.0 },
        move |x| if x.abs() < r { -6.0 * x / (r * r) * s(x).powi(2) } else { 0.0 },
        move |x| {
            if x.abs() < r {
                let u = x / r;
                (-6.0 * s(x).powi(2) + 24.0 * u * u * s(x)) / (r * r)
            } else {
                0.0
            }
        },
    )
}

fn kernel_report(
    rec: &mut Records,
    config: &ExperimentConfig,
    name: &str,
    kernel: Result<DoiKernel, crate::doi::DoiError>,
    r: f64,
    lambda: &[f64],
    mu: &[f64],
) {
    let prefix = format!("kernel/{name}");
    match kernel.and_then(|k| bs_hypotheses_report(&k, lambda, mu, r)) {
        Ok(rep) => {
            rec.holds(&format!("{prefix}/sup-k-finite"), rep.sup_k.is_finite(), Some(format!("sup |K| = {:e}", rep.sup_k)));
            rec.holds(
                &format!("{prefix}/sup-weighted-dk-finite"),
                rep.sup_weighted_dk.is_finite(),
                Some(format!("sup (1+λ²)|∂K/∂λ| = {:e}", rep.sup_weighted_dk)),
            );
            rec.at_most(&format!("{prefix}/limit-mismatch"), rep.limit_mismatch, config.rm_cert.limit_tol);
            rec.info(
                &format!("{prefix}/dk-decay-exponent"),
                rep.dk_decay_exponent,
                Some(format!("required {}, strip estimate {}", rep.required_exponent, rep.strip_exponent)),
            );
        }
        Err(e) => rec.error(&format!("{prefix}/report"), e),
    }
}
