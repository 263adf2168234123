//! Double-operator-integral identity, collision detection, the split of the
//! resolvent difference of φ(H) and a unit-kernel report.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::trace::split;
use super::{streams, worst, ExperimentConfig, OrderCase, Records, SuiteOutput};
use crate::doi::{
    bs_hypotheses_report, doi_identity_residual, resolvent_g, symmetric_grid,
    theorem_rm_decomposition_check, DoiError, DoiKernel, KernelMode,
};
use crate::random::{random_hermitian, seeded};
use crate::spectral::{eig_hermitian, HermitianOperator, ScalarFunction};

/// Redraws allowed per trial after an antidiagonal collision.
const MAX_REDRAWS: u64 = 16;

pub(super) fn run(config: &ExperimentConfig) -> SuiteOutput {
    let mut rec = Records::new("doi-check");
    for (i, case) in config.doi_check.cases.iter().enumerate() {
        identity(config, i as u64, case, &mut rec);
    }
    collision_detection(&mut rec);
    decomposition(config, &mut rec);
    unit_kernel(&mut rec);
    rec.into()
}

struct TrialOutcome {
    relative: f64,
    redraws: u64,
}

fn identity(config: &ExperimentConfig, case_index: u64, case: &OrderCase, rec: &mut Records) {
    let c = &config.doi_check;
    let z = case.z();
    let n = c.dim as usize;
    let results: Vec<Result<TrialOutcome, DoiError>> = (0..c.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let base = streams::DOI + (case_index << 24) + trial * MAX_REDRAWS;
            for redraw in 0..MAX_REDRAWS {
                let mut rng = seeded(config.seed, base + redraw);
                let h0 = random_hermitian(n, &mut rng);
                let h = h0.add(&random_hermitian(n, &mut rng))?;
                let f = ScalarFunction::gaussian(rng.random_range(-1.0..1.0), rng.random_range(1.0..3.0));
                match doi_identity_residual(&eig_hermitian(&h0), &eig_hermitian(&h), &f, case.m, z) {
                    Ok(chk) => return Ok(TrialOutcome { relative: chk.relative(), redraws: redraw }),
                    Err(DoiError::AntidiagonalCollision { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(DoiError::InvalidRegion(format!("{MAX_REDRAWS} consecutive antidiagonal collisions")))
        })
        .collect();
    let (ok, errors) = split(results);
    let label = format!("identity/m{}-z{}", case.m, fmt_z(z));
    if let Some(e) = errors.first() {
        rec.error(&format!("{label}/errors"), e);
    }
    rec.at_most(&format!("{label}/max-relative-residual"), worst(ok.iter().map(|o| o.relative)), c.tolerance);
    rec.info(&format!("{label}/collision-redraws"), ok.iter().map(|o| o.redraws).sum::<u64>() as f64, None);
}

fn fmt_z(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

/// A pair built with `g(λ) = g(μ)` at `λ = -√3a`, `μ = √3a` (m = 3,
/// `z = ia`) must be refused.
fn collision_detection(rec: &mut Records) {
    let a = 2.0;
    let x = 3f64.sqrt() * a;
    let d0 = eig_hermitian(&HermitianOperator::diagonal(&[-x, 0.4]));
    let d = eig_hermitian(&HermitianOperator::diagonal(&[x, 1.3]));
    let f = ScalarFunction::gaussian(0.0, 1.0);
    let out = doi_identity_residual(&d0, &d, &f, 3, Complex64::new(0.0, a));
    let detected = matches!(out, Err(DoiError::AntidiagonalCollision { .. }));
    rec.holds("collision/detected", detected, None);
}

fn decomposition(config: &ExperimentConfig, rec: &mut Records) {
    let c = &config.doi_check;
    let mut orders: Vec<u32> = c.cases.iter().map(|k| k.m).collect();
    orders.sort_unstable();
    orders.dedup();
    for m in orders {
        let results: Vec<Result<f64, DoiError>> = (0..c.decomposition_trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = seeded(config.seed, streams::DECOMPOSITION + 1000 * m as u64 + trial);
                let n = c.dim as usize;
                let h0 = random_hermitian(n, &mut rng);
                let h = h0.add(&random_hermitian(n, &mut rng))?;
                let chk = theorem_rm_decomposition_check(&eig_hermitian(&h0), &eig_hermitian(&h), m, c.decomposition_cutoff)?;
                Ok(chk.residual)
            })
            .collect();
        let (ok, errors) = split(results);
        if let Some(e) = errors.first() {
            rec.error(&format!("decomposition/m{m}/errors"), e);
        }
        rec.at_most(&format!("decomposition/m{m}/max-residual"), worst(ok), c.decomposition_tol);
    }
}

/// With `f = g` the kernel is identically one.
fn unit_kernel(rec: &mut Records) {
    let z = Complex64::new(0.0, 2.0);
    let grid = symmetric_grid(3.0, 1e3, 31, 10);
    let report = DoiKernel::new(resolvent_g(3, z), 3, z, KernelMode::Direct)
        .and_then(|k| bs_hypotheses_report(&k, &grid, &grid, 1.0));
    match report {
        Ok(r) => rec.at_most("kernel/unit/sup-deviation", (r.sup_k - 1.0).abs(), 1e-12),
        Err(e) => rec.error("kernel/unit/sup-deviation", e),
    }
}
