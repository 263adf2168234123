//! Spectral shift function suites: trace formula, change of variables,
//! determinant phase and structural properties.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::{streams, worst, ExperimentConfig, Records, SuiteOutput};
use crate::random::{random_hermitian, random_low_rank, random_psd, seeded};
use crate::spectral::{eig_hermitian, HermitianOperator, ScalarFunction, SpectralDecomposition};
use crate::ssf::{build_phi, ssf_counting, ssf_via_determinant, ssf_via_invariance, trace_formula_residual, SsfError};

const FAMILIES: [&str; 5] = ["polynomial", "resolvent-re", "resolvent-im", "gaussian", "rational"];
const PROPERTY_TRIALS: u64 = 50;

pub(super) fn run(config: &ExperimentConfig) -> SuiteOutput {
    let mut rec = Records::new("trace-check");
    trace_formula(config, &mut rec);
    invariance(config, &mut rec);
    determinant(config, &mut rec);
    properties(config, &mut rec);
    rec.into()
}

fn dims<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> usize {
    rng.random_range(lo as usize..=hi as usize)
}

/// `H₀` and `H = H₀ + V`, both GUE-type, with their decompositions.
fn random_pair<R: Rng>(n: usize, rng: &mut R) -> (SpectralDecomposition, SpectralDecomposition, HermitianOperator) {
    let h0 = random_hermitian(n, rng);
    let v = random_hermitian(n, rng);
    let h = h0.add(&v).expect("same dimension");
    (eig_hermitian(&h0), eig_hermitian(&h), v)
}

fn family<R: Rng>(index: usize, rng: &mut R) -> ScalarFunction {
    let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(0.5..2.0));
    match index {
        0 => {
            let degree = rng.random_range(1..=4);
            ScalarFunction::polynomial((0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect())
        }
        1 => ScalarFunction::resolvent_power(z, 1).real_part(),
        2 => ScalarFunction::resolvent_power(z, 1).imag_part(),
        3 => ScalarFunction::gaussian(rng.random_range(-2.0..2.0), rng.random_range(0.5..2.0)),
        _ => {
            let i = Complex64::i();
            ScalarFunction::resolvent_power(i, 2).mul(&ScalarFunction::resolvent_power(-i, 2))
        }
    }
}

fn trace_formula(config: &ExperimentConfig, rec: &mut Records) {
    let t = &config.trace_check;
    let results: Vec<Result<[f64; 5], SsfError>> = (0..t.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded(config.seed, streams::TRACE + trial);
            let n = dims(&mut rng, t.dim_min, t.dim_max);
            let (d0, d, _) = random_pair(n, &mut rng);
            let mut out = [0.0; 5];
            for (k, slot) in out.iter_mut().enumerate() {
                let f = family(k, &mut rng);
                *slot = trace_formula_residual(&d0, &d, &f)?.relative();
            }
            Ok(out)
        })
        .collect();
    let (ok, errors) = split(results);
    if let Some(e) = errors.first() {
        rec.error("trace-formula/errors", e);
    }
    for (k, name) in FAMILIES.iter().enumerate() {
        rec.at_most(&format!("trace-formula/{name}/max-relative-residual"), worst(ok.iter().map(|r| r[k])), t.tolerance);
    }
    rec.info("trace-formula/trials", ok.len() as f64, None);
}

fn invariance(config: &ExperimentConfig, rec: &mut Records) {
    let t = &config.trace_check;
    for &m in &t.invariance_orders {
        let results: Vec<Result<Option<f64>, SsfError>> = (0..t.invariance_trials as u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = seeded(config.seed, streams::INVARIANCE + 1000 * m as u64 + trial);
                let n = dims(&mut rng, t.dim_min, t.dim_max);
                let (d0, d, _) = random_pair(n, &mut rng);
                // alternate between a cutoff enclosing both spectra and one inside them
                let radius = d0.spectral_radius().max(d.spectral_radius()).max(0.1);
                let cutoff = if trial % 2 == 0 { 2.0 * radius } else { 0.5 * radius };
                let phi = build_phi(m, cutoff)?;
                let via = ssf_via_invariance(&d0, &d, &phi)?;
                let direct = ssf_counting(&d0, &d)?;
                Ok(if via.matches(&direct, t.breakpoint_tol) { via.breakpoint_distance(&direct) } else { None })
            })
            .collect();
        let (ok, errors) = split(results);
        if let Some(e) = errors.first() {
            rec.error(&format!("invariance/m{m}/errors"), e);
        }
        let mismatched = ok.iter().filter(|r| r.is_none()).count();
        rec.check(
            &format!("invariance/m{m}/mismatched-trials"),
            mismatched as f64,
            0.0,
            mismatched == 0 && errors.is_empty(),
            None,
        );
        rec.info(
            &format!("invariance/m{m}/max-breakpoint-shift"),
            worst(ok.iter().flatten().copied()),
            Some(format!("relative tolerance {:e}", t.breakpoint_tol)),
        );
    }
}

fn determinant(config: &ExperimentConfig, rec: &mut Records) {
    const EXCLUSION: f64 = 1e-3;
    let t = &config.trace_check;
    let results: Vec<Result<(f64, usize), SsfError>> = (0..t.determinant_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded(config.seed, streams::DETERMINANT + trial);
            let n = dims(&mut rng, t.determinant_dim_min, t.determinant_dim_max);
            let (d0, d, v) = random_pair(n, &mut rng);
            let xi = ssf_counting(&d0, &d)?;
            let eigs: Vec<f64> = d0.eigenvalues().iter().chain(d.eigenvalues()).copied().collect();
            let lo = eigs.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
            let hi = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
            let mut err = 0.0f64;
            let mut points = 0;
            while points < t.determinant_points as usize {
                let lambda = rng.random_range(lo..hi);
                if eigs.iter().any(|e| (e - lambda).abs() < EXCLUSION) {
                    continue;
                }
                let est = ssf_via_determinant(&d0, &v, lambda, None)?;
                err = err.max((est.value - xi.eval(lambda) as f64).abs());
                points += 1;
            }
            Ok((err, points))
        })
        .collect();
    let (ok, errors) = split(results);
    if let Some(e) = errors.first() {
        rec.error("determinant/errors", e);
    }
    rec.at_most("determinant/max-abs-error", worst(ok.iter().map(|r| r.0)), t.determinant_tol);
    rec.info("determinant/points", ok.iter().map(|r| r.1).sum::<usize>() as f64, None);
}

/// Sign, rank bound and chain rule on random low-rank perturbations.
fn properties(config: &ExperimentConfig, rec: &mut Records) {
    let t = &config.trace_check;
    let results: Vec<Result<[bool; 3], SsfError>> = (0..PROPERTY_TRIALS)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded(config.seed, streams::PROPERTIES + trial);
            let n = dims(&mut rng, t.dim_min.max(2), t.dim_max);
            let rank = rng.random_range(1..=n.min(3));
            let h0 = random_hermitian(n, &mut rng);
            let d0 = eig_hermitian(&h0);
            let psd = random_psd(n, rank, 3.0, &mut rng);
            let up = eig_hermitian(&h0.add(&psd)?);
            let sign = ssf_counting(&d0, &up)?.min_value() >= 0;
            let w = random_low_rank(n, rank, 3.0, &mut rng);
            let h1 = h0.add(&w)?;
            let d1 = eig_hermitian(&h1);
            let rank_bound = ssf_counting(&d0, &d1)?.sup_abs() <= rank as i64;
            let d2 = eig_hermitian(&h1.add(&random_low_rank(n, rank, 3.0, &mut rng))?);
            let chained = ssf_counting(&d1, &d2)?.add(&ssf_counting(&d0, &d1)?);
            let chain = chained.matches(&ssf_counting(&d0, &d2)?, 0.0);
            Ok([sign, rank_bound, chain])
        })
        .collect();
    let (ok, errors) = split(results);
    if let Some(e) = errors.first() {
        rec.error("properties/errors", e);
    }
    for (k, name) in ["positive-perturbation-sign", "rank-bound", "chain-rule"].iter().enumerate() {
        let violations = ok.iter().filter(|r| !r[k]).count();
        rec.check(&format!("properties/{name}/violations"), violations as f64, 0.0, violations == 0, None);
    }
}

/// Successful results in trial order, plus every error.
pub(super) fn split<T, E>(results: Vec<Result<T, E>>) -> (Vec<T>, Vec<E>) {
    let mut ok = Vec::new();
    let mut err = Vec::new();
    for r in results {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => err.push(e),
        }
    }
    (ok, err)
}
