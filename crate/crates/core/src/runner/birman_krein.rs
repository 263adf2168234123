use rayon::prelude::*;

use super::{BandRow, ExperimentConfig, NamedPotential, Records, SuiteOutput};
use crate::scattering::{
    band_grid, band_sweep, default_schedule, ssf_scattering, truncated_count_below,
    LatticeScatteringModel, ScatteringError,
};

/// Interior points where the limit ε → 0 is repeated with one more halving.
const STABILITY_POINTS: [f64; 3] = [-1.2, 0.1, 1.4];
/// Offset from the band edges for the counting comparison.
const EDGE_OFFSET: f64 = 0.01;

pub(super) fn run(config: &ExperimentConfig) -> SuiteOutput {
    let b = &config.birman_krein;
    let mut rec = Records::new("birman-krein");
    let grid = band_grid(b.band_points as usize);
    let schedule = b.schedule.clone().unwrap_or_else(default_schedule);
    let mut table = Vec::new();
    let outcomes: Vec<_> = b
        .potentials
        .par_iter()
        .map(|p| potential_suite(p, b.truncation as usize, &grid, &schedule))
        .collect();
    for (p, outcome) in b.potentials.iter().zip(outcomes) {
        let name = &p.name;
        match outcome {
            Ok(o) => {
                rec.at_most(&format!("{name}/max-residual"), o.max_residual, b.residual_tol);
                rec.at_most(&format!("{name}/max-unitarity-defect"), o.max_unitarity, b.unitarity_tol);
                rec.at_most(&format!("{name}/extrapolation-change"), o.stability, b.stability_tol);
                rec.check(
                    &format!("{name}/off-band-count-mismatch"),
                    o.count_mismatch,
                    0.0,
                    o.count_mismatch == 0.0,
                    Some(format!("{} bound states", o.bound_states)),
                );
                table.extend(o.rows);
            }
            Err(e) => rec.error(&format!("{name}/sweep"), e),
        }
    }
    let mut out: SuiteOutput = rec.into();
    out.band_table = table;
    out
}

struct PotentialOutcome {
    rows: Vec<BandRow>,
    max_residual: f64,
    max_unitarity: f64,
    stability: f64,
    count_mismatch: f64,
    bound_states: usize,
}

fn potential_suite(
    p: &NamedPotential,
    truncation: usize,
    grid: &[f64],
    schedule: &[f64],
) -> Result<PotentialOutcome, ScatteringError> {
    let model = LatticeScatteringModel::from_spec(&p.potential, truncation)?;
    let sweep = band_sweep(&model, grid, Some(schedule))?;
    let rows = sweep
        .points
        .iter()
        .map(|q| BandRow {
            potential: p.name.clone(),
            lambda: q.lambda,
            det_s_re: q.det_s.re,
            det_s_im: q.det_s.im,
            xi: q.xi,
            residual: q.residual,
        })
        .collect();
    let mut finer = schedule.to_vec();
    finer.push(schedule[schedule.len() - 1] / 2.0);
    let mut stability = 0.0f64;
    for l in STABILITY_POINTS {
        let a = ssf_scattering(&model, l, Some(schedule))?.value;
        let b = ssf_scattering(&model, l, Some(&finer))?.value;
        stability = stability.max((a - b).abs());
    }
    // Off the band the phase must reproduce the eigenvalue count of the
    // truncated chain, ξ = N₀ - N.
    let bound = model.bound_states();
    let l = model.truncation();
    let mut count_mismatch = 0.0f64;
    for lambda in [-2.0 - EDGE_OFFSET, 2.0 + EDGE_OFFSET] {
        if bound.iter().any(|e| (e - lambda).abs() < 1e-3) {
            continue;
        }
        let counted = truncated_count_below(l, |_| 0.0, lambda) as f64
            - truncated_count_below(l, |n| model.potential(n), lambda) as f64;
        let phase = ssf_scattering(&model, lambda, Some(schedule))?.value;
        count_mismatch = count_mismatch.max((phase - counted).abs().round());
    }
    Ok(PotentialOutcome {
        rows,
        max_residual: sweep.max_residual,
        max_unitarity: sweep.max_unitarity_defect,
        stability,
        count_mismatch,
        bound_states: bound.len(),
    })
}
