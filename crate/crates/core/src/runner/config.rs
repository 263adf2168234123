//! Experiment configuration. Every section has working defaults, so an empty
//! file (or none) runs the default desk-scale suites. Counts and sizes are
//! signed so that negative values reach validation and get a field-level
//! message instead of a parse error.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::scattering::ScatteringPotential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    TraceCheck,
    DoiCheck,
    RmCert,
    DiracSchatten,
    BirmanKrein,
    #[default]
    All,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::TraceCheck => "trace-check",
            Subcommand::DoiCheck => "doi-check",
            Subcommand::RmCert => "rm-cert",
            Subcommand::DiracSchatten => "dirac-schatten",
            Subcommand::BirmanKrein => "birman-krein",
            Subcommand::All => "all",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    pub seed: u64,
    /// Worker threads; does not affect results and is not echoed.
    #[serde(skip_serializing)]
    pub jobs: Option<i64>,
    pub trace_check: TraceCheckConfig,
    pub doi_check: DoiCheckConfig,
    pub rm_cert: RmCertConfig,
    pub dirac: DiracConfig,
    pub birman_krein: BirmanKreinConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            subcommand: Subcommand::All,
            seed: 7,
            jobs: None,
            trace_check: TraceCheckConfig::default(),
            doi_check: DoiCheckConfig::default(),
            rm_cert: RmCertConfig::default(),
            dirac: DiracConfig::default(),
            birman_krein: BirmanKreinConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceCheckConfig {
    pub trials: i64,
    pub dim_min: i64,
    pub dim_max: i64,
    pub tolerance: f64,
    pub invariance_trials: i64,
    pub invariance_orders: Vec<u32>,
    pub breakpoint_tol: f64,
    pub determinant_trials: i64,
    pub determinant_points: i64,
    pub determinant_dim_min: i64,
    pub determinant_dim_max: i64,
    pub determinant_tol: f64,
}

impl Default for TraceCheckConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            dim_min: 2,
            dim_max: 32,
            tolerance: 1e-10,
            invariance_trials: 100,
            invariance_orders: vec![3, 5],
            breakpoint_tol: 1e-9,
            determinant_trials: 20,
            determinant_points: 50,
            determinant_dim_min: 4,
            determinant_dim_max: 12,
            determinant_tol: 1e-6,
        }
    }
}

/// `(m, z)` pair; `z` is written `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderCase {
    pub m: u32,
    pub z: [f64; 2],
}

impl OrderCase {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z[0], self.z[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DoiCheckConfig {
    pub trials: i64,
    pub dim: i64,
    pub cases: Vec<OrderCase>,
    pub tolerance: f64,
    pub decomposition_trials: i64,
    pub decomposition_cutoff: f64,
    pub decomposition_tol: f64,
}

impl Default for DoiCheckConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            dim: 12,
            cases: vec![OrderCase { m: 3, z: [0.0, 2.0] }, OrderCase { m: 5, z: [0.0, 3.0] }],
            tolerance: 1e-8,
            decomposition_trials: 10,
            decomposition_cutoff: 1.0,
            decomposition_tol: 1e-10,
        }
    }
}

/// Certificate case with `z = i·a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertCase {
    pub m: u32,
    pub r: f64,
    pub a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RmCertConfig {
    pub grid_n: i64,
    pub bounded: Vec<CertCase>,
    pub exterior: Vec<CertCase>,
    /// Bisect for the pass/fail boundary in `a` (reported, not asserted).
    pub thresholds: bool,
    pub threshold_grid_n: i64,
    /// Kernel with compactly supported `f` (bump on `[-1, 1]`).
    pub compact_kernel: CertCase,
    /// Kernel with `f = θ(λ)(λ^m - i)^{-1}`, `θ` vanishing on `[-r, r]`.
    pub tail_kernel: CertCase,
    pub grid_inner: f64,
    pub grid_edge: f64,
    pub limit_tol: f64,
}

impl Default for RmCertConfig {
    fn default() -> Self {
        Self {
            grid_n: 501,
            bounded: vec![
                CertCase { m: 3, r: 1.0, a: 10.0, lambda_max: None },
                CertCase { m: 5, r: 1.0, a: 20.0, lambda_max: None },
            ],
            exterior: vec![CertCase { m: 3, r: 1.0, a: 0.01, lambda_max: Some(100.0) }],
            thresholds: true,
            threshold_grid_n: 201,
            compact_kernel: CertCase { m: 3, r: 1.0, a: 10.0, lambda_max: None },
            tail_kernel: CertCase { m: 3, r: 1.0, a: 0.01, lambda_max: None },
            grid_inner: 3.0,
            grid_edge: 1e6,
            limit_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracConfig {
    pub mass: f64,
    pub z: [f64; 2],
    pub h_ref: f64,
    pub n_ref: i64,
    pub schatten_ns: Vec<i64>,
    pub stabilization_tol: f64,
    /// `(r, k, p)` with a hard stabilization bound.
    pub stabilization_case: [f64; 3],
    /// `(r, k)` pairs for the threshold-law study.
    pub law_pairs: Vec<[u32; 2]>,
    pub decay_fit_n: i64,
    pub decay_fit_h: f64,
    pub decay_fit_r: f64,
    pub decay_fit_k: u32,
    pub identity_ns: Vec<i64>,
    pub identity_seeds: i64,
    pub mpow: u32,
    pub commutator_r: f64,
    pub commutator_k: u32,
    pub potential_c: f64,
    pub potential_rho: f64,
    pub background_c: f64,
    pub holder_n: i64,
    pub holder_seeds: i64,
    pub trace_norm_ns: Vec<i64>,
    pub bump_amplitude: f64,
    pub bump_radius: f64,
    pub commutator_ns: Vec<i64>,
    pub commutator_tol: f64,
    pub smoke_n_3d: i64,
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            z: [0.0, 1.0],
            h_ref: 0.5,
            n_ref: 128,
            schatten_ns: vec![64, 128, 256],
            stabilization_tol: 0.05,
            stabilization_case: [2.0, 2.0, 1.5],
            law_pairs: vec![[1, 1], [2, 1], [1, 2], [2, 3]],
            decay_fit_n: 256,
            decay_fit_h: 0.05,
            decay_fit_r: 10.0,
            decay_fit_k: 3,
            identity_ns: vec![32, 64],
            identity_seeds: 20,
            mpow: 3,
            commutator_r: 2.0,
            commutator_k: 2,
            potential_c: 1.0,
            potential_rho: 4.0,
            background_c: 0.5,
            holder_n: 32,
            holder_seeds: 5,
            trace_norm_ns: vec![32, 64, 128],
            bump_amplitude: 0.8,
            bump_radius: 2.0,
            commutator_ns: vec![64, 128],
            commutator_tol: 0.2,
            smoke_n_3d: 4,
        }
    }
}

impl DiracConfig {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.z[0], self.z[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedPotential {
    pub name: String,
    pub potential: ScatteringPotential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BirmanKreinConfig {
    pub band_points: i64,
    pub truncation: i64,
    pub potentials: Vec<NamedPotential>,
    /// Explicit ε-schedule for the determinant phase; default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    pub residual_tol: f64,
    pub unitarity_tol: f64,
    pub stability_tol: f64,
}

impl Default for BirmanKreinConfig {
    fn default() -> Self {
        let named = |name: &str, potential| NamedPotential { name: name.into(), potential };
        Self {
            band_points: 50,
            truncation: 2000,
            potentials: vec![
                named("single-repulsive", ScatteringPotential::SingleSite { v: 0.7 }),
                named("single-attractive", ScatteringPotential::SingleSite { v: -1.5 }),
                named(
                    "five-site-repulsive",
                    ScatteringPotential::Random { half_width: 2, amplitude: 1.0, lo: 0.2, seed: 1 },
                ),
                named(
                    "five-site-attractive",
                    ScatteringPotential::Random { half_width: 2, amplitude: -1.0, lo: 0.2, seed: 2 },
                ),
                named(
                    "five-site-mixed",
                    ScatteringPotential::Random { half_width: 2, amplitude: 1.2, lo: -1.0, seed: 3 },
                ),
            ],
            schedule: None,
            residual_tol: 1e-5,
            unitarity_tol: 1e-8,
            stability_tol: 1e-7,
        }
    }
}

/// A rejected configuration value.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

struct Validator {
    errors: Vec<FieldError>,
}

impl Validator {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError { field: field.into(), message: message.into() });
    }

    fn at_least(&mut self, field: &str, value: i64, min: i64) {
        if value < min {
            self.fail(field, format!("must be at least {min}, got {value}"));
        }
    }

    fn positive(&mut self, field: &str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.fail(field, format!("must be a positive number, got {value}"));
        }
    }

    fn odd(&mut self, field: &str, m: u32) {
        if m % 2 == 0 {
            self.fail(field, format!("order must be odd, got {m}"));
        }
    }

    fn off_axis(&mut self, field: &str, z: [f64; 2]) {
        if !(z[0].is_finite() && z[1].is_finite() && z[1] != 0.0) {
            self.fail(field, format!("needs a non-zero imaginary part, got {z:?}"));
        }
    }

    fn lattice_sizes(&mut self, field: &str, ns: &[i64]) {
        if ns.len() < 2 {
            self.fail(field, "needs at least two lattice sizes");
        }
        for (i, &n) in ns.iter().enumerate() {
            if n < 2 || n % 2 != 0 {
                self.fail(&format!("{field}[{i}]"), format!("lattice size must be even and at least 2, got {n}"));
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// All violations, each naming its field.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut v = Validator { errors: Vec::new() };
        if let Some(j) = self.jobs {
            v.at_least("jobs", j, 1);
        }

        let t = &self.trace_check;
        v.at_least("trace_check.trials", t.trials, 1);
        v.at_least("trace_check.dim_min", t.dim_min, 1);
        v.at_least("trace_check.dim_max", t.dim_max, t.dim_min.max(1));
        v.positive("trace_check.tolerance", t.tolerance);
        v.at_least("trace_check.invariance_trials", t.invariance_trials, 1);
        for (i, &m) in t.invariance_orders.iter().enumerate() {
            v.odd(&format!("trace_check.invariance_orders[{i}]"), m);
        }
        v.positive("trace_check.breakpoint_tol", t.breakpoint_tol);
        v.at_least("trace_check.determinant_trials", t.determinant_trials, 1);
        v.at_least("trace_check.determinant_points", t.determinant_points, 1);
        v.at_least("trace_check.determinant_dim_min", t.determinant_dim_min, 2);
        v.at_least("trace_check.determinant_dim_max", t.determinant_dim_max, t.determinant_dim_min.max(2));
        v.positive("trace_check.determinant_tol", t.determinant_tol);

        let d = &self.doi_check;
        v.at_least("doi_check.trials", d.trials, 1);
        v.at_least("doi_check.dim", d.dim, 1);
        for (i, c) in d.cases.iter().enumerate() {
            v.odd(&format!("doi_check.cases[{i}].m"), c.m);
            v.off_axis(&format!("doi_check.cases[{i}].z"), c.z);
        }
        v.positive("doi_check.tolerance", d.tolerance);
        v.at_least("doi_check.decomposition_trials", d.decomposition_trials, 0);
        v.positive("doi_check.decomposition_cutoff", d.decomposition_cutoff);
        v.positive("doi_check.decomposition_tol", d.decomposition_tol);

        let r = &self.rm_cert;
        v.at_least("rm_cert.grid_n", r.grid_n, 3);
        v.at_least("rm_cert.threshold_grid_n", r.threshold_grid_n, 3);
        let cases = r.bounded.iter().map(|c| ("bounded", c)).chain(r.exterior.iter().map(|c| ("exterior", c)));
        for (i, (kind, c)) in cases.enumerate() {
            let field = format!("rm_cert.{kind}[{i}]");
            v.odd(&format!("{field}.m"), c.m);
            v.positive(&format!("{field}.r"), c.r);
            v.positive(&format!("{field}.a"), c.a);
            if let Some(lm) = c.lambda_max {
                if !(lm > c.r) {
                    v.fail(&format!("{field}.lambda_max"), format!("must exceed r = {}, got {lm}", c.r));
                }
            }
        }
        for (name, c) in [("compact_kernel", &r.compact_kernel), ("tail_kernel", &r.tail_kernel)] {
            v.odd(&format!("rm_cert.{name}.m"), c.m);
            v.positive(&format!("rm_cert.{name}.r"), c.r);
            v.positive(&format!("rm_cert.{name}.a"), c.a);
        }
        v.positive("rm_cert.grid_inner", r.grid_inner);
        if !(r.grid_edge > r.grid_inner) {
            v.fail("rm_cert.grid_edge", format!("must exceed grid_inner = {}", r.grid_inner));
        }
        v.positive("rm_cert.limit_tol", r.limit_tol);

        let q = &self.dirac;
        v.positive("dirac.mass", q.mass);
        v.off_axis("dirac.z", q.z);
        v.positive("dirac.h_ref", q.h_ref);
        v.at_least("dirac.n_ref", q.n_ref, 2);
        v.lattice_sizes("dirac.schatten_ns", &q.schatten_ns);
        v.positive("dirac.stabilization_tol", q.stabilization_tol);
        let [sr, sk, sp] = q.stabilization_case;
        v.positive("dirac.stabilization_case.r", sr);
        if !(sk >= 1.0 && sk.fract() == 0.0) {
            v.fail("dirac.stabilization_case.k", format!("must be a positive integer, got {sk}"));
        }
        if !(sp >= 1.0) {
            v.fail("dirac.stabilization_case.p", format!("Schatten index must be at least 1, got {sp}"));
        }
        for (i, [pr, pk]) in q.law_pairs.iter().enumerate() {
            if *pr == 0 || *pk == 0 {
                v.fail(&format!("dirac.law_pairs[{i}]"), "r and k must be positive");
            }
        }
        v.at_least("dirac.decay_fit_n", q.decay_fit_n, 16);
        v.positive("dirac.decay_fit_h", q.decay_fit_h);
        v.positive("dirac.decay_fit_r", q.decay_fit_r);
        v.at_least("dirac.decay_fit_k", q.decay_fit_k as i64, 1);
        v.lattice_sizes("dirac.identity_ns", &q.identity_ns);
        v.at_least("dirac.identity_seeds", q.identity_seeds, 1);
        v.odd("dirac.mpow", q.mpow);
        v.positive("dirac.commutator_r", q.commutator_r);
        v.positive("dirac.potential_c", q.potential_c);
        v.positive("dirac.potential_rho", q.potential_rho);
        if !(q.background_c.is_finite() && q.background_c >= 0.0) {
            v.fail("dirac.background_c", format!("must be non-negative, got {}", q.background_c));
        }
        v.at_least("dirac.holder_n", q.holder_n, 2);
        v.at_least("dirac.holder_seeds", q.holder_seeds, 1);
        v.lattice_sizes("dirac.trace_norm_ns", &q.trace_norm_ns);
        v.positive("dirac.bump_radius", q.bump_radius);
        v.lattice_sizes("dirac.commutator_ns", &q.commutator_ns);
        v.positive("dirac.commutator_tol", q.commutator_tol);
        v.at_least("dirac.smoke_n_3d", q.smoke_n_3d, 2);

        let b = &self.birman_krein;
        v.at_least("birman_krein.band_points", b.band_points, 2);
        v.at_least("birman_krein.truncation", b.truncation, 8);
        for (i, p) in b.potentials.iter().enumerate() {
            let width = match &p.potential {
                ScatteringPotential::SingleSite { .. } => 0,
                ScatteringPotential::Sites { values } => {
                    if values.len() % 2 == 0 {
                        v.fail(&format!("birman_krein.potentials[{i}].values"), "needs an odd number of sites");
                    }
                    values.len() / 2
                }
                ScatteringPotential::Random { half_width, .. } => *half_width,
            };
            if 4 * width as i64 >= b.truncation {
                v.fail(&format!("birman_krein.potentials[{i}]"), "support must stay below truncation/4");
            }
        }
        if let Some(s) = &b.schedule {
            if s.is_empty() || s.iter().any(|e| !(*e > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                v.fail("birman_krein.schedule", "must be a non-empty, strictly decreasing list of positive numbers");
            }
        }
        v.positive("birman_krein.residual_tol", b.residual_tol);
        v.positive("birman_krein.unitarity_tol", b.unitarity_tol);
        v.positive("birman_krein.stability_tol", b.stability_tol);

        if v.errors.is_empty() {
            Ok(())
        } else {
            Err(v.errors)
        }
    }
}
