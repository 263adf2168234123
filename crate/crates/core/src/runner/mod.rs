//! Config-driven verification suites.
//!
//! Each suite turns its checks into [`Record`]s; the report is the sorted
//! union. Computational errors become failed records rather than aborting the
//! run. Trials fan out over rayon, but every trial draws from its own seeded
//! stream and results are gathered in trial order, so the JSON is the same
//! for any number of workers.

mod birman_krein;
pub mod config;
mod dirac;
mod doi;
mod rm_cert;
mod trace;

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use config::{
    BirmanKreinConfig, CertCase, DiracConfig, DoiCheckConfig, ExperimentConfig, FieldError,
    NamedPotential, OrderCase, RmCertConfig, Subcommand, TraceCheckConfig,
};

/// Bumped whenever a field of [`ExperimentReport`] or the CSV layout changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    pub value: f64,
    /// `None` for informational records, which always pass.
    pub threshold: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One row of the Birman-Krein band table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandRow {
    pub potential: String,
    pub lambda: f64,
    pub det_s_re: f64,
    pub det_s_im: f64,
    pub xi: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteTiming {
    pub suite: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub subcommand: Subcommand,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub band_table: Vec<BandRow>,
    pub pass: bool,
    /// Wall-clock time per suite. Kept out of the JSON so that reports for
    /// the same configuration compare equal byte for byte.
    #[serde(skip)]
    pub timings: Vec<SuiteTiming>,
}

/// Collects the records of one suite under a common prefix.
pub(crate) struct Records {
    prefix: &'static str,
    out: Vec<Record>,
}

impl Records {
    fn new(prefix: &'static str) -> Self {
        Self { prefix, out: Vec::new() }
    }

    fn push(&mut self, name: &str, value: f64, threshold: Option<f64>, pass: bool, note: Option<String>) {
        self.out.push(Record {
            name: format!("{}/{}", self.prefix, name),
            value,
            threshold,
            pass,
            note,
        });
    }

    /// Passes iff `value ≤ threshold` (NaN fails).
    pub(crate) fn at_most(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value, Some(threshold), value <= threshold, None);
    }

    /// A boolean outcome; `value` is 1 for true.
    pub(crate) fn holds(&mut self, name: &str, ok: bool, note: Option<String>) {
        self.push(name, ok as u8 as f64, Some(1.0), ok, note);
    }

    pub(crate) fn check(&mut self, name: &str, value: f64, threshold: f64, pass: bool, note: Option<String>) {
        self.push(name, value, Some(threshold), pass, note);
    }

    pub(crate) fn info(&mut self, name: &str, value: f64, note: Option<String>) {
        self.push(name, value, None, true, note);
    }

    pub(crate) fn error(&mut self, name: &str, err: impl std::fmt::Display) {
        self.push(name, f64::NAN, None, false, Some(format!("error: {err}")));
    }

    fn finish(self) -> Vec<Record> {
        self.out
    }
}

pub(crate) struct SuiteOutput {
    records: Vec<Record>,
    band_table: Vec<BandRow>,
}

impl From<Records> for SuiteOutput {
    fn from(r: Records) -> Self {
        Self { records: r.finish(), band_table: Vec::new() }
    }
}

/// Validates and runs `config`. Validation failures are returned before any
/// computation starts.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport, Vec<FieldError>> {
    config.validate()?;
    let jobs = config.jobs.map(|j| j as usize);
    let body = || run_suites(config);
    match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => Ok(pool.install(body)),
            Err(e) => Err(vec![FieldError { field: "jobs".into(), message: e.to_string() }]),
        },
        None => Ok(body()),
    }
}

fn run_suites(config: &ExperimentConfig) -> ExperimentReport {
    type Suite = fn(&ExperimentConfig) -> SuiteOutput;
    let all: [(Subcommand, Suite); 5] = [
        (Subcommand::TraceCheck, trace::run),
        (Subcommand::DoiCheck, doi::run),
        (Subcommand::RmCert, rm_cert::run),
        (Subcommand::DiracSchatten, dirac::run),
        (Subcommand::BirmanKrein, birman_krein::run),
    ];
    let mut records = Vec::new();
    let mut band_table = Vec::new();
    let mut timings = Vec::new();
    for (sub, suite) in all {
        if config.subcommand != Subcommand::All && config.subcommand != sub {
            continue;
        }
        let start = Instant::now();
        let out = suite(config);
        timings.push(SuiteTiming { suite: sub.name().into(), seconds: secs(start.elapsed()) });
        records.extend(out.records);
        band_table.extend(out.band_table);
    }
    records.sort_by(|a, b| a.name.cmp(&b.name));
    let pass = records.iter().all(|r| r.pass);
    ExperimentReport {
        schema_version: SCHEMA_VERSION,
        subcommand: config.subcommand,
        seed: config.seed,
        config: config.clone(),
        records,
        band_table,
        pass,
        timings,
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Records as CSV (`name,value,threshold,pass,note`).
    pub fn records_csv(&self) -> String {
        let mut s = String::from("name,value,threshold,pass,note\n");
        for r in &self.records {
            let threshold = r.threshold.map(|t| format!("{t:e}")).unwrap_or_default();
            let note = r.note.as_deref().map(csv_field).unwrap_or_default();
            let _ = writeln!(s, "{},{:e},{},{},{}", csv_field(&r.name), r.value, threshold, r.pass, note);
        }
        s
    }

    /// The band table as CSV (`potential,lambda,re_det_s,im_det_s,xi,residual`).
    pub fn band_csv(&self) -> String {
        let mut s = String::from("potential,lambda,re_det_s,im_det_s,xi,residual\n");
        for r in &self.band_table {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e}",
                csv_field(&r.potential),
                r.lambda,
                r.det_s_re,
                r.det_s_im,
                r.xi,
                r.residual
            );
        }
        s
    }

    /// `birman-krein` reports carry the band table; everything else the records.
    pub fn to_csv(&self) -> String {
        if self.subcommand == Subcommand::BirmanKrein {
            self.band_csv()
        } else {
            self.records_csv()
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.pass)
    }

    /// Short human-readable summary: failures, timings and the verdict.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let failed = self.failures().count();
        let _ = writeln!(
            s,
            "{} (seed {}): {} records, {} failed",
            self.subcommand.name(),
            self.seed,
            self.records.len(),
            failed
        );
        for r in self.failures() {
            let threshold = r.threshold.map(|t| format!(" (threshold {t:e})")).unwrap_or_default();
            let note = r.note.as_deref().map(|n| format!(" [{n}]")).unwrap_or_default();
            let _ = writeln!(s, "  FAIL {} = {:e}{threshold}{note}", r.name, r.value);
        }
        for t in &self.timings {
            let _ = writeln!(s, "  {:<15} {:8.2} s", t.suite, t.seconds);
        }
        let _ = writeln!(s, "{}", if self.pass { "PASS" } else { "FAIL" });
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Stream bases so that suites never share random draws.
pub(crate) mod streams {
    pub const TRACE: u64 = 1 << 40;
    pub const INVARIANCE: u64 = 2 << 40;
    pub const DETERMINANT: u64 = 3 << 40;
    pub const PROPERTIES: u64 = 4 << 40;
    pub const DOI: u64 = 5 << 40;
    pub const DECOMPOSITION: u64 = 6 << 40;
}

/// Largest value, treating NaN as larger than everything.
pub(crate) fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .fold(0.0, |acc: f64, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}
