use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ssf-lab"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ssf-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn negative_dimension_is_rejected_by_field_name() {
    let cfg = scratch("negative.toml", "[trace_check]\ndim_min = -4\n");
    let out = bin().arg("trace-check").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("trace_check.dim_min"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

#[test]
fn unknown_keys_are_rejected() {
    let cfg = scratch("typo.toml", "[rm_cert]\ngrid = 10\n");
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("grid"), "{}", stderr(&out));
}

#[test]
fn rm_cert_bounded_certificate_passes() {
    let cfg = scratch(
        "rm.toml",
        "[rm_cert]\nthresholds = false\nexterior = []\nbounded = [{ m = 3, r = 1.0, a = 10.0 }]\n",
    );
    let out = bin().arg("rm-cert").arg("--config").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let json = stdout(&out);
    assert!(json.contains("\"rm-cert/certificate/bounded/m3-r1-a10/certified-minimum\""), "{json}");
    assert!(json.contains("\"schema_version\": 1"));
}

#[test]
fn trace_check_small_dims_pass_quickly() {
    let cfg = scratch(
        "trace.toml",
        "[trace_check]\ntrials = 100\ndim_min = 2\ndim_max = 16\ninvariance_trials = 100\n",
    );
    let start = Instant::now();
    let out = bin().args(["trace-check", "--seed", "1", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(start.elapsed() < Duration::from_secs(30));
    assert!(stderr(&out).contains("PASS"));
}

#[test]
fn reports_are_byte_identical_across_runs_and_workers() {
    let run = |jobs: &str| bin().args(["doi-check", "--seed", "11", "--jobs", jobs]).output().unwrap();
    let (a, b) = (run("1"), run("4"));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn flags_override_the_config_file() {
    let cfg = scratch("seeded.toml", "subcommand = \"trace-check\"\nseed = 3\n[trace_check]\ntrials = 5\ninvariance_trials = 2\ndeterminant_trials = 1\n");
    let dest = std::env::temp_dir().join(format!("ssf-lab-cli-{}-out.json", std::process::id()));
    let out = bin()
        .args(["rm-cert", "--seed", "9", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&dest)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let json = std::fs::read_to_string(&dest).unwrap();
    assert!(json.contains("\"subcommand\": \"rm-cert\""));
    assert!(json.contains("\"seed\": 9"));
}

#[test]
fn birman_krein_csv_has_the_band_table() {
    let cfg = scratch(
        "bk.toml",
        "[birman_krein]\nband_points = 8\n[[birman_krein.potentials]]\nname = \"dimer\"\npotential = { profile = \"sites\", values = [0.5, 0.0, -0.5] }\n",
    );
    let out = bin().args(["birman-krein", "--format", "csv", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("potential,lambda,re_det_s,im_det_s,xi,residual"));
    assert_eq!(lines.filter(|l| l.starts_with("dimer,")).count(), 8);
}

#[test]
fn failing_checks_give_a_nonzero_exit() {
    // a tolerance no floating-point computation can meet
    let cfg = scratch("strict.toml", "[doi_check]\ntrials = 3\ntolerance = 1e-300\n");
    let out = bin().args(["doi-check", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("FAIL doi-check/identity"), "{}", stderr(&out));
}
