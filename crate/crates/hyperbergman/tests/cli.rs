use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperbergman"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hyperbergman")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn rows<'a>(csv: &'a str, case: &'a str, metric: &'a str) -> impl Iterator<Item = Vec<&'a str>> + 'a {
    csv.lines().skip(1).map(|l| l.split(',').collect::<Vec<_>>()).filter(move |f| f[1] == case && f[6] == metric)
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["experiment verify-algebra\n", "experiment = no-such\n", "experiment = verify-cr\nbogus = 1\n", "experiment = verify-cauchy\nlevels = 0\n", "experiment = bergman-kernel\ndegrees = 0\n", "radius = 0.5\n"] {
        let cfg = write_config(dir.path(), "bad.cfg", body);
        let out = run(&["--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{body:?}");
        let err = stderr(&out);
        assert!(err.starts_with("error kind=config message=\""), "{err}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn missing_config_file_exits_2() {
    let out = run(&["--config", "/nonexistent/run.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind=config"));
}

#[test]
fn unknown_tolerance_exits_2() {
    let out = run(&["--experiment", "verify-algebra", "--tol", "closed_form=1e-3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind=config"));
}

#[test]
fn zero_workers_exits_2() {
    let out = run(&["--experiment", "verify-algebra", "--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn impossible_tolerance_exits_1_with_full_csv() {
    let out = run(&["--experiment", "verify-algebra", "--tol", "algebra=0"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error kind=tolerance message=\""), "{err}");
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().count() > 1);
    assert!(csv.lines().skip(1).any(|l| l.ends_with(",false")));
}

#[test]
fn unwritable_output_exits_2() {
    let out = run(&["--experiment", "verify-algebra", "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind=output"));
}

#[test]
fn csv_is_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cov.cfg", "experiment = verify-covariance\ntheta = 0.7\nseed = 11\n");
    let mut outputs = Vec::new();
    for (k, workers) in ["1", "1", "2"].iter().enumerate() {
        let path = dir.path().join(format!("out{k}.csv"));
        let out = run(&["--config", &cfg, "--workers", workers, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(out.stdout.is_empty());
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alg.cfg", "experiment = verify-algebra\nseed = 3\n");
    let a = run(&["--config", &cfg]);
    let b = run(&["--config", &cfg, "--seed", "4"]);
    let c = run(&["--experiment", "verify-algebra", "--seed", "3"]);
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let out = run(&["--experiment", "verify-algebra"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let value = csv.lines().nth(1).unwrap().split(',').nth(7).unwrap();
    let mantissa = value.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{value}");
}

#[test]
fn cauchy_reproduces_constant_on_ball() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "cauchy.cfg", "experiment = verify-cauchy\nradius = 0.8\nu = 0, 0, 0, 0\nlevels = 3\n");
    let out = run(&["--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let one: Vec<_> = rows(&csv, "one", "cauchy_interior").collect();
    assert_eq!(one.len(), 20);
    for r in one {
        assert!(r[7].parse::<f64>().unwrap() < 1e-6, "{r:?}");
    }
}

#[test]
fn bergman_kernel_matches_closed_form_at_degree_8() {
    let out = run(&["--experiment", "bergman-kernel"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    let top: Vec<_> = rows(&csv, "unit_ball", "closed_form_max_relative").filter(|r| r[4] == "8").collect();
    assert_eq!(top.len(), 1);
    assert!(top[0][7].parse::<f64>().unwrap() < 1e-2);
    assert_eq!(top[0][11], "true");
}

#[test]
fn help_documents_columns_and_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in ["--tol", "--workers", "closed_form_max_relative", "Exit status", "kind=<config"] {
        assert!(text.contains(needle), "{needle}");
    }
}
