//! End-to-end runs of the command-line tool.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_abw-portfolio");

const SMALL: &str = r#"
[market]
gamma = 2.0
psi = 0.8
total_rate = 1.0

[problem]
alpha = 0.25
solutions = ["optimal", "budget_only", "divergence_only", "benchmark"]

[sweep]
bregman_exponent = [1.6, 2.0]

[numerics]
grid_size = 2000

[output]
quantile_stride = 10
density_points = 50
"#;

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn validate_accepts_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.toml", SMALL);
    let out = cli(&["validate", &good]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("7 cases"));

    let bad = write(
        dir.path(),
        "bad.toml",
        "[market]\ngamma = 0.5\npsi = 0.8\ntotal_rate = 1.0\n[problem]\nalpha = 1.5\nbudget = -1.0\n",
    );
    let out = cli(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("alpha") && err.contains("budget") && err.contains("market"), "{err}");

    let unknown = write(dir.path(), "unknown.toml", &format!("{SMALL}\n[extra]\nkey = 1\n"));
    assert_eq!(cli(&["validate", &unknown]).status.code(), Some(1));
}

#[test]
fn dry_run_prints_cases_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out_dir = dir.path().join("out");
    let out = cli(&["run", &cfg, "--dry-run", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.contains("optimal")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.contains("benchmark")).count(), 1);
    assert!(!out_dir.exists());
}

#[test]
fn run_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = cli(&["run", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = Command::new(BIN)
        .args(["run", &cfg, "--out", b.to_str().unwrap()])
        .env("ABW_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary, fs::read_to_string(b.join("summary.csv")).unwrap());
    let mut lines = summary.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("case,solution,p,alpha"));
    assert_eq!(lines.clone().count(), 7);
    assert!(lines.all(|l| l.ends_with(",ok")), "{summary}");
    assert!(!summary.contains('\r'));

    let case = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().contains("optimal_p2_"))
        .unwrap();
    let q = fs::read_to_string(case.join("quantile.csv")).unwrap();
    assert!(q.starts_with("u,benchmark_quantile,solution_quantile,xi\n"));
    assert_eq!(q.lines().count(), 201);
    let twin = b.join(case.file_name().unwrap());
    assert_eq!(q, fs::read_to_string(twin.join("quantile.csv")).unwrap());
    assert!(fs::read_to_string(case.join("density.csv")).unwrap().starts_with("x,benchmark_pdf,solution_pdf\n"));
    assert!(case.join("diagnostics.txt").exists());
    for svg in ["figure_quantiles.svg", "figure_densities.svg"] {
        let text = fs::read_to_string(a.join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn infeasible_cases_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("alpha = 0.25", "alpha = 0.25\nbudget = 0.5");
    let cfg = write(dir.path(), "c.toml", &text.replace(r#""optimal", "budget_only", "divergence_only", "benchmark""#, r#""optimal""#));
    let out_dir = dir.path().join("out");
    let out = cli(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "--grid", "500"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert!(summary.contains("infeasible"));
    let diag = fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .all(|p| p.join("diagnostics.txt").exists());
    assert!(diag);
}

#[test]
fn bad_thread_count_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = Command::new(BIN).args(["validate", &cfg]).env("ABW_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn figure1_writes_panels() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["figure1", "--out", dir.path().to_str().unwrap(), "--grid", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 14 * 200);
    for panel in ["a", "b", "c", "d"] {
        assert!(dir.path().join(format!("figure1_{panel}.svg")).exists());
    }
}
