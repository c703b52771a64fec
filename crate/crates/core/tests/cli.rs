//! End-to-end runs of the `loglab` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn loglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loglab"))
        .args(args)
        .env_remove("LOGLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn header_of(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixture(&format!("golden/{name}"))).unwrap().trim_end().to_string()
}

#[test]
fn verify_hermite_passes() {
    let o = loglab(&["verify", "hermite"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("H_4(2; 1)"));
}

#[test]
fn unknown_suite_exits_two_with_the_list() {
    let o = loglab(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    for suite in loglab::verify::SUITES {
        assert!(err.contains(suite), "{err}");
    }
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[estimate]\nd = 2\nwhat = 1\n").unwrap();
    let o = loglab(&["estimate", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("what"));

    let missing = loglab(&["estimate", "--config", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));

    std::fs::write(&bad, "[estimate]\nd = 2\nN = 4\nlambda = 0.1\nK = 1\nL = 1\np = 0.5\nnsamples = 10\n")
        .unwrap();
    assert_eq!(loglab(&["estimate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let no_section = dir.path().join("empty.toml");
    std::fs::write(&no_section, "").unwrap();
    assert_eq!(loglab(&["witness", "--config", no_section.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn estimator_overflow_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hot.toml");
    std::fs::write(&cfg, "[estimate]\nd = 2\nN = 16\nlambda = 50\nK = inf\nL = inf\np = 2\nnsamples = 200\n")
        .unwrap();
    let o = loglab(&["estimate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn headers_match_golden_files() {
    let config = fixture("fixtures/small.toml");
    let config = config.to_str().unwrap();
    for (cmd, file) in
        [("estimate", "estimate_header.csv"), ("witness", "witness_header.csv"), ("scan", "scan_header.csv")]
    {
        let o = loglab(&[cmd, "--config", config, "--workers", "2"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert_eq!(header_of(&text), golden(file), "{cmd}");
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# loglab {cmd}"));
        assert_eq!(lines[1], "# seed = 11");
        assert!(lines[2].starts_with("# config = {"));
    }
}

#[test]
fn scan_writes_one_row_per_cell() {
    let o = loglab(&["scan", "--config", fixture("fixtures/small.toml").to_str().unwrap()]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2 * 3 * 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 13));
}

#[test]
fn files_carry_provenance_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("est");
    let o = loglab(&[
        "estimate",
        "--config",
        fixture("fixtures/small.toml").to_str().unwrap(),
        "--out",
        base.to_str().unwrap(),
        "--format",
        "both",
        "--seed",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(base.with_extension("csv")).unwrap();
    assert!(csv.contains("# seed = 5"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(base.with_extension("json")).unwrap()).unwrap();
    assert_eq!(json["seed"], 5);
    assert_eq!(json["config"]["estimate"]["N"], 8);
    let mean = json["results"]["zp"]["mean"].as_f64().unwrap();
    let sum = json["results"]["zp"]["sum"].as_f64().unwrap();
    assert_eq!(mean, sum / 400.0);
}

#[test]
fn worker_flag_and_env_give_identical_output() {
    let config = fixture("fixtures/small.toml");
    let one = loglab(&["witness", "--config", config.to_str().unwrap(), "--workers", "1"]);
    let env = Command::new(env!("CARGO_BIN_EXE_loglab"))
        .args(["witness", "--config", config.to_str().unwrap()])
        .env("LOGLAB_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0));
    // Worker count is provenance, so only the data rows must agree.
    let rows =
        |o: &Output| stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect::<Vec<_>>();
    assert_eq!(rows(&one), rows(&env));
}
