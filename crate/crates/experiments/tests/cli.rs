use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hqs_experiments::sweep::{parse_sweep_csv, SCHEMA};

fn hqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hqs")).args(args).output().expect("spawn hqs")
}

fn sweep(dir: &Path, config: &str) -> (Output, String) {
    let cfg = dir.join("run.cfg");
    let csv = dir.join("run.csv");
    fs::write(&cfg, config).unwrap();
    let out = hqs(&["sweep", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    (out, fs::read_to_string(&csv).unwrap_or_default())
}

#[test]
fn measurement_only_shrink_scales_single_site_value() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = sweep(
        dir.path(),
        "model = trivial\nlx = 3\nly = 3\nobservable = Z@1:0; Z@2:1\nnoise_targets = measurement\n\
         measurement_noise = shrink\nepsilons = 0.001, 0.01, 0.1\n",
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r.noiseless.abs() > 1e-3);
        assert!((r.deviation - r.epsilon * r.noiseless.abs()).abs() < 1e-12, "{r:?}");
    }
    assert!(dir.path().join("run.gp").exists());
}

#[test]
fn zero_noise_gives_zero_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let (out, csv) = sweep(dir.path(), "lx = 3\nly = 4\nepsilons = 0\nseeds = 0, 1\n");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.deviation == 0.0 && (r.noiseless - 1.0).abs() < 1e-10));
}

#[test]
fn csv_schema_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let (_, csv) = sweep(dir.path(), "model = trivial\nly = 2\nobservable = Z@1:0\nepsilons = 0.01\n");
    assert!(csv.starts_with(SCHEMA));
    assert!(parse_sweep_csv(&csv).is_ok());
    assert!(parse_sweep_csv(&csv.replacen(SCHEMA, "# hqs-sweep-v0", 1)).is_err());
    assert!(parse_sweep_csv(&csv.replacen("deviation", "dev", 1)).is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = sweep(dir.path(), "lx = 3\nly = 4\nbogus = 1\n");
    assert_eq!(out.status.code(), Some(2));
    let (out, _) = sweep(dir.path(), "lx = 9\nly = 9\nepsilons = 0.01\n");
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(hqs(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(hqs(&["mixing", "--window", "3:1"]).status.code(), Some(2));
}

#[test]
fn trivial_mixing_report_is_exact() {
    let out = hqs(&["mixing", "--model", "trivial", "--window", "1:3", "--ell", "1,2", "--restarts", "4", "--iterations", "20"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let report = hqs_core::mixing::MixingReport::from_text(&text).unwrap();
    assert!(report.exact_mixing && report.classified);
    assert_eq!(report.points.len(), 6);
}

#[test]
fn export_circuit_round_trips() {
    let out = hqs(&["export-circuit", "--lx", "3", "--row", "2", "--ly", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(hqs_core::circuits::parse_circuit(&text).is_ok());
}

#[test]
fn verify_stabilizer_suite_passes() {
    let out = hqs(&["verify", "--suite", "stabilizer"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 8 && text.lines().all(|l| l.starts_with("PASS")));
}
