use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qdarwin::experiments::config::{BlochSpec, ReferenceSpec, TimeGrid};
use qdarwin::experiments::figures::dataset;
use qdarwin::experiments::verify::default_suites;
use qdarwin::experiments::ExperimentConfig;

fn qdarwin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdarwin")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, cfg: &ExperimentConfig) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path
}

fn small_zz() -> ExperimentConfig {
    let mut cfg = dataset("fig1").unwrap();
    cfg.n = 3;
    cfg.time_grid = TimeGrid {
        t_start: 0.0,
        t_end: 0.785,
        count: 3,
    };
    cfg
}

#[test]
fn run_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "fig1.json", &dataset("fig1").unwrap());
    let csv = dir.path().join("out/fig1.csv");
    let out = qdarwin(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,k,Q,R,cmi,prc_defect,clip\n"));
    assert_eq!(text.lines().count(), 101);
    assert!(dir.path().join("out/fig1.meta.json").exists());
}

#[test]
fn overrides_reach_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "c.json", &small_zz());
    let csv = dir.path().join("c.csv");
    let args = [
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
        "--log-base",
        "e",
        "--seed",
        "9",
    ];
    assert_eq!(code(&qdarwin(&args)), 0);
    let meta = std::fs::read_to_string(dir.path().join("c.meta.json")).unwrap();
    assert!(meta.contains("\"log_base\": \"e\""), "{meta}");
    assert!(meta.contains("\"seed\": 9"), "{meta}");
}

#[test]
fn missing_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let out = qdarwin(&["run", "--config", missing.to_str().unwrap(), "--out", "x.csv"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"model": "zz", "n": 3, "bogus": 1}"#).unwrap();
    let csv = dir.path().join("x.csv");
    assert_eq!(
        code(&qdarwin(&[
            "run",
            "--config",
            path.to_str().unwrap(),
            "--out",
            csv.to_str().unwrap()
        ])),
        2
    );
    assert_eq!(code(&qdarwin(&["run", "--config"])), 2);
}

#[test]
fn oversized_model_hits_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_zz();
    cfg.n = 20;
    let config = write_config(dir.path(), "big.json", &cfg);
    let csv = dir.path().join("big.csv");
    let out = qdarwin(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(!csv.exists());
    assert_eq!(code(&qdarwin(&["prc", "--n", "20"])), 3);
}

#[test]
fn default_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("reports/check.json");
    let out = qdarwin(&["check", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("== zz_n4") && text.contains("== gue_n3"));
    assert!(text.contains("all checks passed"));
    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"suite\": \"zz_n4\"") && json.contains("trace_preservation"));
}

#[test]
fn injected_non_tp_channel_fails() {
    let out = qdarwin(&["check", "--inject-non-tp"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn gue_config_with_fixed_seed_passes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, mut cfg) = default_suites().remove(1);
    cfg.seed = 42;
    let config = write_config(dir.path(), "gue.json", &cfg);
    let out = qdarwin(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn rank_deficient_reference_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_zz();
    cfg.reference = ReferenceSpec::Bloch(BlochSpec {
        r: 1.0,
        theta: 0.0,
        phi: 0.0,
    });
    let config = write_config(dir.path(), "pure_ref.json", &cfg);
    let out = qdarwin(&["check", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("reference_state"));
}

#[test]
fn figure_group_writes_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("figs");
    let out = qdarwin(&["figure", "fig3", "--out", target.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for stem in ["fig3_g01", "fig3_g1"] {
        assert!(target.join(format!("{stem}.csv")).exists());
        assert!(target.join(format!("{stem}.meta.json")).exists());
    }
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdarwin(&["figure", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn prc_matches_closed_form() {
    let out = qdarwin(&["prc", "--n", "6", "--theta", "0.4"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("closed-form fidelity at PRC"));
    assert!(text.contains("7.8539816339744828e-1"));
}

#[test]
fn help_lists_flags() {
    let top = stdout(&qdarwin(&["--help"]));
    for cmd in ["run", "check", "figure", "prc"] {
        assert!(top.contains(cmd), "{top}");
    }
    let check = stdout(&qdarwin(&["check", "--help"]));
    for flag in ["--config", "--out", "--inject-non-tp", "--seed", "--log-base"] {
        assert!(check.contains(flag), "{check}");
    }
    let prc = stdout(&qdarwin(&["prc", "--help"]));
    for flag in ["--r", "--theta", "--phi", "--g", "--n", "--count", "--log-base"] {
        assert!(prc.contains(flag), "{prc}");
    }
}
