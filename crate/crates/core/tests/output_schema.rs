//! The CSV and metadata files consumed by the plotting script.

use qdarwin::experiments::figures::dataset;
use qdarwin::experiments::output::{metadata_path, parse_csv, read_metadata};
use qdarwin::experiments::{run_sweep, write_outputs, CSV_HEADER};
use serde_json::Value;

#[test]
fn csv_and_metadata_layout() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("nested/out/fig1.csv");
    let cfg = dataset("fig1").unwrap();
    let res = run_sweep(&cfg).unwrap();
    let meta_path = write_outputs(&res, &csv).unwrap();
    assert_eq!(meta_path, metadata_path(&csv));
    assert_eq!(meta_path.file_name().unwrap(), "fig1.meta.json");

    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,k,Q,R,cmi,prc_defect,clip"));
    assert_eq!(CSV_HEADER, "t,k,Q,R,cmi,prc_defect,clip");
    let body: Vec<&str> = lines.collect();
    assert_eq!(body.len(), 100);
    // floats carry 17 significant digits
    let first: Vec<&str> = body[0].split(',').collect();
    assert_eq!(first.len(), 7);
    assert_eq!(first[1], "1");
    assert!(first[2].contains('e') && first[2].split('e').next().unwrap().len() == 18);

    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows, res.rows);

    let raw: Value = serde_json::from_str(&std::fs::read_to_string(&meta_path).unwrap()).unwrap();
    for key in [
        "config",
        "seed",
        "version",
        "log_base",
        "columns",
        "times",
        "system_entropy",
        "k_min",
        "row_errors",
    ] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
    assert_eq!(raw["log_base"], "2");
    assert_eq!(raw["config"]["n"], 10);
    assert_eq!(raw["system_entropy"].as_array().unwrap().len(), 10);

    let meta = read_metadata(&meta_path).unwrap();
    assert_eq!(meta.config, cfg);
    assert_eq!(meta.columns.join(","), CSV_HEADER);
    // the guide lines: R(k) on the last slice sits on S for k < 10 and on 2S at k = 10
    let s = *meta.system_entropy.last().unwrap();
    let last = &rows[90..];
    assert!((last[0].r - s).abs() < 1e-8 && (last[9].r - 2.0 * s).abs() < 1e-8);
    for (i, t) in meta.times.iter().enumerate() {
        assert!(rows[i * 10..(i + 1) * 10].iter().all(|r| r.t == *t));
    }
}

#[test]
fn metadata_reproduces_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig4.csv");
    let res = run_sweep(&dataset("fig4").unwrap()).unwrap();
    let meta = read_metadata(&write_outputs(&res, &csv).unwrap()).unwrap();
    assert_eq!(meta.seed, meta.config.seed);
    let again = run_sweep(&meta.config).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(qdarwin::experiments::output::csv_string(&again.rows), text);
}
