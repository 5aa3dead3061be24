use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::sweep::{RowError, SweepResult, SweepRow};
use crate::error::{Error, Result};
use crate::infotheory::LogBase;

pub const CSV_HEADER: &str = "t,k,Q,R,cmi,prc_defect,clip";

/// Sidecar written next to every CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    pub log_base: LogBase,
    pub columns: Vec<String>,
    pub times: Vec<f64>,
    /// `S(ρ_Γ(t))` per time in `log_base`.
    pub system_entropy: Vec<f64>,
    pub k_min: Vec<Option<usize>>,
    pub row_errors: Vec<RowError>,
}

impl Metadata {
    pub fn from_result(res: &SweepResult) -> Self {
        Metadata {
            config: res.config.clone(),
            seed: res.config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            log_base: res.log_base(),
            columns: CSV_HEADER.split(',').map(str::to_string).collect(),
            times: res.times.clone(),
            system_entropy: res.system_entropy.clone(),
            k_min: res.k_min.clone(),
            row_errors: res.errors.clone(),
        }
    }
}

fn num(out: &mut String, v: f64) {
    // 17 significant digits
    let _ = write!(out, "{v:.16e}");
}

/// CSV text with header, one line per row.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 140);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        num(&mut out, row.t);
        let _ = write!(out, ",{}", row.k);
        for v in [row.q, row.r, row.cmi, row.prc_defect, row.clip] {
            out.push(',');
            num(&mut out, v);
        }
        out.push('\n');
    }
    out
}

/// Parses text produced by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::Config(format!("CSV header must be `{CSV_HEADER}`"))),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let bad = |what: &str| Error::Config(format!("CSV line {}: {what}", i + 2));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad("expected 7 fields"));
            }
            let real = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
            Ok(SweepRow {
                t: real(f[0])?,
                k: f[1].trim().parse().map_err(|_| bad("bad k"))?,
                q: real(f[2])?,
                r: real(f[3])?,
                cmi: real(f[4])?,
                prc_defect: real(f[5])?,
                clip: real(f[6])?,
            })
        })
        .collect()
}

/// `dir/name.csv` → `dir/name.meta.json`.
pub fn metadata_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.meta.json"))
}

/// Writes the CSV and its metadata sidecar, creating parent directories.
/// Returns the sidecar path.
pub fn write_outputs(res: &SweepResult, csv: &Path) -> Result<PathBuf> {
    if let Some(dir) = csv.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(csv, csv_string(&res.rows))?;
    let meta = metadata_path(csv);
    fs::write(&meta, serde_json::to_string_pretty(&Metadata::from_result(res))?)?;
    Ok(meta)
}

pub fn read_metadata(path: &Path) -> Result<Metadata> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize) -> SweepRow {
        SweepRow {
            t: std::f64::consts::FRAC_PI_4,
            k,
            q: 0.1 + 1e-17,
            r: 1.0 / 3.0,
            cmi: -0.0,
            prc_defect: 1e-300,
            clip: f64::NAN,
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![row(1), row(2)];
        let text = csv_string(&rows);
        assert!(text.starts_with("t,k,Q,R,cmi,prc_defect,clip\n"));
        let back = parse_csv(&text).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.r.to_bits(), b.r.to_bits());
            assert_eq!(a.q.to_bits(), b.q.to_bits());
            assert!(b.clip.is_nan());
        }
    }

    #[test]
    fn schema_errors() {
        assert!(parse_csv("").is_err());
        assert!(parse_csv("t,k,Q\n").is_err());
        assert!(parse_csv("t,k,Q,R,cmi,prc_defect,clip\n1,2,3\n").is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            metadata_path(Path::new("out/fig1.csv")),
            PathBuf::from("out/fig1.meta.json")
        );
        assert_eq!(metadata_path(Path::new("run")), PathBuf::from("run.meta.json"));
    }
}
