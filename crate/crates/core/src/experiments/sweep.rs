use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{BuiltModel, ExperimentConfig};
use crate::error::Result;
use crate::infotheory::{fidelity, fragment_information, redundancy_curve, LogBase};
use crate::model::{evolve_branches, prc_defect};
use crate::petz::fragment_recovery;

/// Plateau marker rule: first `k` with `R(k) ≥ S(ρ_Γ) − KMIN_TOL`.
pub const KMIN_TOL: f64 = 1e-9;

/// One `(t, k)` sample. Entropic columns are in the configured log base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub t: f64,
    pub k: usize,
    /// `F(ρ_Γ(0), P_{Λ_k}(Λ_k(ρ_Γ(0))))`; NaN when recovery failed.
    pub q: f64,
    /// `I(Γ:F_k)`.
    pub r: f64,
    /// `I(Γ:Ξ_k | F_{k−1}) = R(k) − R(k−1)`.
    pub cmi: f64,
    pub prc_defect: f64,
    /// Negative weight removed from the recovered state; NaN when recovery failed.
    pub clip: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    pub t: f64,
    pub k: usize,
    pub message: String,
}

/// Rows in `(t, k)` order plus per-time diagnostics.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub times: Vec<f64>,
    /// `S(ρ_Γ(t))` per time, in the configured log base.
    pub system_entropy: Vec<f64>,
    /// First `k` reaching the plateau per time, if any.
    pub k_min: Vec<Option<usize>>,
    pub rows: Vec<SweepRow>,
    pub errors: Vec<RowError>,
}

impl SweepResult {
    pub fn log_base(&self) -> LogBase {
        self.config.log_base
    }

    /// Rows belonging to time index `i`.
    pub fn slice(&self, i: usize) -> &[SweepRow] {
        let (lo, hi) = self.config.k_bounds();
        let width = hi - lo + 1;
        &self.rows[i * width..(i + 1) * width]
    }
}

struct TimeSlice {
    system: f64,
    k_min: Option<usize>,
    rows: Vec<SweepRow>,
    errors: Vec<RowError>,
}

fn run_time(cfg: &ExperimentConfig, model: &BuiltModel, t: f64) -> Result<TimeSlice> {
    let base = cfg.log_base;
    let rec = evolve_branches(&model.system, &model.environment, t)?;
    let x = &model.initial;
    let curve = redundancy_curve(x, &rec)?;
    let system = fragment_information(x, &rec, 0)?.system;
    let k_min = (1..=rec.n_sites()).find(|&k| curve[k] >= system - KMIN_TOL);
    let (lo, hi) = cfg.k_bounds();
    let mut rows = Vec::with_capacity(hi - lo + 1);
    let mut errors = Vec::new();
    for k in lo..=hi {
        let recovered = fragment_recovery(x, &rec, k, &model.reference)
            .and_then(|r| Ok((fidelity(x.matrix(), r.state.matrix())?, r.clip)));
        let (q, clip) = match recovered {
            Ok(v) => v,
            Err(e) => {
                errors.push(RowError {
                    t,
                    k,
                    message: e.to_string(),
                });
                (f64::NAN, f64::NAN)
            }
        };
        rows.push(SweepRow {
            t,
            k,
            q,
            r: base.from_nats(curve[k]),
            cmi: base.from_nats(curve[k] - curve[k - 1]),
            prc_defect: prc_defect(&rec, k)?,
            clip,
        });
    }
    Ok(TimeSlice {
        system: base.from_nats(system),
        k_min,
        rows,
        errors,
    })
}

/// Evaluates `Q(k)`, `R(k)` and the conditional mutual information on the
/// configured `(t, k)` grid. Times run in parallel; output order is fixed.
/// Recovery failures are recorded per row and leave NaN in `Q` and `clip`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let model = cfg.build()?;
    let times = cfg.time_grid.times();
    let slices: Vec<TimeSlice> = times
        .par_iter()
        .map(|&t| run_time(cfg, &model, t))
        .collect::<Result<_>>()?;
    let mut out = SweepResult {
        config: cfg.clone(),
        times,
        system_entropy: Vec::with_capacity(slices.len()),
        k_min: Vec::with_capacity(slices.len()),
        rows: Vec::new(),
        errors: Vec::new(),
    };
    for s in slices {
        out.system_entropy.push(s.system);
        out.k_min.push(s.k_min);
        out.rows.extend(s.rows);
        out.errors.extend(s.errors);
    }
    Ok(out)
}
