//! Bundled sweep configurations reproducing the five figure datasets.
//!
//! The group captions of the second, third and fifth datasets state `g = 0.1`
//! while their sub-captions defer to the first (`g = 1`), so both variants ship
//! under distinct names.

use std::f64::consts::{FRAC_PI_4, PI};

use super::config::{BlochSpec, ExperimentConfig, ModelKind, ReferenceSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::infotheory::LogBase;

/// Seed for the GUE(2) draws of `fig4` and `fig5_*`.
pub const GUE_SEED: u64 = 20_260_101;

const SITES: usize = 10;
const TIMES: usize = 10;

fn near_pointer() -> BlochSpec {
    BlochSpec {
        r: 1.0,
        theta: 0.1,
        phi: 0.0,
    }
}

fn far_from_pointer() -> BlochSpec {
    BlochSpec {
        r: 1.0,
        theta: FRAC_PI_4,
        phi: 0.0,
    }
}

fn pointer_mixture() -> BlochSpec {
    BlochSpec {
        r: 0.3,
        theta: 0.0,
        phi: 0.0,
    }
}

/// Ten evenly spaced times in `[0, π/(4g)]`, ready state `|+>^⊗10`, reference `I/2`.
pub fn figure_config(model: ModelKind, g: f64, state: BlochSpec) -> ExperimentConfig {
    ExperimentConfig {
        model,
        n: SITES,
        g,
        couplings: None,
        g_spread: 0.5,
        initial_state: state,
        ready_state: Default::default(),
        time_grid: TimeGrid {
            t_start: 0.0,
            t_end: PI / (4.0 * g),
            count: TIMES,
        },
        k_range: None,
        reference: ReferenceSpec::MaximallyMixed,
        seed: if model == ModelKind::ZhGue { GUE_SEED } else { 0 },
        log_base: LogBase::Two,
    }
}

/// Every bundled dataset name.
pub const DATASETS: &[&str] = &[
    "fig1",
    "fig2_g01",
    "fig2_g1",
    "fig3_g01",
    "fig3_g1",
    "fig4",
    "fig5_pure_g01",
    "fig5_pure_g1",
    "fig5_mix_g01",
    "fig5_mix_g1",
];

/// Configuration of one dataset.
pub fn dataset(name: &str) -> Result<ExperimentConfig> {
    use ModelKind::{ZhGue, Zz};
    let cfg = match name {
        "fig1" => figure_config(Zz, 1.0, near_pointer()),
        "fig2_g01" => figure_config(Zz, 0.1, far_from_pointer()),
        "fig2_g1" => figure_config(Zz, 1.0, far_from_pointer()),
        "fig3_g01" => figure_config(Zz, 0.1, pointer_mixture()),
        "fig3_g1" => figure_config(Zz, 1.0, pointer_mixture()),
        "fig4" => figure_config(ZhGue, 1.0, near_pointer()),
        "fig5_pure_g01" => figure_config(ZhGue, 0.1, far_from_pointer()),
        "fig5_pure_g1" => figure_config(ZhGue, 1.0, far_from_pointer()),
        "fig5_mix_g01" => figure_config(ZhGue, 0.1, pointer_mixture()),
        "fig5_mix_g1" => figure_config(ZhGue, 1.0, pointer_mixture()),
        other => return Err(Error::Config(format!("unknown dataset {other:?}"))),
    };
    Ok(cfg)
}

/// Datasets behind a figure name (`fig1`..`fig5`) or a single dataset name.
pub fn figure_datasets(name: &str) -> Result<Vec<&'static str>> {
    let group: Vec<&'static str> = match name {
        "fig1" | "fig4" => DATASETS.iter().copied().filter(|d| *d == name).collect(),
        "fig2" | "fig3" | "fig5" => DATASETS
            .iter()
            .copied()
            .filter(|d| d.starts_with(&format!("{name}_")))
            .collect(),
        other => DATASETS.iter().copied().filter(|d| *d == other).collect(),
    };
    if group.is_empty() {
        return Err(Error::Config(format!(
            "unknown figure {name:?}; expected fig1..fig5 or one of {}",
            DATASETS.join(", ")
        )));
    }
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(figure_datasets("fig2").unwrap(), vec!["fig2_g01", "fig2_g1"]);
        assert_eq!(figure_datasets("fig5").unwrap().len(), 4);
        assert_eq!(figure_datasets("fig3_g1").unwrap(), vec!["fig3_g1"]);
        assert!(figure_datasets("fig6").is_err());
        for d in DATASETS {
            dataset(d).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn caption_parameters() {
        let f1 = dataset("fig1").unwrap();
        assert_eq!((f1.n, f1.g, f1.initial_state.theta), (10, 1.0, 0.1));
        assert_eq!(f1.time_grid.times().last().copied(), Some(FRAC_PI_4));
        let f3 = dataset("fig3_g01").unwrap();
        assert_eq!((f3.initial_state.r, f3.initial_state.theta), (0.3, 0.0));
        assert!((f3.time_grid.t_end - 2.5 * PI).abs() < 1e-12);
        assert_eq!(dataset("fig4").unwrap().seed, GUE_SEED);
    }
}
