use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infotheory::LogBase;
use crate::model::{BlochState, EnvironmentSpec, SystemObservable};
use crate::DensityMatrix;

/// Largest environment a sweep accepts.
pub const MAX_SITES: usize = 14;

/// Coupling model between the system and each environment site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `O_Γ = Z`, `O_l = Z`.
    Zz,
    /// `O_Γ = Z`, `O_l` drawn from GUE(2).
    ZhGue,
    /// `O_Γ = Z`, `O_l = Z` with couplings drawn uniformly from `g·[1 − spread, 1 + spread]`.
    ZzRandomG,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochSpec {
    pub r: f64,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
}

impl BlochSpec {
    pub fn state(&self) -> Result<BlochState<f64>> {
        BlochState::new(self.r, self.theta, self.phi).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadyState {
    #[default]
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub count: usize,
}

impl TimeGrid {
    /// Evenly spaced times; the last one is exactly `t_end`.
    pub fn times(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.t_start],
            n => {
                let step = (self.t_end - self.t_start) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            self.t_end
                        } else {
                            self.t_start + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KRange {
    pub min: usize,
    pub max: usize,
}

/// Petz reference state on the system.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSpec {
    #[default]
    MaximallyMixed,
    Bloch(BlochSpec),
}

fn default_spread() -> f64 {
    0.5
}

/// A sweep over interaction times and fragment sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub n: usize,
    pub g: f64,
    /// Per-site couplings; overrides `g` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    /// Relative half-width of the coupling distribution for `zz_random_g`.
    #[serde(default = "default_spread")]
    pub g_spread: f64,
    pub initial_state: BlochSpec,
    #[serde(default)]
    pub ready_state: ReadyState,
    pub time_grid: TimeGrid,
    /// Defaults to `1..=n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_range: Option<KRange>,
    #[serde(default)]
    pub reference: ReferenceSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub log_base: LogBase,
}

/// Operators and states fixed by a configuration, with all random draws made.
#[derive(Clone, Debug)]
pub struct BuiltModel {
    pub system: SystemObservable<f64>,
    pub environment: EnvironmentSpec<f64>,
    pub initial: DensityMatrix<f64>,
    pub reference: DensityMatrix<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn k_bounds(&self) -> (usize, usize) {
        self.k_range.map_or((1, self.n), |k| (k.min, k.max))
    }

    /// Checks every field; a too-large environment is a [`Error::Size`].
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.n > MAX_SITES {
            return Err(Error::Size(format!(
                "n = {} exceeds the limit of {MAX_SITES} sites",
                self.n
            )));
        }
        if !self.g.is_finite() {
            return Err(Error::Config("g must be finite".into()));
        }
        if let Some(c) = &self.couplings {
            if c.len() != self.n {
                return Err(Error::Config(format!("{} couplings for n = {}", c.len(), self.n)));
            }
            if c.iter().any(|g| !g.is_finite()) {
                return Err(Error::Config("couplings must be finite".into()));
            }
            if self.model == ModelKind::ZzRandomG {
                return Err(Error::Config("zz_random_g draws its own couplings".into()));
            }
        }
        if !(self.g_spread >= 0.0 && self.g_spread.is_finite()) {
            return Err(Error::Config("g_spread must be finite and non-negative".into()));
        }
        self.initial_state.state()?;
        if let ReferenceSpec::Bloch(b) = self.reference {
            b.state()?;
        }
        let grid = self.time_grid;
        if grid.count == 0 {
            return Err(Error::Config("time grid is empty".into()));
        }
        if !(grid.t_start >= 0.0 && grid.t_end >= grid.t_start && grid.t_end.is_finite()) {
            return Err(Error::Config("time grid needs 0 ≤ t_start ≤ t_end < ∞".into()));
        }
        let (lo, hi) = self.k_bounds();
        if lo == 0 || lo > hi || hi > self.n {
            return Err(Error::Config(format!("k range {lo}..={hi} not within 1..={}", self.n)));
        }
        Ok(())
    }

    /// Draws the random operators (if any) from `seed` and assembles the model.
    pub fn build(&self) -> Result<BuiltModel> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.build_with(&mut rng)
    }

    /// Same as [`build`](Self::build) but continues an existing stream.
    pub fn build_with(&self, rng: &mut ChaCha8Rng) -> Result<BuiltModel> {
        let couplings = match (&self.couplings, self.model) {
            (Some(c), _) => c.clone(),
            (None, ModelKind::ZzRandomG) => {
                let lo = self.g * (1.0 - self.g_spread);
                let hi = self.g * (1.0 + self.g_spread);
                (0..self.n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
            }
            (None, _) => vec![self.g; self.n],
        };
        let environment = match self.model {
            ModelKind::Zz | ModelKind::ZzRandomG => EnvironmentSpec::zz_with_couplings(couplings)?,
            ModelKind::ZhGue => EnvironmentSpec::gue_with_couplings(couplings, rng)?,
        };
        let reference = match self.reference {
            ReferenceSpec::MaximallyMixed => DensityMatrix::maximally_mixed(2),
            ReferenceSpec::Bloch(b) => b.state()?.density(),
        };
        Ok(BuiltModel {
            system: SystemObservable::pauli_z(),
            environment,
            initial: self.initial_state.state()?.density(),
            reference,
        })
    }
}
