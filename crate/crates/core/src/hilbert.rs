//! Composite space `Γ ∪ Ξ₁ ∪ … ∪ Ξ_N` and the nested fragments `F_k`.
//!
//! Factor 0 is always the system; environment site `l` (1-based) is factor `l`.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompositeSpace {
    system_dim: usize,
    env_dims: Vec<usize>,
}

/// The leading `k` environment sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    k: usize,
}

impl CompositeSpace {
    pub fn new(system_dim: usize, env_dims: Vec<usize>) -> Result<Self> {
        if env_dims.is_empty() {
            return Err(Error::Range("environment needs at least one site".into()));
        }
        if system_dim < 2 || env_dims.iter().any(|&d| d < 2) {
            return Err(Error::Range("all subsystem dimensions must be at least 2".into()));
        }
        Ok(Self { system_dim, env_dims })
    }

    /// Qubit system with `n` qubit sites.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(2, vec![2; n])
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn env_dims(&self) -> &[usize] {
        &self.env_dims
    }

    pub fn n_sites(&self) -> usize {
        self.env_dims.len()
    }

    /// Dimensions of all factors, system first.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.system_dim)
            .chain(self.env_dims.iter().copied())
            .collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn fragment(&self, k: usize) -> Result<Fragment> {
        if k > self.n_sites() {
            return Err(Error::Range(format!(
                "fragment size {k} exceeds environment size {}",
                self.n_sites()
            )));
        }
        Ok(Fragment { k })
    }

    /// Hilbert-space dimension of `F_k`.
    pub fn fragment_dim(&self, fragment: &Fragment) -> usize {
        self.env_dims[..fragment.k].iter().product()
    }

    /// Factor indices of `Γ ∪ F_k` inside [`Self::dims`].
    pub fn system_and(&self, fragment: &Fragment) -> Vec<usize> {
        std::iter::once(0).chain(fragment.factors()).collect()
    }
}

impl Fragment {
    pub fn size(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    /// Member sites, 1-based.
    pub fn members(&self) -> Vec<usize> {
        (1..=self.k).collect()
    }

    /// Factor indices in a [`CompositeSpace`] (identical to the site labels).
    pub fn factors(&self) -> impl Iterator<Item = usize> {
        1..=self.k
    }

    pub fn contains(&self, other: &Fragment) -> bool {
        other.k <= self.k
    }
}
