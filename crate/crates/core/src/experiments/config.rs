use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelSpec;

/// Replication count used when none is configured: 32 up to `n = 10^4`,
/// 8 beyond.
pub fn default_replications(n: u64) -> usize {
    if n <= 10_000 {
        32
    } else {
        8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub dim: usize,
    /// Time-grid size `k`; paths are observed at `j/k`, `j = 1..=k`.
    pub grid_points: usize,
    pub n_schedule: Vec<u64>,
    /// Replications per schedule entry; `None` uses [`default_replications`].
    pub replications: Option<usize>,
    /// Direction-grid size `q`.
    pub directions: usize,
    pub seed: u64,
    /// Also sample on the `2k` grid and report both resolutions.
    pub two_resolution: bool,
    /// Worker threads, `0` for one per core. Results do not depend on it.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ModelSpec::Bm,
            dim: 2,
            grid_points: 512,
            n_schedule: vec![100, 1_000, 10_000],
            replications: None,
            directions: 720,
            seed: 42,
            two_resolution: false,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        if self.grid_points == 0 {
            return Err(Error::Config("grid-points must be at least 1".into()));
        }
        if self.n_schedule.is_empty() {
            return Err(Error::Config("n-schedule is empty".into()));
        }
        if self.n_schedule[0] < 2 {
            return Err(Error::Config("every n must be at least 2 so that ln n > 0".into()));
        }
        if self.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n-schedule must be strictly increasing".into()));
        }
        if self.replications == Some(0) {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.directions == 0 {
            return Err(Error::Config("dirs must be positive".into()));
        }
        Ok(())
    }

    pub fn replications_for(&self, n: u64) -> usize {
        self.replications.unwrap_or_else(|| default_replications(n))
    }
}
