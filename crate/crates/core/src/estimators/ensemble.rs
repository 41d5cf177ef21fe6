use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::WalkSpec;
use crate::rng::RngStream;

/// Parameters of an ensemble of independent walks. Walk `i` uses stream
/// `(seed, i)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub spec: WalkSpec,
    pub n_steps: u64,
    pub num_walks: u64,
    pub seed: u64,
    /// Sorted times at which snapshots are taken; all `<= n_steps`.
    pub checkpoints: Vec<u64>,
}

impl EnsembleConfig {
    pub fn new(spec: WalkSpec, n_steps: u64, num_walks: u64, seed: u64, checkpoints: Vec<u64>) -> Result<Self> {
        let cfg = Self {
            spec,
            n_steps,
            num_walks,
            seed,
            checkpoints,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_walks == 0 {
            return Err(Error::InvalidParameter("num_walks must be at least 1".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("checkpoints must be strictly increasing".into()));
        }
        if self.checkpoints.last().is_some_and(|&c| c > self.n_steps) {
            return Err(Error::InvalidParameter("checkpoint beyond n_steps".into()));
        }
        Ok(())
    }
}

/// Runs `walk(i, stream_i)` for every walk index in parallel and returns the
/// results in index order, so reductions over them do not depend on
/// scheduling.
pub fn map_walks<T, F>(seed: u64, num_walks: u64, walk: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, RngStream) -> Result<T> + Sync,
{
    (0..num_walks)
        .into_par_iter()
        .map(|i| walk(i, RngStream::new(seed, i)))
        .collect()
}
