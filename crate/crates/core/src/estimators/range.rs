use serde::Serialize;

use crate::error::Result;
use crate::estimators::{map_walks, EnsembleConfig};
use crate::lattice::{run, RangeCheckpoints, RangeRecord};
use crate::stats::{CompensatedSum, MeanSummary};

/// Band checks are skipped below this time.
pub const BAND_MIN_N: u64 = 100;
/// Default `C` of the band `[n / (C (ln n)^2), 0.99 n]`.
pub const DEFAULT_BAND_CONSTANT: f64 = 10.0;

/// `[n / (C (ln n)^2), 0.99 n]`.
pub fn range_band(n: u64, band_constant: f64) -> (f64, f64) {
    let n = n as f64;
    let ln = n.ln();
    (n / (band_constant * ln * ln), 0.99 * n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremes {
    pub min: u64,
    pub mean: f64,
    pub max: u64,
}

impl Extremes {
    fn of(values: impl Iterator<Item = u64> + Clone) -> Self {
        let count = values.clone().count();
        let sum: CompensatedSum = values.clone().map(|v| v as f64).collect();
        Self {
            min: values.clone().min().unwrap_or(0),
            mean: sum.value() / count.max(1) as f64,
            max: values.max().unwrap_or(0),
        }
    }
}

/// Ensemble summary of the range counters at one checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeSummary {
    pub n: u64,
    pub range: Extremes,
    /// `r_n^(1)`, reported only when the spec's fresh kernel reaches both
    /// blocks.
    pub block1: Option<Extremes>,
    pub block2: Option<Extremes>,
    /// Per-walk `r_n^(1) - r_n^(2)`.
    pub split_difference: Option<MeanSummary>,
    /// `None` when `n < BAND_MIN_N`.
    pub band: Option<(f64, f64)>,
    /// Walks with a banded statistic outside the band: `r^(1)` or `r^(2)`
    /// for split specs, `r_n` otherwise.
    pub violations: u64,
    /// Walks above `0.99 n`.
    pub upper_violations: u64,
}

/// Range statistics of `cfg.num_walks` walks at every checkpoint.
pub fn range_stats(cfg: &EnsembleConfig, band_constant: f64) -> Result<Vec<RangeSummary>> {
    cfg.validate()?;
    let spec = cfg.spec;
    let per_walk: Vec<Vec<RangeRecord>> = map_walks(cfg.seed, cfg.num_walks, |_, mut rng| {
        let mut cp = RangeCheckpoints::new(cfg.checkpoints.clone());
        run(&spec, cp.steps_needed(), &mut rng, &mut [&mut cp])?;
        Ok(cp.into_records())
    })?;

    let split = spec.has_block_split();
    let summaries = cfg
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let at = || per_walk.iter().map(move |w| w[i]);
            let band = (n >= BAND_MIN_N).then(|| range_band(n, band_constant));
            let outside = |v: u64| band.is_some_and(|(lo, hi)| (v as f64) < lo || (v as f64) > hi);
            let above = |v: u64| band.is_some_and(|(_, hi)| v as f64 > hi);
            let (violations, upper_violations) = if split {
                (
                    at().filter(|r| outside(r.block1) || outside(r.block2)).count(),
                    at().filter(|r| above(r.block1) || above(r.block2)).count(),
                )
            } else {
                (
                    at().filter(|r| outside(r.range)).count(),
                    at().filter(|r| above(r.range)).count(),
                )
            };
            let diffs: Vec<f64> = at().map(|r| r.block1 as f64 - r.block2 as f64).collect();
            RangeSummary {
                n,
                range: Extremes::of(at().map(|r| r.range)),
                block1: split.then(|| Extremes::of(at().map(|r| r.block1))),
                block2: split.then(|| Extremes::of(at().map(|r| r.block2))),
                split_difference: split.then(|| MeanSummary::from_values(&diffs)),
                band,
                violations: violations as u64,
                upper_violations: upper_violations as u64,
            }
        })
        .collect();
    Ok(summaries)
}
