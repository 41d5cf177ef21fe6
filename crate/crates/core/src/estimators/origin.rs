use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::estimators::{map_walks, EnsembleConfig};
use crate::lattice::{run, RangeCheckpoints};
use crate::stats::{wilson, CiEstimate, MeanSummary, CONFIDENCE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OriginVisitReport {
    /// Number of walks per total visit count `#{j <= n : S_j = 0}`.
    pub histogram: BTreeMap<u64, u64>,
    pub mean: MeanSummary,
    /// Fraction of walks that came back at least once.
    pub returned: CiEstimate,
    /// Mean visit count at each configured checkpoint.
    pub checkpoint_means: Vec<(u64, MeanSummary)>,
}

impl OriginVisitReport {
    /// Fraction of walks with at least `k` visits.
    pub fn tail_mass(&self, k: u64) -> f64 {
        let total: u64 = self.histogram.values().sum();
        let above: u64 = self.histogram.range(k..).map(|(_, c)| c).sum();
        above as f64 / total as f64
    }
}

pub fn origin_visits(cfg: &EnsembleConfig) -> Result<OriginVisitReport> {
    cfg.validate()?;
    let spec = cfg.spec;
    let per_walk: Vec<(u64, Vec<u64>)> = map_walks(cfg.seed, cfg.num_walks, |_, mut rng| {
        let mut cp = RangeCheckpoints::new(cfg.checkpoints.clone());
        let out = run(&spec, cfg.n_steps, &mut rng, &mut [&mut cp])?;
        Ok((
            out.state.origin_visits,
            cp.records().iter().map(|r| r.origin_visits).collect(),
        ))
    })?;

    let mut histogram = BTreeMap::new();
    for (v, _) in &per_walk {
        *histogram.entry(*v).or_insert(0) += 1;
    }
    let totals: Vec<f64> = per_walk.iter().map(|(v, _)| *v as f64).collect();
    let returned = per_walk.iter().filter(|(v, _)| *v >= 2).count() as u64;
    let checkpoint_means = cfg
        .checkpoints
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let vals: Vec<f64> = per_walk.iter().map(|(_, c)| c[i] as f64).collect();
            (n, MeanSummary::from_values(&vals))
        })
        .collect();
    Ok(OriginVisitReport {
        histogram,
        mean: MeanSummary::from_values(&totals),
        returned: wilson(returned, cfg.num_walks, CONFIDENCE),
        checkpoint_means,
    })
}
