//! Falsifiable checks of the martingale structure of `M` under the law
//! given the `U` path.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::map_walks;
use crate::martingale::gaps::{gap_tail_table, inter_u_gap_counts, GapHistogram, GapTailRow};
use crate::martingale::m423::{build_m423_seeded, M423Trace, StepKind};
use crate::stats::{z_score, CiEstimate, CompensatedSum, MeanSummary, Moments, CONFIDENCE};

/// Minimum number of traces for a report.
pub const MIN_TRACES: usize = 100;
/// Lower bound on the conditional second moment at fresh `U` sites.
pub const FRESH_SECOND_MOMENT_BOUND: f64 = 0.5;

/// Pooled sums for the lag-one correlation of consecutive increments.
#[derive(Clone, Copy, Debug, Default)]
struct PairSums {
    n: u64,
    x: CompensatedSum,
    y: CompensatedSum,
    xx: CompensatedSum,
    yy: CompensatedSum,
    xy: CompensatedSum,
}

impl PairSums {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.x.add(x);
        self.y.add(y);
        self.xx.add(x * x);
        self.yy.add(y * y);
        self.xy.add(x * y);
    }

    fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.x.merge(&o.x);
        self.y.merge(&o.y);
        self.xx.merge(&o.xx);
        self.yy.merge(&o.yy);
        self.xy.merge(&o.xy);
    }

    /// Sample correlation with a Fisher-transform interval.
    fn correlation(&self, level: f64) -> CiEstimate {
        let n = self.n as f64;
        let (mx, my) = (self.x.value() / n, self.y.value() / n);
        let cov = self.xy.value() / n - mx * my;
        let vx = self.xx.value() / n - mx * mx;
        let vy = self.yy.value() / n - my * my;
        let r = if vx > 0.0 && vy > 0.0 {
            (cov / (vx * vy).sqrt()).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let (lower, upper) = if self.n > 3 {
            let h = z_score(level) / (n - 3.0).sqrt();
            let z = r.clamp(-1.0 + 1e-15, 1.0 - 1e-15).atanh();
            ((z - h).tanh(), (z + h).tanh())
        } else {
            (-1.0, 1.0)
        };
        CiEstimate {
            point: r,
            lower,
            upper,
            level,
            samples: self.n,
        }
    }
}

/// Order-sensitive accumulator; merging in a fixed order gives identical
/// floating-point results regardless of how traces were scheduled.
#[derive(Clone, Debug, Default)]
pub struct DiagnosticsAccumulator {
    traces: usize,
    increments: Moments,
    pairs: PairSums,
    fresh_sq: Moments,
    bound_violations: u64,
    frozen_x_exceptions: u64,
    gaps: GapHistogram,
}

impl DiagnosticsAccumulator {
    pub fn add_trace(&mut self, t: &M423Trace) {
        self.traces += 1;
        let d: Vec<f64> = t.m.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
        for (m, &x) in d.iter().enumerate() {
            self.increments.push(x);
            if let Some(&y) = d.get(m + 1) {
                self.pairs.push(x, y);
            }
            if m == 0 || t.r_u[m] > t.r_u[m - 1] {
                self.fresh_sq.push(x * x);
            }
        }
        for g in inter_u_gap_counts(t) {
            if !g.within_bound() {
                self.bound_violations += 1;
            }
            self.gaps.add(g.xi_steps);
        }
        self.frozen_x_exceptions += t
            .kinds
            .iter()
            .zip(t.positions.windows(2))
            .filter(|(k, w)| **k == StepKind::Zeta && w[0][0] != w[1][0])
            .count() as u64;
    }

    pub fn merge(&mut self, o: &Self) {
        self.traces += o.traces;
        self.increments.merge(&o.increments);
        self.pairs.merge(&o.pairs);
        self.fresh_sq.merge(&o.fresh_sq);
        self.bound_violations += o.bound_violations;
        self.frozen_x_exceptions += o.frozen_x_exceptions;
        self.gaps.merge(&o.gaps);
    }

    pub fn report(&self) -> Result<MartingaleReport> {
        if self.traces < MIN_TRACES {
            return Err(Error::InsufficientSamples {
                needed: MIN_TRACES,
                got: self.traces,
            });
        }
        let increments = self.increments.summary();
        let fresh = self.fresh_sq.summary();
        Ok(MartingaleReport {
            traces: self.traces as u64,
            increment_mean: increments,
            increment_ci: increments.ci(CONFIDENCE),
            lag1_correlation: self.pairs.correlation(CONFIDENCE),
            fresh_second_moment: fresh,
            fresh_second_moment_ci: fresh.ci(CONFIDENCE),
            bound_violations: self.bound_violations,
            frozen_x_exceptions: self.frozen_x_exceptions,
            gaps: self.gaps.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleReport {
    pub traces: u64,
    /// `M_{m+1} - M_m` over all increments.
    pub increment_mean: MeanSummary,
    pub increment_ci: CiEstimate,
    /// Correlation of `(M_{m+1} - M_m, M_{m+2} - M_{m+1})`.
    pub lag1_correlation: CiEstimate,
    /// `(M_{m+1} - M_m)^2` over `m` with `U_m` at a site new for `U`.
    pub fresh_second_moment: MeanSummary,
    pub fresh_second_moment_ci: CiEstimate,
    /// Increments with `|M_{m+1} - M_m|` above the step count.
    pub bound_violations: u64,
    /// zeta-steps that changed `X`.
    pub frozen_x_exceptions: u64,
    pub gaps: GapHistogram,
}

impl MartingaleReport {
    /// `|mean| <= sigmas * standard error`.
    pub fn mean_within(&self, sigmas: f64) -> bool {
        self.increment_mean.mean.abs() <= sigmas * self.increment_mean.std_error
    }

    /// The fresh-site second moment is at least the bound up to one CI width.
    pub fn fresh_bound_holds(&self) -> bool {
        self.fresh_second_moment.mean
            >= FRESH_SECOND_MOMENT_BOUND - self.fresh_second_moment_ci.width()
    }

    pub fn gap_tail(&self, k_max: u32) -> Vec<GapTailRow> {
        gap_tail_table(&self.gaps, k_max)
    }
}

/// Report over `traces`.
pub fn martingale_diagnostics(traces: &[M423Trace]) -> Result<MartingaleReport> {
    let mut acc = DiagnosticsAccumulator::default();
    for t in traces {
        acc.add_trace(t);
    }
    acc.report()
}

/// Builds `num_traces` traces of `n_steps` steps, trace `i` on stream
/// `(seed, i)`, and reduces them in index order without keeping them.
pub fn martingale_ensemble(n_steps: u64, num_traces: u64, seed: u64) -> Result<MartingaleReport> {
    let parts = map_walks(seed, num_traces, |_, rng| {
        let t = build_m423_seeded(n_steps, &rng)?;
        let mut acc = DiagnosticsAccumulator::default();
        acc.add_trace(&t);
        Ok(acc)
    })?;
    let mut acc = DiagnosticsAccumulator::default();
    for p in &parts {
        acc.merge(p);
    }
    acc.report()
}
