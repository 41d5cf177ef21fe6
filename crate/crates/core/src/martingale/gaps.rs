//! Fresh-step counts between consecutive moves of `U`, and their tail.

use serde::Serialize;

use crate::martingale::m423::{M423Trace, StepKind};
use crate::stats::{wilson, CiEstimate, CONFIDENCE};

/// Block parameter of the geometric domination.
pub const BLOCK_PROBABILITY: f64 = 1.0 / 24.0;
/// Steps per block.
pub const BLOCK_LENGTH: u64 = 3;

/// One martingale increment and the steps behind it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Gap {
    /// `m`, so the increment is `M_{m+1} - M_m`.
    pub m: usize,
    /// xi-steps in `(tau_m, tau_{m+1}]`.
    pub xi_steps: u64,
    /// Steps in `(tau_m, tau_{m+1}]` that changed `X`.
    pub x_moves: u64,
    /// `|M_{m+1} - M_m|`.
    pub abs_increment: u64,
}

impl Gap {
    /// `|M_{m+1} - M_m| <= x_moves <= xi_steps`.
    pub fn within_bound(&self) -> bool {
        self.abs_increment <= self.x_moves && self.x_moves <= self.xi_steps
    }
}

/// One entry per completed increment, i.e. per `m` with `tau_{m+1} <= n`.
pub fn inter_u_gap_counts(trace: &M423Trace) -> Vec<Gap> {
    trace
        .tau
        .windows(2)
        .enumerate()
        .map(|(m, w)| {
            let (lo, hi) = (w[0] as usize, w[1] as usize);
            let mut g = Gap {
                m,
                xi_steps: 0,
                x_moves: 0,
                abs_increment: trace.m[m + 1].abs_diff(trace.m[m]),
            };
            // Step j moves S_j to S_{j+1}; (lo, hi] holds steps lo..hi.
            for j in lo..hi {
                if trace.kinds[j] == StepKind::Xi {
                    g.xi_steps += 1;
                }
                if trace.positions[j][0] != trace.positions[j + 1][0] {
                    g.x_moves += 1;
                }
            }
            g
        })
        .collect()
}

/// Histogram of `xi_steps` over many gaps.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GapHistogram {
    /// `counts[g]` gaps had exactly `g` xi-steps.
    pub counts: Vec<u64>,
}

impl GapHistogram {
    pub fn add(&mut self, xi_steps: u64) {
        let g = xi_steps as usize;
        if g >= self.counts.len() {
            self.counts.resize(g + 1, 0);
        }
        self.counts[g] += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        if other.counts.len() > self.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Gaps with more than `g` xi-steps.
    pub fn exceeding(&self, g: u64) -> u64 {
        self.counts.iter().skip(g as usize + 1).sum()
    }
}

/// One row of the gap-tail table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapTailRow {
    pub k: u32,
    /// Empirical `P(gap > 3k)` with its interval.
    pub tail: CiEstimate,
    /// `(1 - 1/24)^k`.
    pub bound: f64,
}

impl GapTailRow {
    pub fn ci_half_width(&self) -> f64 {
        self.tail.half_width()
    }

    /// Empirical tail at most the bound plus `slack` half-widths.
    pub fn holds(&self, slack: f64) -> bool {
        self.tail.point <= self.bound + slack * self.ci_half_width()
    }
}

/// Rows `k = 0..=k_max`.
pub fn gap_tail_table(hist: &GapHistogram, k_max: u32) -> Vec<GapTailRow> {
    let total = hist.total();
    (0..=k_max)
        .map(|k| GapTailRow {
            k,
            tail: wilson(hist.exceeding(BLOCK_LENGTH * k as u64), total, CONFIDENCE),
            bound: (1.0 - BLOCK_PROBABILITY).powi(k as i32),
        })
        .collect()
}
