//! Dyadic time grid and the set of windows with large `U`-range growth.
//!
//! Logarithms are natural throughout.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Default `rho` for window experiments.
pub const DEFAULT_RHO: f64 = 0.01;

/// `t_k = n - ceil(n / 2^k)`, defined for every `k >= 0`.
pub fn t_k(n: u64, k: u32) -> u64 {
    if k >= 64 {
        return n - u64::from(n > 0);
    }
    n - n.div_ceil(1 << k)
}

/// `t_1, ..., t_{floor(log2 n)}`; strictly increasing and below `n`.
pub fn dyadic_grid(n: u64) -> Result<Vec<u64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid needs n >= 2, got {n}")));
    }
    Ok((1..=n.ilog2()).map(|k| t_k(n, k)).collect())
}

/// `floor((ln n)^(3/4))`, the number of candidate windows.
pub fn k_index_count(n: u64) -> u32 {
    if n < 2 {
        return 0;
    }
    (n as f64).ln().powf(0.75).floor() as u32
}

/// Indices `k` in `1..=k_index_count(n)` with
/// `r_U(t_{k+1}) - r_U(t_k) >= rho (t_{k+1} - t_k) / ln n`.
///
/// `r_u[j]` is the range of `U` after `j` steps.
pub fn k_set(r_u: &[u64], n: u64, rho: f64) -> Result<BTreeSet<u32>> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, 1], got {rho}")));
    }
    if (r_u.len() as u64) < n {
        return Err(Error::SeriesTooShort {
            needed: n as usize,
            got: r_u.len(),
        });
    }
    let ln_n = (n as f64).ln();
    Ok((1..=k_index_count(n))
        .filter(|&k| {
            let (a, b) = (t_k(n, k), t_k(n, k + 1));
            let growth = (r_u[b as usize] - r_u[a as usize]) as f64;
            growth >= rho * (b - a) as f64 / ln_n
        })
        .collect())
}

/// Running range of a path given as its visited sites.
pub fn running_range<P: std::hash::Hash + Eq + Copy>(path: &[P]) -> Vec<u64> {
    let mut seen = rustc_hash::FxHashSet::default();
    let mut r = 0;
    path.iter()
        .map(|p| {
            r += u64::from(seen.insert(*p));
            r
        })
        .collect()
}
