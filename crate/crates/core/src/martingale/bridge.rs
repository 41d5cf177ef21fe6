//! Exact sampling of the planar simple random walk conditioned on
//! `U_n = 0`.
//!
//! A closed path of even length `n` has `a` steps each of `+e1, -e1` and `b`
//! each of `+e2, -e2` with `2a + 2b = n`. All closed paths are equally
//! likely, so `(a, b)` has weight `n! / (a!^2 b!^2)` and, given `(a, b)`,
//! the step order is a uniform shuffle of the multiset.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::Serialize;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::estimators::map_walks;
use crate::exhaust::exhaust;
use crate::lattice::UnitStep;
use crate::martingale::grid::{k_index_count, k_set, running_range};
use crate::rng::{RngStream, UniformSource};
use crate::stats::{wilson, CiEstimate, CONFIDENCE};

pub const MAX_BRIDGE_LENGTH: u64 = 1 << 20;
/// Largest `n` for which [`exact_pair_weights`] fits in `u128`.
pub const MAX_EXACT_PAIR_LENGTH: u64 = 40;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BridgeSample {
    pub n: u64,
    pub a: u64,
    pub b: u64,
    pub steps: Vec<UnitStep>,
}

impl BridgeSample {
    /// `U_0..U_n`; the last entry is the origin.
    pub fn positions(&self) -> Vec<[i64; 2]> {
        let mut p = [0i64; 2];
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(p);
        for s in &self.steps {
            p[s.axis as usize] += s.sign();
            out.push(p);
        }
        out
    }
}

fn check_length(n: u64) -> Result<()> {
    if n % 2 == 1 {
        return Err(Error::OddBridge(n));
    }
    if n > MAX_BRIDGE_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "bridge length {n} exceeds {MAX_BRIDGE_LENGTH}"
        )));
    }
    Ok(())
}

/// Sampler for one length; the pair table is built once.
#[derive(Clone, Debug)]
pub struct BridgeSampler {
    n: u64,
    /// `cumulative[a]` is `P(pair index <= a)`; the last entry is 1.
    cumulative: Vec<f64>,
}

impl BridgeSampler {
    pub fn new(n: u64) -> Result<Self> {
        check_length(n)?;
        let m = n / 2;
        let ln_n = ln_factorial(n);
        let logw: Vec<f64> = (0..=m)
            .map(|a| ln_n - 2.0 * ln_factorial(a) - 2.0 * ln_factorial(m - a))
            .collect();
        let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = w.iter().sum();
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = w
            .iter()
            .map(|x| {
                acc += x / total;
                acc
            })
            .collect();
        *cumulative.last_mut().expect("m + 1 entries") = 1.0;
        Ok(Self { n, cumulative })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `P(a)` for `a = 0..=n/2`.
    pub fn pair_probabilities(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn sample<S: UniformSource + ?Sized>(&self, src: &mut S) -> BridgeSample {
        let u = src.below(1 << 53) as f64 / (1u64 << 53) as f64;
        let a = self.cumulative.partition_point(|&c| c <= u) as u64;
        let b = self.n / 2 - a;
        let mut steps = ordered_steps(a, b);
        shuffle(&mut steps, src);
        BridgeSample {
            n: self.n,
            a,
            b,
            steps,
        }
    }
}

/// Fisher-Yates driven by `below`, so the exhaustive enumerator can replay it.
pub fn shuffle<T, S: UniformSource + ?Sized>(items: &mut [T], src: &mut S) {
    for i in (1..items.len()).rev() {
        let j = src.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

pub fn sample_bridge(n: u64, rng: &mut RngStream) -> Result<BridgeSample> {
    Ok(BridgeSampler::new(n)?.sample(rng))
}

/// `n! / (a!^2 b!^2)` for `a = 0..=n/2`, exactly.
pub fn exact_pair_weights(n: u64) -> Result<Vec<u128>> {
    check_length(n)?;
    if n > MAX_EXACT_PAIR_LENGTH {
        return Err(Error::InvalidParameter(format!(
            "exact pair weights need n <= {MAX_EXACT_PAIR_LENGTH}"
        )));
    }
    let fact = |k: u64| (1..=k as u128).product::<u128>();
    let m = n / 2;
    // n!/(a!^2 b!^2) = C(n, m) C(m, a)^2.
    let binom = |n: u64, k: u64| fact(n) / (fact(k) * fact(n - k));
    Ok((0..=m).map(|a| binom(n, m) * binom(m, a).pow(2)).collect())
}

/// Largest `n` accepted by [`exact_bridge_law`].
pub const MAX_EXACT_LAW_LENGTH: u64 = 8;

fn ordered_steps(a: u64, b: u64) -> Vec<UnitStep> {
    let mut steps = Vec::with_capacity(2 * (a + b) as usize);
    for (axis, count) in [(0u8, a), (1u8, b)] {
        for positive in [true, false] {
            steps.extend((0..count).map(|_| UnitStep { axis, positive }));
        }
    }
    steps
}

/// The sampler's path law in exact arithmetic: exact pair weights mixed with
/// the replayed shuffle law for each pair.
pub fn exact_bridge_law(n: u64) -> Result<BTreeMap<Vec<UnitStep>, Rational64>> {
    check_length(n)?;
    if n > MAX_EXACT_LAW_LENGTH {
        return Err(Error::EnumerationTooLarge {
            requested: n as usize,
            max: MAX_EXACT_LAW_LENGTH as usize,
        });
    }
    let pairs = exact_pair_weights(n)?;
    let total: u128 = pairs.iter().sum();
    let mut law = BTreeMap::new();
    for (a, w) in pairs.iter().enumerate() {
        let weight = Rational64::new(*w as i64, total as i64);
        let shuffled = exhaust(|s| {
            let mut steps = ordered_steps(a as u64, n / 2 - a as u64);
            shuffle(&mut steps, &mut s.clone());
            steps
        });
        for (path, p) in shuffled {
            *law.entry(path).or_insert_with(Rational64::default) += p * weight;
        }
    }
    Ok(law)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KTailEstimate {
    pub n: u64,
    pub rho: f64,
    /// `rho (ln n)^(3/4)`.
    pub threshold: f64,
    /// `P(|K| <= threshold | U_n = 0)`.
    pub ci: CiEstimate,
    /// `histogram[j]` bridges had `|K| = j`.
    pub histogram: Vec<u64>,
}

/// Monte Carlo estimate of `P(|K| <= rho (ln n)^(3/4) | U_n = 0)`, bridge `i`
/// on stream `(seed, i)`.
pub fn k_tail_probability(n: u64, rho: f64, num_bridges: u64, seed: u64) -> Result<KTailEstimate> {
    let sampler = BridgeSampler::new(n)?;
    if num_bridges == 0 {
        return Err(Error::InvalidParameter("num_bridges must be at least 1".into()));
    }
    let sizes = map_walks(seed, num_bridges, |_, mut rng| {
        let path = sampler.sample(&mut rng).positions();
        Ok(k_set(&running_range(&path), n, rho)?.len())
    })?;
    let threshold = rho * (n as f64).ln().max(0.0).powf(0.75);
    let mut histogram = vec![0u64; k_index_count(n) as usize + 1];
    for &s in &sizes {
        histogram[s] += 1;
    }
    let hits = sizes.iter().filter(|&&s| s as f64 <= threshold).count() as u64;
    Ok(KTailEstimate {
        n,
        rho,
        threshold,
        ci: wilson(hits, num_bridges, CONFIDENCE),
        histogram,
    })
}
