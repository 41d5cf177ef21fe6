//! Interval estimates and goodness-of-fit statistics shared by the
//! Monte Carlo suites.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

/// Confidence level used suite-wide.
pub const CONFIDENCE: f64 = 0.99;
/// p-value threshold for chi-square and Kolmogorov-Smirnov checks.
pub const P_THRESHOLD: f64 = 0.001;

/// Point estimate with a two-sided confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CiEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub samples: u64,
}

impl CiEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            point: self.point * factor,
            lower: self.lower * factor,
            upper: self.upper * factor,
            ..*self
        }
    }
}

/// Two-sided standard normal quantile for `level`.
pub fn z_score(level: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, level: f64) -> CiEstimate {
    if trials == 0 {
        return CiEstimate {
            point: 0.0,
            lower: 0.0,
            upper: 1.0,
            level,
            samples: 0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_score(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    CiEstimate {
        point: p,
        lower: (centre - half).max(0.0).min(p),
        upper: (centre + half).min(1.0).max(p),
        level,
        samples: trials,
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Streaming count, sum and sum of squares.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum.add(x);
        self.sum_sq.add(x * x);
    }

    pub fn merge(&mut self, other: &Self) {
        self.n += other.n;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn summary(&self) -> MeanSummary {
        if self.n == 0 {
            return MeanSummary::from_values(&[]);
        }
        let n = self.n as f64;
        let mean = self.sum.value() / n;
        let var = if self.n > 1 {
            ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MeanSummary {
            mean,
            std_error: (var / n).sqrt(),
            n: self.n,
        }
    }
}

/// Sample mean and standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanSummary {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl MeanSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                n: 0,
            };
        }
        let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let ss = values
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .collect::<CompensatedSum>()
            .value();
        let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            n: n as u64,
        }
    }

    /// Normal-approximation interval.
    pub fn ci(&self, level: f64) -> CiEstimate {
        let h = z_score(level) * self.std_error;
        CiEstimate {
            point: self.mean,
            lower: self.mean - h,
            upper: self.mean + h,
            level,
            samples: self.n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

/// Pearson goodness of fit of `observed` counts against `probs`. Cells with
/// zero expected mass must have zero counts (otherwise p = 0).
pub fn chi_square(observed: &[u64], probs: &[f64]) -> ChiSquareResult {
    assert_eq!(observed.len(), probs.len());
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let mut stat = 0.0;
    let mut cells = 0u64;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return ChiSquareResult {
                    statistic: f64::INFINITY,
                    dof: 0,
                    p_value: 0.0,
                };
            }
            continue;
        }
        let e = n * p;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("dof > 0").cdf(stat)
    };
    ChiSquareResult {
        statistic: stat,
        dof,
        p_value,
    }
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample critical value at significance `alpha`.
pub fn ks_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Every estimate's interval reaches down to (or below) the next one's
/// upper bound, i.e. no consecutive increase is significant.
pub fn non_increasing_within_ci(estimates: &[CiEstimate]) -> bool {
    estimates.windows(2).all(|w| w[1].lower <= w[0].upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn z_at_99_percent() {
        assert!((z_score(0.99) - 2.5758293035489).abs() < 1e-9);
    }

    #[test]
    fn wilson_reference_values() {
        // 0 of 100 at 95%: upper = z^2 / (n + z^2).
        let e = wilson(0, 100, 0.95);
        let z2 = 1.959963984540054f64.powi(2);
        assert_eq!(e.lower, 0.0);
        assert!((e.upper - z2 / (100.0 + z2)).abs() < 1e-12);
        let e = wilson(50, 100, 0.95);
        assert!((e.lower - 0.4038315).abs() < 1e-6);
        assert!((e.upper - 0.5961685).abs() < 1e-6);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let r = chi_square(&[25, 25, 25, 25], &[0.25; 4]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 3);
        assert!((r.p_value - 1.0).abs() < 1e-12);
        assert_eq!(chi_square(&[1, 0], &[0.0, 1.0]).p_value, 0.0);
    }

    #[test]
    fn ks_identical_and_disjoint() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(ks_statistic(&a, &a), 0.0);
        assert_eq!(ks_statistic(&a, &[10.0, 11.0]), 1.0);
        assert!((ks_critical(10_000, 10_000, 0.001) - 0.02760).abs() < 1e-4);
    }

    #[test]
    fn monotone_check() {
        let e = |l, u| CiEstimate { point: (l + u) / 2.0, lower: l, upper: u, level: 0.99, samples: 1 };
        assert!(non_increasing_within_ci(&[e(0.4, 0.6), e(0.5, 0.7), e(0.1, 0.2)]));
        assert!(!non_increasing_within_ci(&[e(0.1, 0.2), e(0.3, 0.4)]));
    }

    proptest! {
        #[test]
        fn moments_match_direct_summary(
            xs in proptest::collection::vec(-100.0f64..100.0, 2..200),
            split in 0usize..200,
        ) {
            let split = split.min(xs.len());
            let (mut a, mut b) = (Moments::default(), Moments::default());
            xs[..split].iter().for_each(|&x| a.push(x));
            xs[split..].iter().for_each(|&x| b.push(x));
            a.merge(&b);
            let got = a.summary();
            let want = MeanSummary::from_values(&xs);
            prop_assert_eq!(got.n, want.n);
            prop_assert!((got.mean - want.mean).abs() < 1e-9);
            prop_assert!((got.std_error - want.std_error).abs() < 1e-6 * (1.0 + want.std_error));
        }

        #[test]
        fn wilson_brackets_point(trials in 1u64..10_000, frac in 0.0f64..=1.0) {
            let s = ((trials as f64) * frac).floor() as u64;
            let e = wilson(s, trials, CONFIDENCE);
            prop_assert!(0.0 <= e.lower && e.lower <= e.point && e.point <= e.upper && e.upper <= 1.0);
        }
    }
}
