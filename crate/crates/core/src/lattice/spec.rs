use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 16;

/// Model instance `M_d(d1, d2)`: fresh sites step along the first `d1`
/// axes, revisited sites along the last `d2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct WalkSpec {
    d: usize,
    d1: usize,
    d2: usize,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    d: usize,
    d1: usize,
    d2: usize,
}

impl TryFrom<RawSpec> for WalkSpec {
    type Error = Error;
    fn try_from(raw: RawSpec) -> Result<Self> {
        WalkSpec::new(raw.d, raw.d1, raw.d2)
    }
}

impl From<WalkSpec> for RawSpec {
    fn from(s: WalkSpec) -> Self {
        RawSpec {
            d: s.d,
            d1: s.d1,
            d2: s.d2,
        }
    }
}

/// Which counter a jump from a fresh site feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum JumpBlock {
    First,
    Second,
}

impl WalkSpec {
    pub fn new(d: usize, d1: usize, d2: usize) -> Result<Self> {
        let invalid = |reason| Error::InvalidSpec { d, d1, d2, reason };
        if !(MIN_DIM..=MAX_DIM).contains(&d) {
            return Err(invalid("dimension must lie in 2..=16"));
        }
        if d1 == 0 || d1 > d {
            return Err(invalid("d1 must lie in 1..=d"));
        }
        if d2 == 0 || d2 > d {
            return Err(invalid("d2 must lie in 1..=d"));
        }
        Ok(Self { d, d1, d2 })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    /// Overlap `r = d1 + d2 - d`, the number of axes usable in both regimes.
    /// Negative when the two blocks leave a gap.
    pub fn overlap(&self) -> i64 {
        self.d1 as i64 + self.d2 as i64 - self.d as i64
    }

    /// Zero-based axes of the fresh-site kernel.
    pub fn fresh_axes(&self) -> Range<usize> {
        0..self.d1
    }

    /// Zero-based axes of the revisit kernel.
    pub fn revisit_axes(&self) -> Range<usize> {
        self.d - self.d2..self.d
    }

    /// Block attribution of a fresh-site jump along zero-based `axis`:
    /// axes `1..=d1-r` (one-based) are the strictly fresh block, anything
    /// else (the overlap) counts toward the second block.
    pub fn fresh_jump_block(&self, axis: usize) -> JumpBlock {
        if (axis as i64) < self.d1 as i64 - self.overlap() {
            JumpBlock::First
        } else {
            JumpBlock::Second
        }
    }

    /// True when fresh jumps can land in both blocks, so the split
    /// `r_n = r_n^(1) + r_n^(2)` is non-degenerate.
    pub fn has_block_split(&self) -> bool {
        let r = self.overlap();
        r > 0 && (self.d1 as i64) > r
    }
}

impl fmt::Display for WalkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M_{}({},{})", self.d, self.d1, self.d2)
    }
}

/// A site of `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn origin(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn l1_distance(&self, other: &Self) -> u64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }

    pub fn apply(&mut self, step: UnitStep) {
        self.0[step.axis as usize] += step.sign();
    }
}

/// `±e_{axis+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnitStep {
    pub axis: u8,
    pub positive: bool,
}

impl UnitStep {
    pub fn new(axis: usize, positive: bool) -> Self {
        Self {
            axis: axis as u8,
            positive,
        }
    }

    pub fn sign(&self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    pub fn reversed(&self) -> Self {
        Self {
            axis: self.axis,
            positive: !self.positive,
        }
    }

    /// Recovers the step between two neighbouring sites.
    pub fn between(from: &[i64], to: &[i64]) -> Option<Self> {
        let mut found = None;
        for (axis, (a, b)) in from.iter().zip(to).enumerate() {
            match b - a {
                0 => {}
                1 | -1 if found.is_none() => found = Some(Self::new(axis, b > a)),
                _ => return None,
            }
        }
        found
    }
}

impl fmt::Display for UnitStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.positive { '+' } else { '-' };
        write!(f, "{s}e{}", self.axis + 1)
    }
}

/// Step sequence of a nearest-neighbour path; `None` if some pair of
/// consecutive sites is not adjacent.
pub fn path_steps(path: &[LatticePoint]) -> Option<Vec<UnitStep>> {
    path.windows(2)
        .map(|w| UnitStep::between(&w[0].0, &w[1].0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(WalkSpec::new(1, 1, 1).is_err());
        assert!(WalkSpec::new(17, 1, 1).is_err());
        assert!(WalkSpec::new(4, 5, 2).is_err());
        assert!(WalkSpec::new(4, 0, 2).is_err());
        assert!(WalkSpec::new(4, 2, 0).is_err());
        assert!(WalkSpec::new(16, 16, 16).is_ok());
    }

    #[test]
    fn overlap_is_recomputed() {
        assert_eq!(WalkSpec::new(4, 2, 3).unwrap().overlap(), 1);
        assert_eq!(WalkSpec::new(4, 2, 2).unwrap().overlap(), 0);
        assert_eq!(WalkSpec::new(5, 1, 2).unwrap().overlap(), -2);
        assert_eq!(WalkSpec::new(6, 4, 5).unwrap().overlap(), 3);
    }

    #[test]
    fn block_attribution() {
        // M_4(4,2): X = axes 1-2, Y = axes 3-4.
        let s = WalkSpec::new(4, 4, 2).unwrap();
        let blocks: Vec<_> = s.fresh_axes().map(|a| s.fresh_jump_block(a)).collect();
        assert_eq!(
            blocks,
            [JumpBlock::First, JumpBlock::First, JumpBlock::Second, JumpBlock::Second]
        );
        assert!(s.has_block_split());
        // Non-overlapping: every fresh jump is strictly fresh.
        let s = WalkSpec::new(4, 2, 2).unwrap();
        assert!(s.fresh_axes().all(|a| s.fresh_jump_block(a) == JumpBlock::First));
        assert!(!s.has_block_split());
        // M_4(2,4): the fresh axes all sit inside the overlap.
        let s = WalkSpec::new(4, 2, 4).unwrap();
        assert!(s.fresh_axes().all(|a| s.fresh_jump_block(a) == JumpBlock::Second));
        assert!(!s.has_block_split());
    }

    #[test]
    fn serde_validates() {
        let ok: WalkSpec = serde_json::from_str(r#"{"d":4,"d1":2,"d2":3}"#).unwrap();
        assert_eq!(ok, WalkSpec::new(4, 2, 3).unwrap());
        assert!(serde_json::from_str::<WalkSpec>(r#"{"d":4,"d1":5,"d2":3}"#).is_err());
    }

    #[test]
    fn step_between_neighbours() {
        assert_eq!(UnitStep::between(&[0, 0], &[0, -1]), Some(UnitStep::new(1, false)));
        assert_eq!(UnitStep::between(&[0, 0], &[1, 1]), None);
        assert_eq!(UnitStep::between(&[0, 0], &[0, 0]), None);
    }
}
