//! `M_4(2,3)` built from two i.i.d. sequences.
//!
//! `xi` is uniform on `(±1,0,0,0), (0,±1,0,0)`; `zeta` is uniform on
//! `(0,±1,0,0), (0,0,±1,0), (0,0,0,±1)`. With `r_n` the range at time `n`
//! and `r_{-1} = 0`, the step is `xi_{r_n}` when `S_n` is fresh
//! (`r_n = r_{n-1} + 1`) and `zeta_{n+1-r_n}` otherwise, so each sequence
//! is consumed in order.
//!
//! `tau_k` are the successive times at which `(Z, W)` moves,
//! `M_k = X_{tau_k}` and `U_k = (Z_{tau_k}, W_{tau_k})`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{VisitedSet, COORD_LIMIT};
use crate::rng::{RngStream, UniformSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StepKind {
    /// Fresh-site step, one of `±e1, ±e2`.
    Xi,
    /// Revisit step, one of `±e2, ±e3, ±e4`.
    Zeta,
}

/// Draw `0..4` maps to `+e1, -e1, +e2, -e2`.
#[inline]
pub fn xi_step<S: UniformSource + ?Sized>(src: &mut S) -> (usize, i64) {
    let i = src.below(4);
    ((i / 2) as usize, if i.is_multiple_of(2) { 1 } else { -1 })
}

/// Draw `0..6` maps to `+e2, -e2, +e3, -e3, +e4, -e4`.
#[inline]
pub fn zeta_step<S: UniformSource + ?Sized>(src: &mut S) -> (usize, i64) {
    let i = src.below(6);
    (1 + (i / 2) as usize, if i.is_multiple_of(2) { 1 } else { -1 })
}

/// Streaming `M_4(2,3)` walker.
#[derive(Clone, Debug)]
pub struct M423Walker<S> {
    pub pos: [i64; 4],
    /// Completed steps.
    pub n: u64,
    /// `r_n`.
    pub range: u64,
    /// `S_n` is fresh.
    pub fresh: bool,
    /// `U` moves so far.
    pub u_moves: u64,
    xi_used: u64,
    zeta_used: u64,
    visited: VisitedSet,
    xi: S,
    zeta: S,
}

/// What one step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct M423Step {
    pub kind: StepKind,
    pub axis: usize,
    pub sign: i64,
    /// `(Z, W)` changed, i.e. this time is some `tau_k`.
    pub u_moved: bool,
}

impl<S: UniformSource> M423Walker<S> {
    pub fn new(xi: S, zeta: S) -> Self {
        let mut visited = VisitedSet::new(4);
        visited.insert(&[0; 4]);
        Self {
            pos: [0; 4],
            n: 0,
            range: 1,
            fresh: true,
            u_moves: 0,
            xi_used: 0,
            zeta_used: 0,
            visited,
            xi,
            zeta,
        }
    }

    #[inline]
    pub fn step(&mut self) -> Result<M423Step> {
        let (kind, (axis, sign)) = if self.fresh {
            // xi index r_n.
            debug_assert_eq!(self.range, self.xi_used + 1);
            self.xi_used += 1;
            (StepKind::Xi, xi_step(&mut self.xi))
        } else {
            // zeta index n + 1 - r_n.
            debug_assert_eq!(self.n + 1 - self.range, self.zeta_used + 1);
            self.zeta_used += 1;
            (StepKind::Zeta, zeta_step(&mut self.zeta))
        };
        self.pos[axis] += sign;
        self.n += 1;
        if self.pos[axis].abs() >= COORD_LIMIT {
            return Err(Error::CoordinateOverflow { step: self.n });
        }
        self.fresh = self.visited.insert(&self.pos);
        if self.fresh {
            self.range += 1;
        }
        let u_moved = axis >= 2;
        if u_moved {
            self.u_moves += 1;
        }
        Ok(M423Step {
            kind,
            axis,
            sign,
            u_moved,
        })
    }
}

/// A realized path with its stopping-time decomposition.
#[derive(Clone, Debug, Default, Serialize)]
pub struct M423Trace {
    /// `S_0..S_n` as `(X, Y, Z, W)`.
    pub positions: Vec<[i64; 4]>,
    /// `kinds[j]` labels the step from time `j` to `j + 1`.
    pub kinds: Vec<StepKind>,
    /// `tau_0 = 0 < tau_1 < ...`, all `<= n`.
    pub tau: Vec<u64>,
    /// `M_k = X_{tau_k}`.
    pub m: Vec<i64>,
    /// `U_k = (Z_{tau_k}, W_{tau_k})`.
    pub u: Vec<[i64; 2]>,
    /// `r_U(k)`: distinct sites among `U_0..U_k`.
    pub r_u: Vec<u64>,
}

/// Simulates `n_steps` steps with `xi` and `zeta` as the two sequences.
pub fn build_m423<S: UniformSource>(n_steps: u64, xi: S, zeta: S) -> Result<M423Trace> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    let mut walker = M423Walker::new(xi, zeta);
    let mut t = M423Trace {
        positions: Vec::with_capacity(n_steps as usize + 1),
        kinds: Vec::with_capacity(n_steps as usize),
        tau: vec![0],
        m: vec![0],
        u: vec![[0, 0]],
        r_u: vec![1],
    };
    t.positions.push(walker.pos);
    let mut u_seen = VisitedSet::new(2);
    u_seen.insert(&[0, 0]);
    for _ in 0..n_steps {
        let s = walker.step()?;
        t.positions.push(walker.pos);
        t.kinds.push(s.kind);
        if s.u_moved {
            let p = walker.pos;
            t.tau.push(walker.n);
            t.m.push(p[0]);
            t.u.push([p[2], p[3]]);
            let new = u_seen.insert(&[p[2], p[3]]);
            t.r_u.push(t.r_u.last().unwrap() + u64::from(new));
        }
    }
    Ok(t)
}

/// [`build_m423`] with `xi` and `zeta` drawn from substreams 0 and 1.
pub fn build_m423_seeded(n_steps: u64, rng: &RngStream) -> Result<M423Trace> {
    build_m423(n_steps, rng.substream(0), rng.substream(1))
}

impl M423Trace {
    /// Number of completed martingale increments.
    pub fn increments(&self) -> usize {
        self.m.len().saturating_sub(1)
    }

    /// Checks the structural invariants; returns a description of the first
    /// failure.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.tau.first() != Some(&0) {
            return Err("tau_0 != 0".into());
        }
        if self.tau.windows(2).any(|w| w[0] >= w[1]) {
            return Err("tau not strictly increasing".into());
        }
        let mut k = 1;
        for j in 1..self.positions.len() {
            let (a, b) = (self.positions[j - 1], self.positions[j]);
            let zw_moved = a[2..] != b[2..];
            let is_tau = self.tau.get(k) == Some(&(j as u64));
            if zw_moved != is_tau {
                return Err(format!("(Z,W) change at time {j} disagrees with tau"));
            }
            if is_tau {
                k += 1;
            }
            if self.kinds[j - 1] == StepKind::Zeta && a[0] != b[0] {
                return Err(format!("X moved on a zeta step at time {j}"));
            }
        }
        // Rebuild (Z, W) from U and tau.
        let mut k = 0;
        for (j, p) in self.positions.iter().enumerate() {
            while k + 1 < self.tau.len() && self.tau[k + 1] <= j as u64 {
                k += 1;
            }
            if [p[2], p[3]] != self.u[k] {
                return Err(format!("U and tau do not reproduce (Z,W) at time {j}"));
            }
            if j as u64 == self.tau[k] && p[0] != self.m[k] {
                return Err(format!("M_{k} != X at tau_{k}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaust::{exhaust, total_variation};
    use crate::lattice::{enumerate_paths, UnitStep, WalkSpec};
    use num_traits::Zero;

    fn steps_of(t: &M423Trace) -> Vec<UnitStep> {
        t.positions
            .windows(2)
            .map(|w| UnitStep::between(&w[0], &w[1]).unwrap())
            .collect()
    }

    #[test]
    fn law_matches_enumeration() {
        let spec = WalkSpec::new(4, 2, 3).unwrap();
        for n in 1..=3 {
            let oracle = enumerate_paths(&spec, n as usize).unwrap();
            let law = exhaust(|s| steps_of(&build_m423(n, s.clone(), s.clone()).unwrap()));
            assert!(total_variation(&law, &oracle).is_zero(), "n={n}");
        }
    }

    #[test]
    fn invariants_hold_on_random_traces() {
        for seed in 0..50 {
            let t = build_m423_seeded(5_000, &RngStream::new(seed, 0)).unwrap();
            t.check_invariants().unwrap();
            assert_eq!(t.tau.len(), t.m.len());
            assert_eq!(t.u.len(), t.r_u.len());
        }
    }

    #[test]
    fn first_tau_waits_for_a_zw_step() {
        for seed in 0..300 {
            let t = build_m423_seeded(3, &RngStream::new(seed, 9)).unwrap();
            let early = t.positions.windows(2).all(|w| w[0][2..] == w[1][2..]);
            if early {
                assert_eq!(t.tau.len(), 1, "tau_1 > 3");
            }
        }
    }

    #[test]
    fn rejects_empty_runs() {
        assert!(build_m423_seeded(0, &RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn u_increments_are_uniform() {
        let mut counts = [0u64; 4];
        let mut seed = 0;
        while counts.iter().sum::<u64>() < 100_000 {
            let t = build_m423_seeded(20_000, &RngStream::new(77, seed)).unwrap();
            for w in t.u.windows(2) {
                let d = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
                let i = match d {
                    [1, 0] => 0,
                    [-1, 0] => 1,
                    [0, 1] => 2,
                    [0, -1] => 3,
                    _ => panic!("U step {d:?} is not a unit step"),
                };
                counts[i] += 1;
            }
            seed += 1;
        }
        let r = crate::stats::chi_square(&counts, &[0.25; 4]);
        assert!(r.p_value > crate::stats::P_THRESHOLD, "{counts:?} {r:?}");
    }
}
