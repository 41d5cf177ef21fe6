//! `M_4(4,2)` from three independent planar walks.
//!
//! At a fresh site a fair coin picks the X block (next step of `U1` on axes
//! 1-2) or the Y block (next step of `U2` on axes 3-4); at a revisited site
//! the next step of `V` moves axes 3-4. Hence
//! `X_k = U1(r1)` and `Y_k = U2(r2) + V(k - r_{k-1})`, where `r1, r2` count
//! the fresh jumps of each block among the first `k` steps.

use crate::lattice::{LatticePoint, VisitedSet};
use crate::rng::{RngStream, UniformSource};

/// Step of a planar simple random walk: draw `0..4` maps to
/// `+e1, -e1, +e2, -e2`.
#[inline]
pub fn planar_step<S: UniformSource + ?Sized>(src: &mut S) -> [i64; 2] {
    match src.below(4) {
        0 => [1, 0],
        1 => [-1, 0],
        2 => [0, 1],
        _ => [0, -1],
    }
}

/// The four independent sequences consumed by the decoupled generator.
pub struct DecoupledSources<S> {
    pub coin: S,
    pub u1: S,
    pub u2: S,
    pub v: S,
}

impl DecoupledSources<RngStream> {
    pub fn from_stream(rng: &RngStream) -> Self {
        Self {
            coin: rng.substream(0),
            u1: rng.substream(1),
            u2: rng.substream(2),
            v: rng.substream(3),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct DecoupledTrace {
    pub path: Vec<LatticePoint>,
    /// Positions of the driving walks after each of their own steps,
    /// starting at the origin.
    pub u1: Vec<[i64; 2]>,
    pub u2: Vec<[i64; 2]>,
    pub v: Vec<[i64; 2]>,
    /// `(X-jumps, Y-jumps, revisit steps)` among the first `k` steps, per `k`.
    pub counts: Vec<(usize, usize, usize)>,
}

pub fn decoupled_generator_m442<S: UniformSource>(
    n_steps: usize,
    sources: &mut DecoupledSources<S>,
) -> DecoupledTrace {
    let mut t = DecoupledTrace {
        path: vec![LatticePoint::origin(4)],
        u1: vec![[0, 0]],
        u2: vec![[0, 0]],
        v: vec![[0, 0]],
        counts: vec![(0, 0, 0)],
    };
    let mut visited = VisitedSet::new(4);
    visited.insert(&[0; 4]);
    let mut fresh = true;
    let advance = |walk: &mut Vec<[i64; 2]>, src: &mut S| {
        let s = planar_step(src);
        let last = *walk.last().unwrap();
        walk.push([last[0] + s[0], last[1] + s[1]]);
    };
    for _ in 0..n_steps {
        let (mut x, mut y, mut r) = *t.counts.last().unwrap();
        if fresh {
            if sources.coin.below(2) == 0 {
                advance(&mut t.u1, &mut sources.u1);
                x += 1;
            } else {
                advance(&mut t.u2, &mut sources.u2);
                y += 1;
            }
        } else {
            advance(&mut t.v, &mut sources.v);
            r += 1;
        }
        let a = t.u1.last().unwrap();
        let b = t.u2.last().unwrap();
        let c = t.v.last().unwrap();
        let site = LatticePoint(vec![a[0], a[1], b[0] + c[0], b[1] + c[1]]);
        fresh = visited.insert(site.coords());
        t.path.push(site);
        t.counts.push((x, y, r));
    }
    t
}

/// [`decoupled_generator_m442`] fed by substreams of `rng`.
pub fn decoupled_m442_seeded(n_steps: usize, rng: &RngStream) -> DecoupledTrace {
    decoupled_generator_m442(n_steps, &mut DecoupledSources::from_stream(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaust::{exhaust, total_variation};
    use crate::lattice::{enumerate_paths, path_steps, WalkSpec};
    use num_traits::Zero;

    #[test]
    fn law_matches_enumeration() {
        let spec = WalkSpec::new(4, 4, 2).unwrap();
        for n in 0..=3 {
            let oracle = enumerate_paths(&spec, n).unwrap();
            let law = exhaust(|s| {
                let mut src = DecoupledSources {
                    coin: s.clone(),
                    u1: s.clone(),
                    u2: s.clone(),
                    v: s.clone(),
                };
                path_steps(&decoupled_generator_m442(n, &mut src).path).unwrap()
            });
            assert!(total_variation(&law, &oracle).is_zero(), "n={n}");
        }
    }

    #[test]
    fn coordinates_follow_the_driving_walks() {
        for seed in 0..20 {
            let t = decoupled_m442_seeded(2_000, &RngStream::new(seed, 0));
            let mut visited = std::collections::HashSet::new();
            let mut fresh_before = 0usize;
            for (k, p) in t.path.iter().enumerate() {
                let (x, y, r) = t.counts[k];
                assert_eq!(p.0[..2], t.u1[x][..]);
                assert_eq!(p.0[2], t.u2[y][0] + t.v[r][0]);
                assert_eq!(p.0[3], t.u2[y][1] + t.v[r][1]);
                // Revisit steps among the first k steps: k - r_{k-1}.
                if k > 0 {
                    assert_eq!(r, k - fresh_before);
                }
                if visited.insert(p.clone()) {
                    fresh_before += 1;
                }
            }
        }
    }

    #[test]
    fn without_revisits_y_is_u2() {
        for seed in 0..200 {
            let t = decoupled_m442_seeded(6, &RngStream::new(seed, 1));
            let (_, y, r) = *t.counts.last().unwrap();
            if r == 0 {
                let p = t.path.last().unwrap();
                assert_eq!(p.0[2..], t.u2[y][..]);
            }
        }
    }
}
