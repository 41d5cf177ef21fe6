//! Walks driven by a family of step measures and an adapted selection rule:
//! `X_{n+1} = X_n + xi^{l_n}_{n+1}`, where `l_n` depends only on the path up
//! to time `n` and each measure feeds its own i.i.d. sequence.

mod measure;

use std::collections::HashSet;

use num_rational::Rational64;

pub use measure::{Atom, StepMeasure};

use crate::error::{Error, Result};
use crate::lattice::{first_visit_kernel, revisit_kernel, LatticePoint, VisitedSet, WalkSpec};
use crate::linalg::SymMatrix;
use crate::rng::{RngStream, UniformSource};

/// Positions `X_0..X_n`. Integer storage is used whenever every atom of
/// every measure is integral.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Trajectory {
    Lattice(Vec<LatticePoint>),
    Rational(Vec<Vec<Rational64>>),
}

impl Trajectory {
    pub fn len(&self) -> usize {
        match self {
            Trajectory::Lattice(p) => p.len(),
            Trajectory::Rational(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_lattice(&self) -> Option<&[LatticePoint]> {
        match self {
            Trajectory::Lattice(p) => Some(p),
            Trajectory::Rational(_) => None,
        }
    }
}

/// Chooses the measure that drives the next step. `history` holds
/// `X_0..X_k` when the step `k -> k+1` is chosen; the rule may keep its own
/// auxiliary state but sees nothing beyond the prefix.
pub trait AdaptedRule {
    /// Zero-based measure index.
    fn select(&mut self, history: &Trajectory) -> usize;
}

impl<F: FnMut(&Trajectory) -> usize> AdaptedRule for F {
    fn select(&mut self, history: &Trajectory) -> usize {
        self(history)
    }
}

/// Measure 0 at a site visited for the first time, measure 1 otherwise.
#[derive(Clone, Debug, Default)]
pub struct FreshnessRule {
    lattice_seen: Option<VisitedSet>,
    rational_seen: HashSet<Vec<Rational64>>,
    consumed: usize,
}

impl FreshnessRule {
    pub fn new() -> Self {
        Self::default()
    }
}

impl AdaptedRule for FreshnessRule {
    fn select(&mut self, history: &Trajectory) -> usize {
        let len = history.len();
        assert!(len > self.consumed, "history must grow between calls");
        let fresh = match history {
            Trajectory::Lattice(p) => {
                let seen = self
                    .lattice_seen
                    .get_or_insert_with(|| VisitedSet::new(p[0].dim()));
                for site in &p[self.consumed..len - 1] {
                    seen.insert(site.coords());
                }
                !seen.contains(p[len - 1].coords())
            }
            Trajectory::Rational(p) => {
                for site in &p[self.consumed..len - 1] {
                    self.rational_seen.insert(site.clone());
                }
                !self.rational_seen.contains(&p[len - 1])
            }
        };
        self.consumed = len - 1;
        if fresh {
            0
        } else {
            1
        }
    }
}

fn check_family(measures: &[StepMeasure]) -> Result<usize> {
    let first = measures
        .first()
        .ok_or_else(|| Error::InvalidMeasure("empty measure family".into()))?;
    let d = first.dim();
    if let Some(m) = measures.iter().find(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.dim(),
        });
    }
    Ok(d)
}

/// Generates `n_steps` steps from the origin. `sources[i]` is the i.i.d.
/// stream of measure `i`; a measure's stream advances only when it is
/// selected.
pub fn generate<S: UniformSource>(
    measures: &[StepMeasure],
    rule: &mut dyn AdaptedRule,
    n_steps: usize,
    sources: &mut [S],
) -> Result<Trajectory> {
    let d = check_family(measures)?;
    if sources.len() != measures.len() {
        return Err(Error::InvalidParameter(format!(
            "{} sources for {} measures",
            sources.len(),
            measures.len()
        )));
    }
    let integral = measures.iter().all(StepMeasure::is_integral);
    let mut path = if integral {
        let mut v = Vec::with_capacity(n_steps + 1);
        v.push(LatticePoint::origin(d));
        Trajectory::Lattice(v)
    } else {
        let mut v = Vec::with_capacity(n_steps + 1);
        v.push(vec![Rational64::from_integer(0); d]);
        Trajectory::Rational(v)
    };
    for _ in 0..n_steps {
        let index = rule.select(&path);
        let measure = measures.get(index).ok_or(Error::RuleIndexOutOfRange {
            index,
            count: measures.len(),
        })?;
        let atom = measure.sample_index(&mut sources[index]);
        match &mut path {
            Trajectory::Lattice(p) => {
                let inc = measure.integer_point(atom).expect("integral atom");
                let mut next = p.last().unwrap().clone();
                for (c, x) in next.0.iter_mut().zip(&inc.0) {
                    *c += x;
                }
                p.push(next);
            }
            Trajectory::Rational(p) => {
                let inc = &measure.atoms()[atom].point;
                let next = p.last().unwrap().iter().zip(inc).map(|(c, x)| c + x).collect();
                p.push(next);
            }
        }
    }
    Ok(path)
}

/// [`generate`] with measure `i` fed by `rng.substream(i)`.
pub fn generate_seeded(
    measures: &[StepMeasure],
    rule: &mut dyn AdaptedRule,
    n_steps: usize,
    rng: &RngStream,
) -> Result<Trajectory> {
    let mut sources: Vec<RngStream> = (0..measures.len() as u64).map(|i| rng.substream(i)).collect();
    generate(measures, rule, n_steps, &mut sources)
}

/// `M_d(d1, d2)` in the adapted framework: the two kernels and the
/// freshness rule.
pub fn berw_as_adapted_rule(spec: &WalkSpec) -> (Vec<StepMeasure>, FreshnessRule) {
    (
        vec![first_visit_kernel(spec), revisit_kernel(spec)],
        FreshnessRule::new(),
    )
}

pub fn mean(measure: &StepMeasure) -> Vec<Rational64> {
    measure.mean()
}

pub fn covariance(measure: &StepMeasure) -> SymMatrix<Rational64> {
    measure.covariance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaust::{exhaust, total_variation};
    use crate::lattice::{enumerate_paths, path_steps};
    use num_traits::{One, Zero};

    fn spec(d: usize, d1: usize, d2: usize) -> WalkSpec {
        WalkSpec::new(d, d1, d2).unwrap()
    }

    #[test]
    fn single_measure_is_simple_random_walk() {
        let srw = StepMeasure::uniform_on_axes(3, 0..3);
        let mut rule = |_: &Trajectory| 0usize;
        let path = generate_seeded(&[srw], &mut rule, 500, &RngStream::new(1, 0)).unwrap();
        let pts = path.as_lattice().unwrap();
        assert_eq!(pts.len(), 501);
        assert!(path_steps(pts).is_some());
    }

    #[test]
    fn split_point_mass_is_one_dimensional() {
        let m = StepMeasure::uniform_on_axes(4, 0..1);
        let mut rule = |_: &Trajectory| 0usize;
        let path = generate_seeded(&[m], &mut rule, 200, &RngStream::new(2, 0)).unwrap();
        for p in path.as_lattice().unwrap() {
            assert!(p.0[1..].iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn rational_atoms_are_kept_exact() {
        let half = Rational64::new(1, 2);
        let m = StepMeasure::new(
            1,
            vec![
                Atom { point: vec![half], prob: half },
                Atom { point: vec![-half], prob: half },
            ],
        )
        .unwrap();
        let mut rule = |_: &Trajectory| 0usize;
        let path = generate_seeded(&[m], &mut rule, 3, &RngStream::new(0, 0)).unwrap();
        let Trajectory::Rational(p) = path else { panic!("expected rational storage") };
        assert_eq!(p.len(), 4);
        assert!(p.iter().all(|x| (x[0] * 2).is_integer()));
    }

    #[test]
    fn rule_index_is_checked() {
        let m = StepMeasure::uniform_on_axes(2, 0..2);
        let mut rule = |_: &Trajectory| 3usize;
        let err = generate_seeded(&[m], &mut rule, 1, &RngStream::new(0, 0)).unwrap_err();
        assert_eq!(err, Error::RuleIndexOutOfRange { index: 3, count: 1 });
    }

    #[test]
    fn berw_instance_shapes() {
        let (m, _) = berw_as_adapted_rule(&spec(4, 2, 2));
        assert_eq!(m.len(), 2);
        let (m, _) = berw_as_adapted_rule(&spec(3, 3, 3));
        assert_eq!(m[0], m[1]);
        let (m, _) = berw_as_adapted_rule(&spec(4, 2, 3));
        assert_eq!(m[0].atoms().len(), 4);
        assert_eq!(m[1].atoms().len(), 6);
        assert!(m[1].atoms().iter().all(|a| a.point[0].is_zero()));
    }

    #[test]
    fn berw_kernel_moments() {
        for d in 2..=6 {
            for d1 in 1..=d {
                for d2 in 1..=d {
                    let s = spec(d, d1, d2);
                    let (ms, _) = berw_as_adapted_rule(&s);
                    for (m, axes, k) in [(&ms[0], s.fresh_axes(), d1), (&ms[1], s.revisit_axes(), d2)] {
                        assert!(mean(m).iter().all(|c| c.is_zero()));
                        let c = covariance(m);
                        assert!(c.is_diagonal());
                        assert!(c.trace().is_one());
                        for i in 0..d {
                            let want = if axes.contains(&i) {
                                Rational64::new(1, k as i64)
                            } else {
                                Rational64::zero()
                            };
                            assert_eq!(c.get(i, i), want);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn law_matches_enumeration() {
        for s in [spec(4, 2, 3), spec(4, 4, 2), spec(4, 2, 2)] {
            for n in 0..=3 {
                let oracle = enumerate_paths(&s, n).unwrap();
                let law = exhaust(|src| {
                    let (ms, mut rule) = berw_as_adapted_rule(&s);
                    let mut sources = vec![src.clone(), src.clone()];
                    let path = generate(&ms, &mut rule, n, &mut sources).unwrap();
                    path_steps(path.as_lattice().unwrap()).unwrap()
                });
                assert!(total_variation(&law, &oracle).is_zero(), "{s} n={n}");
            }
        }
    }
}
