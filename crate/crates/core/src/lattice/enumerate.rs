//! Exact trajectory law of `M_d(d1, d2)` for short horizons, computed from
//! the kernel definitions with freshness recomputed from the path prefix.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lattice::{first_visit_kernel, revisit_kernel, UnitStep, WalkSpec};

pub const MAX_ENUMERATION_STEPS: usize = 6;

/// Map from step sequence to its exact probability.
pub type PathLaw = BTreeMap<Vec<UnitStep>, Rational64>;

pub fn enumerate_paths(spec: &WalkSpec, n_steps: usize) -> Result<PathLaw> {
    if n_steps > MAX_ENUMERATION_STEPS {
        return Err(Error::EnumerationTooLarge {
            requested: n_steps,
            max: MAX_ENUMERATION_STEPS,
        });
    }
    let fresh = first_visit_kernel(spec).unit_steps().expect("unit kernel");
    let revisit = revisit_kernel(spec).unit_steps().expect("unit kernel");
    let mut law = PathLaw::new();
    let mut sites = vec![vec![0i64; spec.d()]];
    let mut steps = Vec::with_capacity(n_steps);
    extend(
        &fresh,
        &revisit,
        n_steps,
        &mut sites,
        &mut steps,
        Rational64::one(),
        &mut law,
    );
    Ok(law)
}

fn extend(
    fresh: &[(UnitStep, Rational64)],
    revisit: &[(UnitStep, Rational64)],
    remaining: usize,
    sites: &mut Vec<Vec<i64>>,
    steps: &mut Vec<UnitStep>,
    prob: Rational64,
    law: &mut PathLaw,
) {
    if remaining == 0 {
        law.insert(steps.clone(), prob);
        return;
    }
    let (current, earlier) = sites.split_last().expect("path starts at the origin");
    let kernel = if earlier.contains(current) {
        revisit
    } else {
        fresh
    };
    for &(s, p) in kernel {
        let mut next = sites.last().unwrap().clone();
        next[s.axis as usize] += s.sign();
        sites.push(next);
        steps.push(s);
        extend(fresh, revisit, remaining - 1, sites, steps, prob * p, law);
        steps.pop();
        sites.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, d1: usize, d2: usize) -> WalkSpec {
        WalkSpec::new(d, d1, d2).unwrap()
    }

    #[test]
    fn first_step_is_fresh() {
        let law = enumerate_paths(&spec(4, 2, 3), 1).unwrap();
        assert_eq!(law.len(), 4);
        assert!(law.values().all(|p| *p == Rational64::new(1, 4)));
    }

    #[test]
    fn backtrack_from_fresh_site() {
        let law = enumerate_paths(&spec(4, 2, 3), 2).unwrap();
        assert_eq!(law.len(), 16);
        let back = vec![UnitStep::new(0, true), UnitStep::new(0, false)];
        assert_eq!(law[&back], Rational64::new(1, 16));
        let total: Rational64 = law.values().sum();
        assert!(total.is_one());
    }

    #[test]
    fn third_step_after_return_uses_revisit_kernel() {
        let law = enumerate_paths(&spec(4, 2, 3), 3).unwrap();
        let path = vec![UnitStep::new(0, true), UnitStep::new(0, false), UnitStep::new(3, false)];
        assert_eq!(law[&path], Rational64::new(1, 4 * 4 * 6));
        let impossible = vec![UnitStep::new(0, true), UnitStep::new(0, false), UnitStep::new(0, true)];
        assert!(!law.contains_key(&impossible));
    }

    #[test]
    fn normalized_up_to_the_cap() {
        for s in [spec(4, 2, 3), spec(4, 4, 2), spec(3, 1, 2)] {
            for n in 0..=4 {
                let total: Rational64 = enumerate_paths(&s, n).unwrap().values().sum();
                assert!(total.is_one());
            }
        }
        assert!(enumerate_paths(&spec(4, 2, 3), 7).is_err());
    }
}
