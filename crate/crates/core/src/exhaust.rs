//! Exact law of a generator by exhausting its randomness.
//!
//! A generator written against [`UniformSource`] is replayed once per
//! choice sequence, depth first. Each run's outcome is weighted by the
//! product of `1/n` over the draws it made, which gives the exact law of the
//! generator's output as a map from outcome to rational probability.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use num_rational::Rational64;

use crate::rng::UniformSource;

#[derive(Default)]
struct Tape {
    choices: Vec<u64>,
    radices: Vec<u64>,
    pos: usize,
}

/// A replaying source. Clones share one tape, so a generator that consumes
/// several independent sequences can be handed one clone per sequence.
#[derive(Clone, Default)]
pub struct TapeSource(Rc<RefCell<Tape>>);

impl UniformSource for TapeSource {
    fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let mut t = self.0.borrow_mut();
        let pos = t.pos;
        let v = if pos < t.choices.len() {
            assert_eq!(t.radices[pos], n, "generator is not deterministic under replay");
            t.choices[pos]
        } else {
            t.choices.push(0);
            t.radices.push(n);
            0
        };
        t.pos += 1;
        v
    }
}

/// Runs `generator` over every choice sequence and returns the exact law of
/// its output. Every run must make finitely many draws.
pub fn exhaust<T, F>(mut generator: F) -> BTreeMap<T, Rational64>
where
    T: Ord,
    F: FnMut(&TapeSource) -> T,
{
    let source = TapeSource::default();
    let mut law = BTreeMap::new();
    loop {
        source.0.borrow_mut().pos = 0;
        let outcome = generator(&source);
        let mut t = source.0.borrow_mut();
        let used = t.pos;
        t.choices.truncate(used);
        t.radices.truncate(used);
        let denom = t
            .radices
            .iter()
            .try_fold(1i64, |acc, &r| acc.checked_mul(r as i64))
            .expect("enumeration denominator overflows i64");
        *law.entry(outcome).or_insert_with(|| Rational64::from_integer(0)) +=
            Rational64::new(1, denom);

        let Some(i) = (0..used).rev().find(|&i| t.choices[i] + 1 < t.radices[i]) else {
            break;
        };
        t.choices[i] += 1;
        t.choices.truncate(i + 1);
        t.radices.truncate(i + 1);
    }
    law
}

/// Total variation distance between two exact laws.
pub fn total_variation<T: Ord>(
    p: &BTreeMap<T, Rational64>,
    q: &BTreeMap<T, Rational64>,
) -> Rational64 {
    let zero = Rational64::from_integer(0);
    let mut sum = zero;
    for (k, pv) in p {
        let qv = q.get(k).copied().unwrap_or(zero);
        sum += if *pv > qv { *pv - qv } else { qv - *pv };
    }
    for (k, qv) in q {
        if !p.contains_key(k) {
            sum += *qv;
        }
    }
    sum / 2
}
