//! Set of visited lattice sites.
//!
//! Sites are stored as a lossless packing of the full coordinate tuple
//! (offset binary) into a `u64`, `64 / d` bits per axis, while every
//! coordinate fits. The first site that does not fit repacks the set into
//! `u128` keys (`128 / d` bits per axis), and the next overflow converts it to
//! boxed coordinate tuples. Every representation keys on the whole tuple.

use rustc_hash::FxHashSet;

#[derive(Clone, Debug)]
pub struct VisitedSet {
    dim: usize,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    /// `64 / d` bits per axis.
    Narrow { bits: u32, set: FxHashSet<u64> },
    /// `128 / d` bits per axis.
    Packed { bits: u32, set: FxHashSet<u128> },
    Wide(FxHashSet<Box<[i64]>>),
}

impl VisitedSet {
    pub fn new(dim: usize) -> Self {
        assert!((1..=64).contains(&dim));
        Self {
            dim,
            repr: Repr::Narrow {
                bits: (64 / dim) as u32,
                set: FxHashSet::default(),
            },
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        let mut s = Self::new(dim);
        if let Repr::Narrow { set, .. } = &mut s.repr {
            set.reserve(capacity);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Narrow { set, .. } => set.len(),
            Repr::Packed { set, .. } => set.len(),
            Repr::Wide(set) => set.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inserts `site`; returns `true` if it was not present before.
    #[inline]
    pub fn insert(&mut self, site: &[i64]) -> bool {
        debug_assert_eq!(site.len(), self.dim);
        if let Repr::Narrow { bits, set } = &mut self.repr {
            match pack(site, *bits) {
                Some(key) => return set.insert(key as u64),
                None => self.widen(),
            }
        }
        if let Repr::Packed { bits, set } = &mut self.repr {
            match pack(site, *bits) {
                Some(key) => return set.insert(key),
                None => self.widen(),
            }
        }
        match &mut self.repr {
            Repr::Wide(set) => {
                if set.contains(site) {
                    false
                } else {
                    set.insert(site.into())
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        match &self.repr {
            Repr::Narrow { bits, set } => {
                pack(site, *bits).is_some_and(|k| set.contains(&(k as u64)))
            }
            Repr::Packed { bits, set } => pack(site, *bits).is_some_and(|k| set.contains(&k)),
            Repr::Wide(set) => set.contains(site),
        }
    }

    pub fn clear(&mut self) {
        match &mut self.repr {
            Repr::Narrow { set, .. } => set.clear(),
            Repr::Packed { set, .. } => set.clear(),
            Repr::Wide(set) => set.clear(),
        }
    }

    /// Moves to the next wider representation.
    fn widen(&mut self) {
        let dim = self.dim;
        self.repr = match &self.repr {
            Repr::Narrow { bits, set } => {
                let wide_bits = (128 / dim).min(64) as u32;
                let sites = set.iter().map(|&k| unpack(k as u128, *bits, dim));
                if wide_bits > *bits {
                    Repr::Packed {
                        bits: wide_bits,
                        set: sites.map(|p| pack(&p, wide_bits).expect("fits wider key")).collect(),
                    }
                } else {
                    Repr::Wide(sites.map(Vec::into_boxed_slice).collect())
                }
            }
            Repr::Packed { bits, set } => Repr::Wide(
                set.iter()
                    .map(|&k| unpack(k, *bits, dim).into_boxed_slice())
                    .collect(),
            ),
            Repr::Wide(_) => return,
        };
    }

    /// Current key width in bits per axis; `None` once full tuples are stored.
    pub fn bits_per_axis(&self) -> Option<u32> {
        match &self.repr {
            Repr::Narrow { bits, .. } | Repr::Packed { bits, .. } => Some(*bits),
            Repr::Wide(_) => None,
        }
    }
}

#[inline]
fn pack(site: &[i64], bits: u32) -> Option<u128> {
    let half = 1i128 << (bits - 1);
    let mut key = 0u128;
    for (i, &c) in site.iter().enumerate() {
        let c = c as i128;
        if c < -half || c >= half {
            return None;
        }
        key |= ((c + half) as u128) << (bits as usize * i);
    }
    Some(key)
}

fn unpack(key: u128, bits: u32, dim: usize) -> Vec<i64> {
    let half = 1i128 << (bits - 1);
    let mask = (1u128 << bits) - 1;
    (0..dim)
        .map(|i| (((key >> (bits as usize * i)) & mask) as i128 - half) as i64)
        .collect()
}
