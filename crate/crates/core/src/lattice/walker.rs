//! Reference engine for `M_d(d1, d2)` with range bookkeeping.

use crate::error::{Error, Result};
use crate::lattice::{JumpBlock, LatticePoint, UnitStep, VisitedSet, WalkSpec};
use crate::rng::UniformSource;

/// Longest run accepted by [`run`].
pub const MAX_RUN_STEPS: u64 = 1 << 40;
/// Coordinates must stay strictly inside `±COORD_LIMIT`.
pub const COORD_LIMIT: i64 = 1 << 62;

#[derive(Clone, Debug)]
pub struct WalkState {
    /// Completed steps.
    pub n: u64,
    pub pos: LatticePoint,
    /// Distinct sites among `S_0..S_n`.
    pub visited: VisitedSet,
    /// `r_n`.
    pub range: u64,
    /// Fresh-site jumps taken along the strictly fresh block.
    pub fresh_jumps_block1: u64,
    /// Fresh-site jumps taken along the overlap or second block.
    pub fresh_jumps_block2: u64,
    /// `#{j <= n : S_j = 0}`.
    pub origin_visits: u64,
    /// `S_n` was first reached at time `n`.
    pub current_is_fresh: bool,
}

impl WalkState {
    /// `S_0 = 0`, fresh at time 0.
    pub fn new(spec: &WalkSpec) -> Self {
        Self::with_capacity(spec, 0)
    }

    /// Like [`WalkState::new`], reserving room for `sites` visited sites.
    pub fn with_capacity(spec: &WalkSpec, sites: usize) -> Self {
        let pos = LatticePoint::origin(spec.d());
        let mut visited = VisitedSet::with_capacity(spec.d(), sites);
        visited.insert(pos.coords());
        Self {
            n: 0,
            pos,
            visited,
            range: 1,
            fresh_jumps_block1: 0,
            fresh_jumps_block2: 0,
            origin_visits: 1,
            current_is_fresh: true,
        }
    }

    pub fn is_at_origin(&self) -> bool {
        self.pos.is_origin()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepInfo {
    pub step: UnitStep,
    /// The jump left a fresh site (drawn from the first-visit kernel).
    pub from_fresh: bool,
    /// Counter credited for a fresh-site jump.
    pub block: Option<JumpBlock>,
}

/// One draw from the first-visit (`fresh`) or revisit kernel. Draw value
/// `j` maps to atom `j` of the corresponding [`crate::adapted::StepMeasure`]:
/// `+e_i, -e_i` by increasing axis.
#[inline]
pub fn draw_kernel_step<S: UniformSource + ?Sized>(spec: &WalkSpec, fresh: bool, src: &mut S) -> UnitStep {
    let axes = if fresh {
        spec.fresh_axes()
    } else {
        spec.revisit_axes()
    };
    let idx = src.below(2 * axes.len() as u64) as usize;
    UnitStep::new(axes.start + idx / 2, idx.is_multiple_of(2))
}

/// Advances `state` by one step.
#[inline]
pub fn step<S: UniformSource + ?Sized>(
    state: &mut WalkState,
    spec: &WalkSpec,
    src: &mut S,
) -> Result<StepInfo> {
    if state.pos.dim() != spec.d() {
        return Err(Error::DimensionMismatch {
            expected: spec.d(),
            got: state.pos.dim(),
        });
    }
    let from_fresh = state.current_is_fresh;
    let s = draw_kernel_step(spec, from_fresh, src);
    let block = from_fresh.then(|| spec.fresh_jump_block(s.axis as usize));
    match block {
        Some(JumpBlock::First) => state.fresh_jumps_block1 += 1,
        Some(JumpBlock::Second) => state.fresh_jumps_block2 += 1,
        None => {}
    }

    let c = &mut state.pos.0[s.axis as usize];
    *c += s.sign();
    let moved = *c;
    state.n += 1;
    if moved.abs() >= COORD_LIMIT {
        return Err(Error::CoordinateOverflow { step: state.n });
    }

    let new_site = state.visited.insert(state.pos.coords());
    if new_site {
        state.range += 1;
    }
    state.current_is_fresh = new_site;
    if moved == 0 && state.pos.is_origin() {
        state.origin_visits += 1;
    }
    Ok(StepInfo {
        step: s,
        from_fresh,
        block,
    })
}

/// Hook called after the initial state and after every step.
pub trait StepObserver {
    fn observe(&mut self, state: &WalkState, info: Option<&StepInfo>);
}

#[derive(Clone, Debug)]
pub struct WalkSummary {
    pub spec: WalkSpec,
    pub state: WalkState,
}

/// Runs `n_steps` steps from the origin, feeding every observer.
pub fn run<S: UniformSource + ?Sized>(
    spec: &WalkSpec,
    n_steps: u64,
    src: &mut S,
    observers: &mut [&mut dyn StepObserver],
) -> Result<WalkSummary> {
    if n_steps > MAX_RUN_STEPS {
        return Err(Error::TooManySteps {
            requested: n_steps,
            cap: MAX_RUN_STEPS,
        });
    }
    let mut state = WalkState::new(spec);
    for o in observers.iter_mut() {
        o.observe(&state, None);
    }
    for _ in 0..n_steps {
        let info = step(&mut state, spec, src)?;
        for o in observers.iter_mut() {
            o.observe(&state, Some(&info));
        }
    }
    Ok(WalkSummary { spec: *spec, state })
}

/// Range counters at one checkpoint.
///
/// `block1 + block2 == range`: the block split of `r_n` counts the jump that
/// leaves `S_n`, so it is read one step after the checkpoint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RangeRecord {
    pub n: u64,
    pub range: u64,
    pub block1: u64,
    pub block2: u64,
    pub origin_visits: u64,
    /// False until the step after the checkpoint has been observed.
    pub split_complete: bool,
}

/// Records [`RangeRecord`]s at sorted checkpoint times.
#[derive(Clone, Debug)]
pub struct RangeCheckpoints {
    checkpoints: Vec<u64>,
    records: Vec<RangeRecord>,
    next: usize,
}

impl RangeCheckpoints {
    pub fn new(mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Self {
            checkpoints,
            records: Vec::new(),
            next: 0,
        }
    }

    /// Steps to run so every split is complete.
    pub fn steps_needed(&self) -> u64 {
        self.checkpoints.last().map_or(0, |&c| c + 1)
    }

    pub fn records(&self) -> &[RangeRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<RangeRecord> {
        self.records
    }
}

impl StepObserver for RangeCheckpoints {
    fn observe(&mut self, state: &WalkState, _info: Option<&StepInfo>) {
        if let Some(last) = self.records.last_mut() {
            if !last.split_complete && state.n == last.n + 1 {
                last.block1 = state.fresh_jumps_block1;
                last.block2 = state.fresh_jumps_block2;
                last.split_complete = true;
                debug_assert_eq!(last.block1 + last.block2, last.range);
            }
        }
        if self.checkpoints.get(self.next) == Some(&state.n) {
            self.records.push(RangeRecord {
                n: state.n,
                range: state.range,
                origin_visits: state.origin_visits,
                ..RangeRecord::default()
            });
            self.next += 1;
        }
    }
}

/// Origin hits in the closed dyadic windows `[2^k, 2^(k+1)]`,
/// `k_min <= k <= k_max`.
#[derive(Clone, Debug)]
pub struct WindowHits {
    k_min: u32,
    k_max: u32,
    hits: Vec<bool>,
}

impl WindowHits {
    pub fn new(k_min: u32, k_max: u32) -> Self {
        assert!(k_min <= k_max && k_max < 62);
        Self {
            k_min,
            k_max,
            hits: vec![false; (k_max - k_min + 1) as usize],
        }
    }

    pub fn steps_needed(&self) -> u64 {
        1u64 << (self.k_max + 1)
    }

    /// Hit flags indexed by `k - k_min`.
    pub fn hits(&self) -> &[bool] {
        &self.hits
    }

    fn mark(&mut self, k: u32) {
        if (self.k_min..=self.k_max).contains(&k) {
            self.hits[(k - self.k_min) as usize] = true;
        }
    }
}

impl StepObserver for WindowHits {
    #[inline]
    fn observe(&mut self, state: &WalkState, _info: Option<&StepInfo>) {
        let n = state.n;
        if n == 0 || !state.is_at_origin() {
            return;
        }
        let k = 63 - n.leading_zeros();
        self.mark(k);
        if n.is_power_of_two() && k > 0 {
            self.mark(k - 1);
        }
    }
}

/// Full trajectory with freshness flags.
#[derive(Clone, Debug, Default)]
pub struct TrajectoryRecorder {
    pub points: Vec<LatticePoint>,
    pub fresh: Vec<bool>,
}

impl StepObserver for TrajectoryRecorder {
    fn observe(&mut self, state: &WalkState, _info: Option<&StepInfo>) {
        self.points.push(state.pos.clone());
        self.fresh.push(state.current_is_fresh);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::path_steps;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn spec(d: usize, d1: usize, d2: usize) -> WalkSpec {
        WalkSpec::new(d, d1, d2).unwrap()
    }

    /// Replays a fixed list of draw values.
    struct Scripted(Vec<u64>);

    impl UniformSource for Scripted {
        fn below(&mut self, n: u64) -> u64 {
            let v = self.0.remove(0);
            assert!(v < n);
            v
        }
    }

    #[test]
    fn empty_run() {
        let s = spec(4, 2, 3);
        let out = run(&s, 0, &mut RngStream::new(0, 0), &mut []).unwrap();
        assert_eq!(out.state.range, 1);
        assert!(out.state.pos.is_origin());
        assert_eq!(out.state.origin_visits, 1);
        assert!(out.state.current_is_fresh);
    }

    #[test]
    fn return_step_uses_revisit_kernel() {
        // M_4(4,2): 0 -> e_1 -> 0, then the third step leaves a revisited site.
        let s = spec(4, 4, 2);
        let mut st = WalkState::new(&s);
        let mut src = Scripted(vec![0, 1, 0]);
        let a = step(&mut st, &s, &mut src).unwrap();
        assert!(a.from_fresh);
        assert_eq!(a.step, UnitStep::new(0, true));
        let b = step(&mut st, &s, &mut src).unwrap();
        assert!(b.from_fresh, "e_1 is fresh at time 1");
        assert!(st.is_at_origin());
        assert!(!st.current_is_fresh);
        assert_eq!(st.origin_visits, 2);
        let c = step(&mut st, &s, &mut src).unwrap();
        assert!(!c.from_fresh);
        assert_eq!(c.step, UnitStep::new(2, true));
        assert_eq!(c.block, None);
    }

    #[test]
    fn rejects_dimension_mismatch_and_long_runs() {
        let mut st = WalkState::new(&spec(3, 1, 2));
        assert!(step(&mut st, &spec(4, 2, 2), &mut RngStream::new(0, 0)).is_err());
        assert!(matches!(
            run(&spec(4, 2, 2), MAX_RUN_STEPS + 1, &mut RngStream::new(0, 0), &mut []),
            Err(Error::TooManySteps { .. })
        ));
    }

    #[test]
    fn overflow_is_reported() {
        let s = spec(2, 2, 2);
        let mut st = WalkState::new(&s);
        st.pos.0[0] = COORD_LIMIT - 1;
        // Draw 0 is +e_1.
        let err = step(&mut st, &s, &mut Scripted(vec![0])).unwrap_err();
        assert!(matches!(err, Error::CoordinateOverflow { .. }));
    }

    #[test]
    fn runs_are_deterministic() {
        let s = spec(4, 2, 2);
        let a = run(&s, 100_000, &mut RngStream::new(9, 3), &mut []).unwrap();
        let b = run(&s, 100_000, &mut RngStream::new(9, 3), &mut []).unwrap();
        assert_eq!(a.state.pos, b.state.pos);
        assert_eq!(a.state.range, b.state.range);
        assert_eq!(a.state.origin_visits, b.state.origin_visits);
        assert_eq!(a.state.fresh_jumps_block1, b.state.fresh_jumps_block1);
    }

    #[test]
    fn window_hits_cover_shared_endpoints() {
        let mut w = WindowHits::new(1, 3);
        let s = spec(2, 2, 2);
        let mut st = WalkState::new(&s);
        st.n = 4;
        w.observe(&st, None);
        // Time 4 closes window k=1 ([2,4]) and opens k=2 ([4,8]).
        assert_eq!(w.hits(), &[true, true, false]);
    }

    #[test]
    fn range_split_is_read_after_the_next_jump() {
        let s = spec(4, 4, 2);
        let mut cp = RangeCheckpoints::new(vec![0, 10, 100]);
        let steps = cp.steps_needed();
        run(&s, steps, &mut RngStream::new(5, 0), &mut [&mut cp]).unwrap();
        assert_eq!(cp.records().len(), 3);
        for r in cp.records() {
            assert!(r.split_complete);
            assert_eq!(r.block1 + r.block2, r.range);
        }
        assert_eq!(cp.records()[0].range, 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bookkeeping_matches_brute_force(
            d in 2usize..=6, d1 in 1usize..=6, d2 in 1usize..=6,
            seed in any::<u64>(), n in 0u64..300,
        ) {
            prop_assume!(d1 <= d && d2 <= d);
            let s = spec(d, d1, d2);
            let mut rec = TrajectoryRecorder::default();
            let out = run(&s, n, &mut RngStream::new(seed, 0), &mut [&mut rec]).unwrap();
            let pts = &rec.points;
            prop_assert_eq!(pts.len() as u64, n + 1);
            // Unit steps.
            prop_assert!(path_steps(pts).is_some());
            for j in 0..pts.len() {
                let fresh = !pts[..j].contains(&pts[j]);
                prop_assert_eq!(rec.fresh[j], fresh);
            }
            let mut distinct = pts.clone();
            distinct.sort();
            distinct.dedup();
            prop_assert_eq!(out.state.range, distinct.len() as u64);
            prop_assert!(out.state.range <= n + 1);
            let origin = pts.iter().filter(|p| p.is_origin()).count() as u64;
            prop_assert_eq!(out.state.origin_visits, origin);
            let split = out.state.fresh_jumps_block1 + out.state.fresh_jumps_block2;
            let expected = out.state.range - u64::from(out.state.current_is_fresh);
            prop_assert_eq!(split, expected);
            // Kernel supports.
            let steps = path_steps(pts).unwrap();
            for (j, st) in steps.iter().enumerate() {
                let axes = if rec.fresh[j] { s.fresh_axes() } else { s.revisit_axes() };
                prop_assert!(axes.contains(&(st.axis as usize)));
            }
        }
    }
}
