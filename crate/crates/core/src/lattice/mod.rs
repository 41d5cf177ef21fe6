//! Step kernels, the reference engine and the exact path enumerator.

mod enumerate;
mod kernel;
mod spec;
mod visited;
mod walker;

pub use enumerate::{enumerate_paths, PathLaw, MAX_ENUMERATION_STEPS};
pub use kernel::{first_visit_kernel, revisit_kernel};
pub use spec::{path_steps, JumpBlock, LatticePoint, UnitStep, WalkSpec, MAX_DIM, MIN_DIM};
pub use visited::VisitedSet;
pub use walker::{
    draw_kernel_step, run, step, RangeCheckpoints, RangeRecord, StepInfo, StepObserver,
    TrajectoryRecorder, WalkState, WalkSummary, WindowHits, COORD_LIMIT, MAX_RUN_STEPS,
};
