//! Stopping-time decomposition of `M_4(2,3)` and its statistical checks.

pub mod bridge;
pub mod diagnostics;
pub mod gaps;
pub mod grid;
pub mod joint;
pub mod m423;

pub use bridge::{
    exact_bridge_law, exact_pair_weights, k_tail_probability, sample_bridge, BridgeSample, BridgeSampler,
    KTailEstimate,
};
pub use diagnostics::{
    martingale_diagnostics, martingale_ensemble, DiagnosticsAccumulator, MartingaleReport,
};
pub use gaps::{gap_tail_table, inter_u_gap_counts, Gap, GapHistogram, GapTailRow};
pub use grid::{dyadic_grid, k_index_count, k_set, running_range, t_k, DEFAULT_RHO};
pub use joint::{joint_return_probability, joint_return_table, JointReturnRow, JOINT_STEP_CAP};
pub use m423::{build_m423, build_m423_seeded, M423Step, M423Trace, M423Walker, StepKind};
