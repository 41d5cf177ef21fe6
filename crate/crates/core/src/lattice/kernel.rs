use crate::adapted::StepMeasure;
use crate::lattice::WalkSpec;

/// Law of the step taken from a site visited for the first time: uniform on
/// `±e_i`, `1 <= i <= d1`.
pub fn first_visit_kernel(spec: &WalkSpec) -> StepMeasure {
    StepMeasure::uniform_on_axes(spec.d(), spec.fresh_axes())
}

/// Law of the step taken from a previously visited site: uniform on `±e_i`,
/// `d - d2 < i <= d`.
pub fn revisit_kernel(spec: &WalkSpec) -> StepMeasure {
    StepMeasure::uniform_on_axes(spec.d(), spec.revisit_axes())
}
