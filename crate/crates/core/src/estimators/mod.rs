//! Monte Carlo estimators for range growth, dyadic-window returns and
//! origin visits.

mod decoupled;
mod ensemble;
mod origin;
mod range;
mod returns;

pub use decoupled::{
    decoupled_generator_m442, decoupled_m442_seeded, planar_step, DecoupledSources, DecoupledTrace,
};
pub use ensemble::{map_walks, EnsembleConfig};
pub use origin::{origin_visits, OriginVisitReport};
pub use range::{range_band, range_stats, Extremes, RangeSummary, BAND_MIN_N, DEFAULT_BAND_CONSTANT};
pub use returns::{
    decay_profile, srw2d_window_return, window_return_probability, window_start, WindowEstimate,
    MAX_WINDOW_EXPONENT,
};
