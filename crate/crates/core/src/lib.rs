//! Simulation and certification toolkit for the balanced excited random walk
//! `M_d(d1, d2)` on `Z^d`.
//!
//! At a site visited for the first time the walk steps uniformly along one of
//! the first `d1` axes; at a previously visited site it steps uniformly along
//! one of the last `d2` axes.
//!
//! * [`lattice`]: step kernels, the reference engine, exact path enumeration.
//! * [`adapted`]: walks generated by step measures and an adapted rule.
//! * [`trace`]: the trace condition and the transience classifier.
//! * [`estimators`]: range, return-probability and origin-visit ensembles.
//! * [`martingale`]: the `M_4(2,3)` stopping-time construction, bridges and
//!   the K-set.

pub mod adapted;
pub mod error;
pub mod estimators;
pub mod exhaust;
pub mod lattice;
pub mod linalg;
pub mod martingale;
pub mod rng;
pub mod stats;
pub mod trace;

pub use error::{Error, Result};
pub use lattice::{LatticePoint, UnitStep, WalkSpec};
pub use rng::{RngStream, UniformSource};
