//! Executable theory: stability-region membership by linear programming,
//! the randomized stationary policy built from a region witness, and the
//! time-average backlog bound.

pub mod arrivals;
pub mod bound;
pub mod randomized;
pub mod region;
pub mod sets;
pub mod simplex;
pub mod theory;

pub use arrivals::BoundedArrivals;
pub use bound::{batch_slope, drift_bound, drift_bound_with_epsilon, verify_bound, BoundReport, DriftBound, SlopeEstimate};
pub use randomized::RandomizedPolicy;
pub use region::{check_stability, max_scaling, max_uniform_slack, RateMatrix, RegionWitness, Stability, VARIABLE_LIMIT};
pub use sets::CachingSets;
pub use theory::{simulate_total_vips, Algorithm1, VirtualController};
