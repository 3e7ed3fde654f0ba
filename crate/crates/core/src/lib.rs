//! Joint dynamic forwarding and caching for named data networks, driven by
//! virtual interest packet (VIP) counters.
//!
//! The crate is split along the two planes of the design:
//!
//! * [`vip`] holds the per-slot VIP counter dynamics together with the
//!   backpressure forwarding and max-weight caching control laws.
//! * [`actual`] is a chunk-level discrete-event engine (PIT, content store,
//!   FCFS interest queues, reverse-path data delivery) whose forwarding and
//!   caching decisions are delegated to a [`strategy::Policy`].
//!
//! [`strategy`] keeps every forwarding/caching variant behind a trait object
//! registered by name, [`analysis`] checks stability-region membership and the
//! throughput-optimality bound numerically, and [`harness`] runs experiment
//! sweeps and writes CSV results.

pub mod actual;
pub mod analysis;
pub mod error;
pub mod harness;
pub mod model;
pub mod strategy;
pub mod vip;

pub use error::{Error, Result};
