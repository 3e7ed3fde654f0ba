//! Chunk-level Interest/Data forwarding with PITs, content stores and FCFS
//! Interest queues, run as a discrete-event simulation alongside the
//! virtual plane.

mod engine;
mod metrics;
mod node;
mod packet;
mod trace;

pub use engine::{RunOutput, SimConfig, Simulator};
pub use metrics::{Metrics, RequestRecord};
pub use node::{ContentStore, NodeState, PitEntry, QueuedInterest, Resident};
pub use packet::{to_seconds, to_sim_time, transmission_time, Face, PacketEvent, PacketKind, SimTime};
pub use trace::{reverse_path_mismatches, write_trace};
