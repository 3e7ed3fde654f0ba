//! Virtual control plane: VIP counters, backpressure forwarding, max-weight
//! caching, the per-slot counter update and the sliding-window flow
//! statistics consumed by the actual plane.

mod caching;
mod dump;
mod dynamics;
mod forwarding;
mod ledger;
mod stats;

pub use caching::{maxweight_cache, CacheState};
pub use dump::LedgerDump;
pub use dynamics::{advance_slot, Transmission};
pub use forwarding::{backpressure_allocate, backpressure_weight, Bias, ForwardingAllocation};
pub use ledger::VipLedger;
pub use stats::{update_flow_stats, FlowStats};
