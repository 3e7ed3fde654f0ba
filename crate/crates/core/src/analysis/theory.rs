//! Virtual-plane-only simulation for checking stability claims.

use super::arrivals::BoundedArrivals;
use crate::model::rng::{stream, Purpose};
use crate::model::Topology;
use crate::vip::{advance_slot, backpressure_allocate, maxweight_cache, Bias, CacheState, ForwardingAllocation, VipLedger};

/// Chooses `(mu, s)` for one slot.
pub trait VirtualController {
    fn decide(&mut self, ledger: &VipLedger, topology: &Topology) -> (ForwardingAllocation, CacheState);
}

/// Backpressure forwarding with max-weight caching.
#[derive(Clone, Copy, Debug)]
pub struct Algorithm1 {
    pub slot_seconds: f64,
    pub bias: Bias,
}

impl VirtualController for Algorithm1 {
    fn decide(&mut self, ledger: &VipLedger, topology: &Topology) -> (ForwardingAllocation, CacheState) {
        (backpressure_allocate(ledger, topology, self.slot_seconds, self.bias), maxweight_cache(ledger, topology))
    }
}

/// Runs `slots` slots from an empty ledger and returns `sum V` after each.
pub fn simulate_total_vips(
    topology: &Topology,
    arrivals: &BoundedArrivals,
    controller: &mut dyn VirtualController,
    slots: usize,
    seed: u64,
) -> Vec<f64> {
    let mut rng = stream(seed, Purpose::SlotArrivals, 0);
    let mut ledger = VipLedger::for_topology(topology);
    let mut totals = Vec::with_capacity(slots);
    for _ in 0..slots {
        let (alloc, cache) = controller.decide(&ledger, topology);
        let a = arrivals.sample(&mut rng);
        ledger = advance_slot(ledger, &alloc, &cache, &a, topology).0;
        totals.push(ledger.total());
    }
    totals
}
