//! Forwarding and caching strategies behind trait objects, registered by
//! name and selected at runtime.
//!
//! A [`Policy`] pairs one [`ForwardingStrategy`] with one
//! [`CachingStrategy`]. The actual-plane engine consults the forwarding
//! strategy for the first chunk of a new request and the caching strategy
//! when the first chunk of a non-resident object arrives at a node.

pub mod baseline;
mod registry;
pub mod vip;

use rand_chacha::ChaCha8Rng;

pub use registry::{PolicyParams, Registry};

use crate::error::Result;
use crate::model::{LinkId, NextHops, NodeId, ObjectId, Topology};
use crate::vip::{FlowStats, VipLedger};

/// Outcome of a caching decision for a newly arriving object.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Admission {
    Reject,
    /// Store the object in free space.
    Admit,
    /// Evict the given object, then store the new one.
    Replace(ObjectId),
}

/// What a caching strategy may look at when deciding.
pub struct CacheView<'a> {
    pub node: NodeId,
    /// Resident objects, ascending.
    pub cached: &'a [ObjectId],
    /// Whole-object slots still free.
    pub free_slots: usize,
    pub flow: Option<&'a FlowStats>,
    pub ledger: Option<&'a VipLedger>,
}

/// Which caching vector drives the VIP drain `r_n * s_n^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VirtualCaching {
    /// Max-weight caching computed from the VIP counts each slot.
    MaxWeight,
    /// Whatever the actual content stores hold at the slot boundary.
    MirrorActual,
}

pub trait CachingStrategy: Send {
    fn name(&self) -> &str;

    /// A chunk-1 Interest was handled at `node`.
    fn on_request(&mut self, _node: NodeId, _object: ObjectId) {}

    /// Called when chunk 1 of a non-resident object arrives at a node with a
    /// nonzero cache.
    fn decide(&mut self, view: &CacheView<'_>, object: ObjectId, rng: &mut ChaCha8Rng) -> Result<Admission>;

    fn on_admit(&mut self, _node: NodeId, _object: ObjectId) {}

    fn on_evict(&mut self, _node: NodeId, _object: ObjectId) {}
}

/// Inputs for choosing the out-link of a chunk-1 Interest.
pub struct RouteView<'a> {
    pub topology: &'a Topology,
    pub next_hops: &'a NextHops,
    pub flow: Option<&'a FlowStats>,
    pub node: NodeId,
    pub object: ObjectId,
    /// `alpha_n^k`: chunk number of the last Data for `k` received here.
    pub progress: u32,
    pub chunks_per_object: u32,
    /// PIT entries at `node` for any chunk of `object`.
    pub pending_entries: u32,
    /// Link used by the most recent Interest for `object` at `node`.
    pub last_out: Option<LinkId>,
    /// Link the Interest arrived on, `None` for local requests.
    pub arrived_on: Option<LinkId>,
}

impl RouteView<'_> {
    /// First shortest-path next hop that does not lead straight back to the
    /// node the Interest came from, when such a hop exists.
    pub fn shortest_path_hop(&self) -> LinkId {
        let back = self.arrived_on.map(|l| self.topology.link(l).from);
        let hops = self.next_hops.next_hops(self.node, self.object);
        hops.iter()
            .copied()
            .find(|&l| Some(self.topology.link(l).to) != back)
            .or_else(|| {
                // Every shortest-path hop goes back: take the closest other
                // neighbour, if any.
                self.topology
                    .out_links(self.node)
                    .iter()
                    .copied()
                    .filter(|&l| Some(self.topology.link(l).to) != back)
                    .min_by_key(|&l| (self.topology.hops_to_source(self.topology.link(l).to, self.object), l))
            })
            .or_else(|| hops.first().copied())
            .expect("non-source node has a next hop")
    }
}

pub trait ForwardingStrategy: Send {
    fn name(&self) -> &str;

    /// Out-link for a chunk-1 Interest that missed the content store and
    /// the PIT.
    fn route_new_request(&mut self, view: &RouteView<'_>) -> LinkId;

    /// Whether this strategy reads the VIP flow statistics.
    fn uses_flow_stats(&self) -> bool {
        false
    }
}

/// A named forwarding + caching combination.
pub struct Policy {
    pub id: String,
    pub forwarding: Box<dyn ForwardingStrategy>,
    pub caching: Box<dyn CachingStrategy>,
    /// `Some` when the virtual plane must run alongside the actual plane.
    pub virtual_plane: Option<VirtualCaching>,
}

impl std::fmt::Debug for Policy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Policy")
            .field("id", &self.id)
            .field("forwarding", &self.forwarding.name())
            .field("caching", &self.caching.name())
            .field("virtual_plane", &self.virtual_plane)
            .finish()
    }
}

/// Shortest-path forwarding toward the object's source.
#[derive(Debug, Default)]
pub struct ShortestPath;

impl ForwardingStrategy for ShortestPath {
    fn name(&self) -> &str {
        "shortest-path"
    }

    fn route_new_request(&mut self, view: &RouteView<'_>) -> LinkId {
        view.shortest_path_hop()
    }
}

/// Never caches anything.
#[derive(Debug, Default)]
pub struct NoCache;

impl CachingStrategy for NoCache {
    fn name(&self) -> &str {
        "none"
    }

    fn decide(&mut self, _: &CacheView<'_>, _: ObjectId, _: &mut ChaCha8Rng) -> Result<Admission> {
        Ok(Admission::Reject)
    }
}
