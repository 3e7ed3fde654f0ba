//! Actual-plane strategies driven by the virtual plane: forwarding on the
//! largest windowed VIP flow, and caching by cache score (stable) or by raw
//! VIP count (oscillation-prone).

use rand_chacha::ChaCha8Rng;

use super::{Admission, CacheView, CachingStrategy, ForwardingStrategy, RouteView};
use crate::error::{Error, Result};
use crate::model::{LinkId, NodeId, ObjectId};
use crate::vip::FlowStats;

/// Forwards chunk-1 Interests of a fresh request on the out-link with the
/// largest `nu_bar`; a request in progress keeps the link it was given.
#[derive(Debug, Default)]
pub struct VipFlow;

/// Whether a chunk-1 Interest starts a new transfer at this node.
pub fn is_fresh(view: &RouteView<'_>) -> bool {
    (view.progress == 0 || view.progress == view.chunks_per_object) && view.pending_entries == 0
}

/// Out-link maximizing `nu_bar` for the object, excluding the link back to
/// where the Interest came from. `None` when every candidate is zero.
pub fn argmax_flow(view: &RouteView<'_>, flow: &FlowStats) -> Option<LinkId> {
    let back = view.arrived_on.map(|l| view.topology.link(l).from);
    let mut best: Option<(LinkId, f64)> = None;
    // out_links is sorted by destination, so the first maximum has the
    // lowest node id
    for &l in view.topology.out_links(view.node) {
        if Some(view.topology.link(l).to) == back || !view.topology.allows(view.object, l) {
            continue;
        }
        let v = flow.nu_bar(l, view.object);
        if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
            best = Some((l, v));
        }
    }
    best.map(|(l, _)| l)
}

impl ForwardingStrategy for VipFlow {
    fn name(&self) -> &str {
        "vip-flow"
    }

    fn route_new_request(&mut self, view: &RouteView<'_>) -> LinkId {
        if !is_fresh(view) {
            if let Some(l) = view.last_out {
                return l;
            }
        }
        view.flow
            .and_then(|f| argmax_flow(view, f))
            .unwrap_or_else(|| view.shortest_path_hop())
    }

    fn uses_flow_stats(&self) -> bool {
        true
    }
}

/// Score comparison shared by both VIP caching rules: with free space admit;
/// otherwise replace the lowest-scored resident (lowest id on ties) if the
/// newcomer scores strictly higher.
fn compare_scores(cached: &[ObjectId], free_slots: usize, object: ObjectId, score: impl Fn(ObjectId) -> f64) -> Admission {
    if free_slots > 0 {
        return Admission::Admit;
    }
    let Some((victim, low)) = cached
        .iter()
        .map(|&k| (k, score(k)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    else {
        return Admission::Reject;
    };
    if low < score(object) {
        Admission::Replace(victim)
    } else {
        Admission::Reject
    }
}

/// Cache-score admission at a full cache.
pub fn algorithm2_admit(node: NodeId, object: ObjectId, cached: &[ObjectId], scores: &FlowStats) -> Admission {
    compare_scores(cached, 0, object, |k| scores.cache_score(node, k))
}

/// VIP-count admission at a full cache.
pub fn algorithm1_admit(object: ObjectId, cached: &[ObjectId], counts: impl Fn(ObjectId) -> f64) -> Admission {
    compare_scores(cached, 0, object, counts)
}

/// Caching by cache score `CS_n^k`.
#[derive(Debug, Default)]
pub struct CacheScore;

impl CachingStrategy for CacheScore {
    fn name(&self) -> &str {
        "cache-score"
    }

    fn decide(&mut self, view: &CacheView<'_>, object: ObjectId, _: &mut ChaCha8Rng) -> Result<Admission> {
        let flow = view.flow.ok_or_else(|| Error::Invariant("cache-score caching needs flow statistics".into()))?;
        Ok(compare_scores(view.cached, view.free_slots, object, |k| flow.cache_score(view.node, k)))
    }
}

/// Caching by current VIP count `V_n^k`.
#[derive(Debug, Default)]
pub struct VipCount;

impl CachingStrategy for VipCount {
    fn name(&self) -> &str {
        "vip-count"
    }

    fn decide(&mut self, view: &CacheView<'_>, object: ObjectId, _: &mut ChaCha8Rng) -> Result<Admission> {
        let ledger = view.ledger.ok_or_else(|| Error::Invariant("vip-count caching needs the VIP ledger".into()))?;
        Ok(compare_scores(view.cached, view.free_slots, object, |k| ledger.get(view.node, k)))
    }
}
