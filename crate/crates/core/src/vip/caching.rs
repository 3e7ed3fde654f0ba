use super::VipLedger;
use crate::model::{NodeId, ObjectId, Topology};

/// Binary caching state `s_n^k(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CacheState {
    cached: Vec<Vec<ObjectId>>,
    member: Vec<bool>,
    objects: usize,
}

impl CacheState {
    pub fn empty(nodes: usize, objects: usize) -> Self {
        Self { cached: vec![Vec::new(); nodes], member: vec![false; nodes * objects], objects }
    }

    /// Replaces the cached set of `n`.
    pub fn set_node(&mut self, n: NodeId, mut objects: Vec<ObjectId>) {
        for k in std::mem::take(&mut self.cached[n.index()]) {
            self.member[n.index() * self.objects + k.index()] = false;
        }
        objects.sort_unstable();
        objects.dedup();
        for &k in &objects {
            self.member[n.index() * self.objects + k.index()] = true;
        }
        self.cached[n.index()] = objects;
    }

    #[inline]
    pub fn is_cached(&self, n: NodeId, k: ObjectId) -> bool {
        self.member[n.index() * self.objects + k.index()]
    }

    /// Objects cached at `n`, ascending.
    pub fn cached(&self, n: NodeId) -> &[ObjectId] {
        &self.cached[n.index()]
    }
}

/// Max-weight caching: each node caches the `floor(L_n / z)` objects with
/// the largest VIP counts, lowest object id first on ties. With equal object
/// sizes this greedy choice solves the knapsack exactly.
pub fn maxweight_cache(ledger: &VipLedger, topology: &Topology) -> CacheState {
    let mut state = CacheState::empty(topology.node_count(), topology.object_count());
    let mut order: Vec<ObjectId> = topology.objects().collect();
    for n in topology.nodes() {
        let slots = topology.cache_slots(n).min(order.len());
        if slots == 0 {
            continue;
        }
        let row = ledger.row(n);
        let by_weight = |a: &ObjectId, b: &ObjectId| row[b.index()].total_cmp(&row[a.index()]).then(a.cmp(b));
        if slots < order.len() {
            order.select_nth_unstable_by(slots - 1, by_weight);
        }
        state.set_node(n, order[..slots].to_vec());
    }
    state
}
