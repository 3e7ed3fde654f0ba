use crate::model::{NodeId, ObjectId, Topology};

/// Real-valued VIP counters `V_n^k(t)`, stored node-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VipLedger {
    counts: Vec<f64>,
    objects: usize,
    slot: u64,
}

impl VipLedger {
    /// All counters zero at slot 1.
    pub fn new(nodes: usize, objects: usize) -> Self {
        Self { counts: vec![0.0; nodes * objects], objects, slot: 1 }
    }

    pub fn for_topology(topology: &Topology) -> Self {
        Self::new(topology.node_count(), topology.object_count())
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub(crate) fn set_slot(&mut self, slot: u64) {
        self.slot = slot;
    }

    pub fn node_count(&self) -> usize {
        self.counts.len() / self.objects.max(1)
    }

    pub fn object_count(&self) -> usize {
        self.objects
    }

    #[inline]
    pub fn get(&self, n: NodeId, k: ObjectId) -> f64 {
        self.counts[n.index() * self.objects + k.index()]
    }

    /// Overwrites a counter. Negative values are rejected.
    pub fn set(&mut self, n: NodeId, k: ObjectId, v: f64) {
        assert!(v >= 0.0, "VIP counts are nonnegative");
        self.counts[n.index() * self.objects + k.index()] = v;
    }

    #[inline]
    pub(crate) fn get_mut(&mut self, n: NodeId, k: ObjectId) -> &mut f64 {
        &mut self.counts[n.index() * self.objects + k.index()]
    }

    pub fn row(&self, n: NodeId) -> &[f64] {
        &self.counts[n.index() * self.objects..(n.index() + 1) * self.objects]
    }

    /// `sum_{n,k} V_n^k`.
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Forces `V_src(k)^k = 0` for every object.
    pub fn zero_sources(&mut self, topology: &Topology) {
        for k in topology.objects() {
            *self.get_mut(topology.source(k), k) = 0.0;
        }
    }
}
