use super::{CacheState, ForwardingAllocation, VipLedger};
use crate::model::{LinkId, ObjectId, SlotArrivals, Topology};

/// VIPs actually moved in one slot, `nu_ab^k(t)`. A link carries at most
/// one object per slot, so one entry per link suffices.
#[derive(Clone, Debug, PartialEq)]
pub struct Transmission {
    moved: Vec<Option<(ObjectId, f64)>>,
}

impl Transmission {
    pub fn none(links: usize) -> Self {
        Self { moved: vec![None; links] }
    }

    pub fn link_count(&self) -> usize {
        self.moved.len()
    }

    pub fn get(&self, l: LinkId) -> Option<(ObjectId, f64)> {
        self.moved[l.index()]
    }

    pub fn nu(&self, l: LinkId, k: ObjectId) -> f64 {
        match self.moved[l.index()] {
            Some((o, v)) if o == k => v,
            _ => 0.0,
        }
    }

    pub fn set(&mut self, l: LinkId, k: ObjectId, amount: f64) {
        self.moved[l.index()] = (amount > 0.0).then_some((k, amount));
    }

    pub fn iter(&self) -> impl Iterator<Item = (LinkId, ObjectId, f64)> + '_ {
        self.moved.iter().enumerate().filter_map(|(i, m)| m.map(|(k, v)| (LinkId::from_index(i), k, v)))
    }
}

/// One slot of VIP counter evolution.
///
/// Each node serves its granted out-links in ascending destination order,
/// each taking `min(mu, remaining)`. Receivers gain what was actually sent,
/// then exogenous arrivals are added, then `r_n * s_n^k` is drained with a
/// floor at zero, and source counters are reset to zero.
pub fn advance_slot(
    mut ledger: VipLedger,
    alloc: &ForwardingAllocation,
    cache: &CacheState,
    arrivals: &SlotArrivals,
    topology: &Topology,
) -> (VipLedger, Transmission) {
    let mut moved = Transmission::none(topology.link_count());
    for n in topology.nodes() {
        for &l in topology.out_links(n) {
            if let Some((k, mu)) = alloc.granted(l) {
                let v = ledger.get_mut(n, k);
                let nu = mu.min(*v);
                *v -= nu;
                moved.set(l, k, nu);
            }
        }
    }
    for (l, k, nu) in moved.iter() {
        *ledger.get_mut(topology.link(l).to, k) += nu;
    }
    for &(n, k, a) in &arrivals.counts {
        *ledger.get_mut(n, k) += a as f64;
    }
    for n in topology.nodes() {
        let r = topology.read_rate(n);
        if r > 0.0 {
            for &k in cache.cached(n) {
                let v = ledger.get_mut(n, k);
                *v = (*v - r).max(0.0);
            }
        }
    }
    ledger.zero_sources(topology);
    let next = ledger.slot() + 1;
    ledger.set_slot(next);
    (ledger, moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{load_topology, NodeId};

    /// Node 1 -> node 2 (source), C/z = 3 per slot, node 1 caches one object
    /// with read rate 2.
    fn setup() -> Topology {
        load_topology("[catalog]\nobjects 2\nchunks 1\nchunk_size 1\ninterest_size 1\n[links]\n1 2 24\n[caches]\n1 1 2\n2 0 0\n[sources]\nall 2\n").unwrap()
    }

    #[test]
    fn pure_arrival() {
        let t = setup();
        let mut arr = SlotArrivals::default();
        arr.push(NodeId(0), ObjectId(0), 2);
        let (v, nu) = advance_slot(
            VipLedger::for_topology(&t),
            &ForwardingAllocation::idle(t.link_count()),
            &CacheState::empty(2, 2),
            &arr,
            &t,
        );
        assert_eq!(v.get(NodeId(0), ObjectId(0)), 2.0);
        assert_eq!(nu.iter().count(), 0);
        assert_eq!(v.slot(), 2);
    }

    #[test]
    fn hand_evaluated_update() {
        // ((5 - 3)^+ + 1 + 0 - 2)^+ = 1
        let t = setup();
        let (n1, n2) = (NodeId(0), NodeId(1));
        let mut v = VipLedger::for_topology(&t);
        v.set(n1, ObjectId(0), 5.0);
        let mut alloc = ForwardingAllocation::idle(t.link_count());
        let l = t.link_between(n1, n2).unwrap();
        alloc.assign(l, ObjectId(0), 3.0);
        let mut cache = CacheState::empty(2, 2);
        cache.set_node(n1, vec![ObjectId(0)]);
        let mut arr = SlotArrivals::default();
        arr.push(n1, ObjectId(0), 1);
        let (v, nu) = advance_slot(v, &alloc, &cache, &arr, &t);
        assert_eq!(v.get(n1, ObjectId(0)), 1.0);
        assert_eq!(nu.nu(l, ObjectId(0)), 3.0);
        assert_eq!(v.get(n2, ObjectId(0)), 0.0, "source is a sink");
    }

    #[test]
    fn receiver_gains_what_was_sent() {
        let t = load_topology("[catalog]\nobjects 1\nchunks 1\nchunk_size 1\ninterest_size 1\n[links]\n1 2 24\n2 3 24\n[sources]\nall 3\n").unwrap();
        let (n1, n2) = (NodeId(0), NodeId(1));
        let mut v = VipLedger::for_topology(&t);
        v.set(n1, ObjectId(0), 1.0);
        let mut alloc = ForwardingAllocation::idle(t.link_count());
        let l = t.link_between(n1, n2).unwrap();
        alloc.assign(l, ObjectId(0), 3.0);
        let (v, nu) = advance_slot(v, &alloc, &CacheState::empty(3, 1), &SlotArrivals::default(), &t);
        assert_eq!(nu.nu(l, ObjectId(0)), 1.0);
        assert_eq!(v.get(n2, ObjectId(0)), 1.0);
        assert_eq!(v.get(n1, ObjectId(0)), 0.0);
    }

    #[test]
    fn outgoing_links_served_in_destination_order() {
        // node 1 has 4 VIPs and two granted links of rate 3 each
        let t = load_topology("[catalog]\nobjects 1\nchunks 1\nchunk_size 1\ninterest_size 1\n[links]\n1 2 24\n1 3 24\n2 4 24\n3 4 24\n[sources]\nall 4\n").unwrap();
        let n1 = NodeId(0);
        let mut v = VipLedger::for_topology(&t);
        v.set(n1, ObjectId(0), 4.0);
        let mut alloc = ForwardingAllocation::idle(t.link_count());
        let (l12, l13) = (t.link_between(n1, NodeId(1)).unwrap(), t.link_between(n1, NodeId(2)).unwrap());
        alloc.assign(l12, ObjectId(0), 3.0);
        alloc.assign(l13, ObjectId(0), 3.0);
        let (_, nu) = advance_slot(v, &alloc, &CacheState::empty(4, 1), &SlotArrivals::default(), &t);
        assert_eq!(nu.nu(l12, ObjectId(0)), 3.0);
        assert_eq!(nu.nu(l13, ObjectId(0)), 1.0);
    }
}
