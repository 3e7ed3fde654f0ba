use std::collections::VecDeque;

use super::Transmission;
use crate::model::{LinkId, NodeId, ObjectId, Topology};

/// Sliding-window averages of transmitted VIPs.
///
/// `nu_bar(l, k)` is the mean of `nu_l^k` over the last `T` slots, with
/// slots before the first one counting as zero. `cache_score(n, k)` sums
/// `nu_bar` over the links entering `n`.
#[derive(Clone, Debug)]
pub struct FlowStats {
    window: usize,
    objects: usize,
    ring: VecDeque<Transmission>,
    nu_sum: Vec<f64>,
    cs_sum: Vec<f64>,
    link_to: Vec<NodeId>,
    pushes: u64,
}

impl FlowStats {
    pub fn new(topology: &Topology, window: usize) -> Self {
        assert!(window >= 1, "window must be at least one slot");
        let k = topology.object_count();
        Self {
            window,
            objects: k,
            ring: VecDeque::with_capacity(window + 1),
            nu_sum: vec![0.0; topology.link_count() * k],
            cs_sum: vec![0.0; topology.node_count() * k],
            link_to: topology.links().iter().map(|l| l.to).collect(),
            pushes: 0,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Slots recorded so far.
    pub fn slots(&self) -> u64 {
        self.pushes
    }

    #[inline]
    pub fn nu_bar(&self, l: LinkId, k: ObjectId) -> f64 {
        self.nu_sum[l.index() * self.objects + k.index()] / self.window as f64
    }

    /// `CS_n^k`: average VIPs for `k` received by `n` per slot.
    #[inline]
    pub fn cache_score(&self, n: NodeId, k: ObjectId) -> f64 {
        self.cs_sum[n.index() * self.objects + k.index()] / self.window as f64
    }

    fn apply(&mut self, tx: &Transmission, sign: f64) {
        for (l, k, v) in tx.iter() {
            self.nu_sum[l.index() * self.objects + k.index()] += sign * v;
            self.cs_sum[self.link_to[l.index()].index() * self.objects + k.index()] += sign * v;
        }
    }

    /// Records one slot of transmissions and slides the window.
    pub fn update(&mut self, tx: Transmission) {
        self.apply(&tx, 1.0);
        self.ring.push_back(tx);
        if self.ring.len() > self.window {
            let old = self.ring.pop_front().expect("non-empty");
            self.apply(&old, -1.0);
        }
        self.pushes += 1;
        if self.pushes % self.window as u64 == 0 {
            self.resum();
        }
    }

    /// Recomputes the running sums from the ring so rounding error from
    /// add/subtract pairs does not accumulate.
    fn resum(&mut self) {
        self.nu_sum.iter_mut().for_each(|x| *x = 0.0);
        self.cs_sum.iter_mut().for_each(|x| *x = 0.0);
        let ring = std::mem::take(&mut self.ring);
        for tx in &ring {
            self.apply(tx, 1.0);
        }
        self.ring = ring;
    }
}

/// Functional form of [`FlowStats::update`].
pub fn update_flow_stats(mut stats: FlowStats, transmitted: Transmission) -> FlowStats {
    stats.update(transmitted);
    stats
}
