use super::VipLedger;
use crate::model::{LinkId, ObjectId, Topology};

/// Optional cost bias added to the backpressure differential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Bias {
    /// Plain `V_a^k - V_b^k`.
    #[default]
    None,
    /// Adds `h_a^k - h_b^k`, the hop-count differential toward `src(k)`.
    HopCount,
}

/// Per-slot VIP transmission allocation. Each link carries at most one
/// object, at the full normalized reverse capacity.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardingAllocation {
    winner: Vec<Option<ObjectId>>,
    winner_weight: Vec<f64>,
    rate: Vec<f64>,
}

impl ForwardingAllocation {
    pub fn idle(links: usize) -> Self {
        Self { winner: vec![None; links], winner_weight: vec![0.0; links], rate: vec![0.0; links] }
    }

    /// Allocation that grants `rate` VIPs per slot to `object` on `link`.
    /// Used by policies other than backpressure.
    pub fn assign(&mut self, link: LinkId, object: ObjectId, rate: f64) {
        self.winner[link.index()] = Some(object);
        self.rate[link.index()] = rate;
    }

    pub fn clear(&mut self, link: LinkId) {
        self.winner[link.index()] = None;
        self.rate[link.index()] = 0.0;
    }

    pub fn link_count(&self) -> usize {
        self.winner.len()
    }

    /// `mu_ab^k(t)`.
    pub fn mu(&self, l: LinkId, k: ObjectId) -> f64 {
        match self.winner[l.index()] {
            Some(w) if w == k => self.rate[l.index()],
            _ => 0.0,
        }
    }

    /// The object granted capacity on `l`, if any.
    pub fn granted(&self, l: LinkId) -> Option<(ObjectId, f64)> {
        self.winner[l.index()].filter(|_| self.rate[l.index()] > 0.0).map(|k| (k, self.rate[l.index()]))
    }

    /// `k*_ab`: the argmax object, whether or not it was granted capacity.
    pub fn winner(&self, l: LinkId) -> Option<ObjectId> {
        self.winner[l.index()]
    }

    /// `W*_ab = (W_ab^{k*})^+`.
    pub fn winner_weight(&self, l: LinkId) -> f64 {
        self.winner_weight[l.index()]
    }

    /// Total VIPs per slot allocated on `l`.
    pub fn rate(&self, l: LinkId) -> f64 {
        self.rate[l.index()]
    }
}

/// Backpressure weight `W_ab^k`, biased if requested.
pub fn backpressure_weight(ledger: &VipLedger, topology: &Topology, l: LinkId, k: ObjectId, bias: Bias) -> f64 {
    let link = topology.link(l);
    let w = ledger.get(link.from, k) - ledger.get(link.to, k);
    match bias {
        Bias::None => w,
        Bias::HopCount => w + topology.hops_to_source(link.from, k) as f64 - topology.hops_to_source(link.to, k) as f64,
    }
}

/// Backpressure forwarding: on every link pick the allowed object with the
/// largest weight (lowest id on ties) and give it the whole normalized
/// reverse capacity if that weight is positive.
pub fn backpressure_allocate(ledger: &VipLedger, topology: &Topology, slot_seconds: f64, bias: Bias) -> ForwardingAllocation {
    let mut alloc = ForwardingAllocation::idle(topology.link_count());
    for l in topology.link_ids() {
        let link = topology.link(l);
        let (va, vb) = (ledger.row(link.from), ledger.row(link.to));
        let mut best: Option<(ObjectId, f64)> = None;
        for k in topology.objects() {
            if !topology.allows(k, l) {
                continue;
            }
            let mut w = va[k.index()] - vb[k.index()];
            if bias == Bias::HopCount {
                w += topology.hops_to_source(link.from, k) as f64 - topology.hops_to_source(link.to, k) as f64;
            }
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((k, w));
            }
        }
        if let Some((k, w)) = best {
            alloc.winner[l.index()] = Some(k);
            alloc.winner_weight[l.index()] = w.max(0.0);
            if w > 0.0 {
                alloc.rate[l.index()] = topology.vip_rate(l, slot_seconds);
            }
        }
    }
    alloc
}
