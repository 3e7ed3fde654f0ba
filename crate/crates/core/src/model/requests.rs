use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::ids::{NodeId, ObjectId};
use super::rng::{self, Purpose};
use super::{DemandModel, ZipfTable};

/// One exogenous object request.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Request {
    pub id: u64,
    /// Arrival time in seconds.
    pub time: f64,
    pub node: NodeId,
    pub object: ObjectId,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Pending(f64, NodeId);

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

#[derive(Clone, Debug)]
struct NodeStream {
    gaps: Option<Exp<f64>>,
    arrivals: ChaCha8Rng,
    objects: ChaCha8Rng,
}

/// Lazily generated, time-ordered request sequence. Each node draws from its
/// own seeded sub-streams, so the sequence depends only on
/// `(seed, demand, duration)`.
#[derive(Clone, Debug)]
pub struct RequestStream {
    seed: u64,
    duration: f64,
    zipf: ZipfTable,
    nodes: Vec<NodeStream>,
    heap: BinaryHeap<Reverse<Pending>>,
    next_id: u64,
}

/// Starts a Poisson request stream over `[0, duration)`.
pub fn generate_requests(demand: &DemandModel, duration: f64, seed: u64) -> RequestStream {
    assert!(duration > 0.0, "duration must be positive");
    let mut nodes: Vec<NodeStream> = demand
        .rates()
        .iter()
        .enumerate()
        .map(|(i, &rate)| NodeStream {
            gaps: (rate > 0.0).then(|| Exp::new(rate).expect("positive rate")),
            arrivals: rng::stream(seed, Purpose::Arrivals, i as u64),
            objects: rng::stream(seed, Purpose::ObjectChoice, i as u64),
        })
        .collect();
    let mut heap = BinaryHeap::new();
    for (i, ns) in nodes.iter_mut().enumerate() {
        if let Some(gap) = ns.gaps {
            let t = gap.sample(&mut ns.arrivals);
            if t < duration {
                heap.push(Reverse(Pending(t, NodeId::from_index(i))));
            }
        }
    }
    RequestStream { seed, duration, zipf: demand.zipf().clone(), nodes, heap, next_id: 0 }
}

impl RequestStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Aggregates the remaining stream into per-slot arrival counts
    /// `A_n^k(t)` for `ceil(duration / slot_seconds)` slots.
    pub fn slot_counts(self, slot_seconds: f64) -> Vec<SlotArrivals> {
        let slots = (self.duration / slot_seconds).ceil() as usize;
        let mut out: Vec<BTreeMap<(NodeId, ObjectId), u32>> = vec![BTreeMap::new(); slots];
        for r in self {
            let s = ((r.time / slot_seconds) as usize).min(slots - 1);
            *out[s].entry((r.node, r.object)).or_default() += 1;
        }
        out.into_iter()
            .map(|m| SlotArrivals { counts: m.into_iter().map(|((n, k), c)| (n, k, c)).collect() })
            .collect()
    }
}

impl Iterator for RequestStream {
    type Item = Request;

    fn next(&mut self) -> Option<Request> {
        let Reverse(Pending(time, node)) = self.heap.pop()?;
        let ns = &mut self.nodes[node.index()];
        let object = self.zipf.sample(ns.objects.random::<f64>());
        let gap = ns.gaps.expect("only active nodes are queued").sample(&mut ns.arrivals);
        if time + gap < self.duration {
            self.heap.push(Reverse(Pending(time + gap, node)));
        }
        let id = self.next_id;
        self.next_id += 1;
        Some(Request { id, time, node, object })
    }
}

/// Sparse arrival counts for one virtual slot, sorted by `(node, object)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SlotArrivals {
    pub counts: Vec<(NodeId, ObjectId, u32)>,
}

impl SlotArrivals {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.2 as u64).sum()
    }

    pub fn push(&mut self, node: NodeId, object: ObjectId, count: u32) {
        self.counts.push((node, object, count));
    }

    pub fn get(&self, node: NodeId, object: ObjectId) -> u32 {
        self.counts
            .binary_search_by_key(&(node, object), |c| (c.0, c.1))
            .map_or(0, |i| self.counts[i].2)
    }
}
