use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::region::RateMatrix;
use crate::model::{NodeId, ObjectId, SlotArrivals, Topology};

/// Per-slot Poisson arrivals clamped at `cap` per (node, object), so the
/// arrival process is bounded.
#[derive(Clone, Debug)]
pub struct BoundedArrivals {
    entries: Vec<(NodeId, ObjectId, Poisson<f64>)>,
    cap: u32,
}

impl BoundedArrivals {
    pub fn new(rates: &RateMatrix, topology: &Topology, cap: u32) -> Self {
        let mut entries = Vec::new();
        for n in topology.nodes() {
            for k in topology.objects() {
                let l = rates.get(n, k);
                if l > 0.0 && topology.source(k) != n {
                    entries.push((n, k, Poisson::new(l).expect("positive rate")));
                }
            }
        }
        Self { entries, cap }
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// `A_{n,max} = sum_k A_{n,max}^k` for each node.
    pub fn node_caps(&self, nodes: usize) -> Vec<f64> {
        let mut caps = vec![0.0; nodes];
        for (n, _, _) in &self.entries {
            caps[n.index()] += self.cap as f64;
        }
        caps
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> SlotArrivals {
        let mut out = SlotArrivals::default();
        for (n, k, d) in &self.entries {
            let a = (d.sample(rng) as u64).min(self.cap as u64) as u32;
            if a > 0 {
                out.push(*n, *k, a);
            }
        }
        out
    }
}
