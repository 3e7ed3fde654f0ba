//! Stationary randomized policy built from a region witness: each link
//! serves one object drawn with probability proportional to its flow, at
//! the link's total flow rate; each node caches one set drawn from `beta`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;

use super::region::RegionWitness;
use super::theory::VirtualController;
use crate::model::rng::{stream, Purpose};
use crate::model::{LinkId, ObjectId, Topology};
use crate::vip::{CacheState, ForwardingAllocation, VipLedger};

struct LinkChoice {
    objects: Vec<ObjectId>,
    pick: WeightedIndex<f64>,
    total: f64,
}

struct NodeChoice {
    sets: Vec<Vec<ObjectId>>,
    pick: WeightedIndex<f64>,
}

pub struct RandomizedPolicy {
    links: Vec<Option<LinkChoice>>,
    nodes: Vec<NodeChoice>,
    objects: usize,
    rng: ChaCha8Rng,
}

impl RandomizedPolicy {
    pub fn new(witness: &RegionWitness, topology: &Topology, seed: u64) -> Self {
        let links = topology
            .link_ids()
            .map(|l| {
                let (objects, weights): (Vec<ObjectId>, Vec<f64>) =
                    topology.objects().map(|k| (k, witness.flow(l, k).max(0.0))).filter(|&(_, f)| f > 0.0).unzip();
                let total: f64 = weights.iter().sum();
                (total > 0.0).then(|| LinkChoice { objects, pick: WeightedIndex::new(&weights).expect("positive weights"), total })
            })
            .collect();
        let nodes = topology
            .nodes()
            .map(|n| {
                let s = &witness.sets[n.index()];
                let (sets, weights): (Vec<Vec<ObjectId>>, Vec<f64>) = witness.beta[n.index()]
                    .iter()
                    .enumerate()
                    .filter(|&(_, &b)| b > 0.0)
                    .map(|(i, &b)| (s.set(i as u64), b))
                    .unzip();
                NodeChoice { sets, pick: WeightedIndex::new(&weights).expect("beta sums to one") }
            })
            .collect();
        Self { links, nodes, objects: topology.object_count(), rng: stream(seed, Purpose::Randomized, 0) }
    }

    /// One slot of `(mu, s)` decisions.
    pub fn sample(&mut self) -> (ForwardingAllocation, CacheState) {
        let mut alloc = ForwardingAllocation::idle(self.links.len());
        for (i, c) in self.links.iter().enumerate() {
            if let Some(c) = c {
                let k = c.objects[c.pick.sample(&mut self.rng)];
                alloc.assign(LinkId(i as u32), k, c.total);
            }
        }
        let mut cache = CacheState::empty(self.nodes.len(), self.objects);
        for (n, c) in self.nodes.iter().enumerate() {
            let set = &c.sets[c.pick.sample(&mut self.rng)];
            cache.set_node(crate::model::NodeId(n as u32), set.clone());
        }
        (alloc, cache)
    }
}

impl VirtualController for RandomizedPolicy {
    fn decide(&mut self, _: &VipLedger, _: &Topology) -> (ForwardingAllocation, CacheState) {
        self.sample()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::region::{check_stability, RateMatrix, Stability};
    use crate::model::load_topology;

    #[test]
    fn idle_link_never_transmits_and_point_mass_is_constant() {
        let t = load_topology(
            "[catalog]\nobjects 2\nchunks 1\nchunk_size 1\ninterest_size 1\n[links]\n1 2 80\n[caches]\n1 1 2\n[sources]\nall 2\n",
        )
        .unwrap();
        let Stability::Inside(w) = check_stability(&t, &RateMatrix::for_topology(&t), 1.0).unwrap() else { panic!() };
        let mut p = RandomizedPolicy::new(&w, &t, 1);
        for _ in 0..100 {
            let (a, c) = p.sample();
            assert!(t.link_ids().all(|l| a.granted(l).is_none()));
            assert!(t.nodes().all(|n| c.cached(n).is_empty()));
        }
    }
}
