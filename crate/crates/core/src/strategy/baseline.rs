//! Classical caching baselines: a decision rule (LCE, FIXP) composed with a
//! replacement rule (LRU, FIFO, UNIF, BIAS), plus LFU which decides and
//! replaces in one step. All of them are paired with shortest-path
//! forwarding in the registry.
//!
//! "Requested" means a chunk-1 Interest was handled at the node.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Admission, CacheView, CachingStrategy};
use crate::error::{Error, Result};
use crate::model::{NodeId, ObjectId};

pub trait DecisionRule: Send {
    fn name(&self) -> &str;
    fn admit(&mut self, rng: &mut ChaCha8Rng) -> bool;
}

/// Leave Copies Everywhere.
#[derive(Debug, Default)]
pub struct Lce;

impl DecisionRule for Lce {
    fn name(&self) -> &str {
        "lce"
    }

    fn admit(&mut self, _: &mut ChaCha8Rng) -> bool {
        true
    }
}

/// Admit each new object independently with a fixed probability.
#[derive(Debug)]
pub struct Fixp {
    pub probability: f64,
}

impl Default for Fixp {
    fn default() -> Self {
        Self { probability: 0.75 }
    }
}

impl DecisionRule for Fixp {
    fn name(&self) -> &str {
        "fixp"
    }

    fn admit(&mut self, rng: &mut ChaCha8Rng) -> bool {
        rng.random_bool(self.probability.clamp(0.0, 1.0))
    }
}

/// Per-node, per-object request counters.
#[derive(Clone, Debug)]
pub struct Frequencies {
    counts: Vec<u64>,
    objects: usize,
}

impl Frequencies {
    pub fn new(nodes: usize, objects: usize) -> Self {
        Self { counts: vec![0; nodes * objects], objects }
    }

    pub fn bump(&mut self, n: NodeId, k: ObjectId) {
        self.counts[n.index() * self.objects + k.index()] += 1;
    }

    pub fn get(&self, n: NodeId, k: ObjectId) -> u64 {
        self.counts[n.index() * self.objects + k.index()]
    }

    /// Least frequently requested object among `cached`, lowest id on ties.
    pub fn least(&self, n: NodeId, cached: &[ObjectId]) -> Option<ObjectId> {
        cached.iter().copied().min_by_key(|&k| (self.get(n, k), k))
    }
}

pub trait ReplacementRule: Send {
    fn name(&self) -> &str;
    fn requested(&mut self, _node: NodeId, _object: ObjectId, _clock: u64) {}
    fn inserted(&mut self, _node: NodeId, _object: ObjectId, _clock: u64) {}
    fn removed(&mut self, _node: NodeId, _object: ObjectId) {}
    fn victim(&mut self, node: NodeId, cached: &[ObjectId], freq: &Frequencies, rng: &mut ChaCha8Rng) -> Result<ObjectId>;
    /// Objects the rule is tracking at `node`, ascending.
    fn tracked(&self, _node: NodeId) -> Option<Vec<ObjectId>> {
        None
    }
}

/// Per-node `object -> stamp` maps holding exactly the cached objects.
#[derive(Clone, Debug)]
struct Stamps(Vec<BTreeMap<ObjectId, u64>>);

impl Stamps {
    fn new(nodes: usize) -> Self {
        Self(vec![BTreeMap::new(); nodes])
    }

    fn oldest(&self, node: NodeId) -> Result<ObjectId> {
        self.0[node.index()]
            .iter()
            .min_by_key(|(k, s)| (**s, **k))
            .map(|(k, _)| *k)
            .ok_or(Error::EmptyCache(node.0))
    }
}

/// Least recently requested.
#[derive(Clone, Debug)]
pub struct Lru(Stamps);

impl Lru {
    pub fn new(nodes: usize) -> Self {
        Self(Stamps::new(nodes))
    }
}

impl ReplacementRule for Lru {
    fn name(&self) -> &str {
        "lru"
    }

    fn requested(&mut self, node: NodeId, object: ObjectId, clock: u64) {
        if let Some(s) = self.0 .0[node.index()].get_mut(&object) {
            *s = clock;
        }
    }

    fn inserted(&mut self, node: NodeId, object: ObjectId, clock: u64) {
        self.0 .0[node.index()].insert(object, clock);
    }

    fn removed(&mut self, node: NodeId, object: ObjectId) {
        self.0 .0[node.index()].remove(&object);
    }

    fn victim(&mut self, node: NodeId, _: &[ObjectId], _: &Frequencies, _: &mut ChaCha8Rng) -> Result<ObjectId> {
        self.0.oldest(node)
    }

    fn tracked(&self, node: NodeId) -> Option<Vec<ObjectId>> {
        Some(self.0 .0[node.index()].keys().copied().collect())
    }
}

/// Earliest inserted.
#[derive(Clone, Debug)]
pub struct Fifo(Stamps);

impl Fifo {
    pub fn new(nodes: usize) -> Self {
        Self(Stamps::new(nodes))
    }
}

impl ReplacementRule for Fifo {
    fn name(&self) -> &str {
        "fifo"
    }

    fn inserted(&mut self, node: NodeId, object: ObjectId, clock: u64) {
        self.0 .0[node.index()].insert(object, clock);
    }

    fn removed(&mut self, node: NodeId, object: ObjectId) {
        self.0 .0[node.index()].remove(&object);
    }

    fn victim(&mut self, node: NodeId, _: &[ObjectId], _: &Frequencies, _: &mut ChaCha8Rng) -> Result<ObjectId> {
        self.0.oldest(node)
    }

    fn tracked(&self, node: NodeId) -> Option<Vec<ObjectId>> {
        Some(self.0 .0[node.index()].keys().copied().collect())
    }
}

/// Uniformly random cached object.
#[derive(Clone, Debug, Default)]
pub struct Unif;

impl ReplacementRule for Unif {
    fn name(&self) -> &str {
        "unif"
    }

    fn victim(&mut self, node: NodeId, cached: &[ObjectId], _: &Frequencies, rng: &mut ChaCha8Rng) -> Result<ObjectId> {
        if cached.is_empty() {
            return Err(Error::EmptyCache(node.0));
        }
        Ok(cached[rng.random_range(0..cached.len())])
    }
}

/// Two distinct cached objects sampled uniformly; the less frequently
/// requested one is evicted.
#[derive(Clone, Debug, Default)]
pub struct Bias;

/// The BIAS comparison for an already drawn pair.
pub fn bias_pick(node: NodeId, a: ObjectId, b: ObjectId, freq: &Frequencies) -> ObjectId {
    std::cmp::min_by_key(a, b, |&k| (freq.get(node, k), k))
}

impl ReplacementRule for Bias {
    fn name(&self) -> &str {
        "bias"
    }

    fn victim(&mut self, node: NodeId, cached: &[ObjectId], freq: &Frequencies, rng: &mut ChaCha8Rng) -> Result<ObjectId> {
        match cached.len() {
            0 => Err(Error::EmptyCache(node.0)),
            1 => Ok(cached[0]),
            n => {
                let i = rng.random_range(0..n);
                let mut j = rng.random_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                Ok(bias_pick(node, cached[i], cached[j], freq))
            }
        }
    }
}

/// A decision rule composed with a replacement rule.
pub struct Baseline {
    name: String,
    decision: Box<dyn DecisionRule>,
    replacement: Box<dyn ReplacementRule>,
    freq: Frequencies,
    clock: u64,
}

impl Baseline {
    pub fn new(decision: Box<dyn DecisionRule>, replacement: Box<dyn ReplacementRule>, nodes: usize, objects: usize) -> Self {
        Self {
            name: format!("{}-{}", decision.name(), replacement.name()),
            decision,
            replacement,
            freq: Frequencies::new(nodes, objects),
            clock: 0,
        }
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Caching decision under cache pressure.
    pub fn decide_admit(&mut self, rng: &mut ChaCha8Rng) -> bool {
        self.decision.admit(rng)
    }

    /// Replacement victim among the resident objects.
    pub fn evict(&mut self, node: NodeId, cached: &[ObjectId], rng: &mut ChaCha8Rng) -> Result<ObjectId> {
        self.replacement.victim(node, cached, &self.freq, rng)
    }

    pub fn frequencies(&self) -> &Frequencies {
        &self.freq
    }

    pub fn replacement(&self) -> &dyn ReplacementRule {
        self.replacement.as_ref()
    }
}

impl CachingStrategy for Baseline {
    fn name(&self) -> &str {
        &self.name
    }

    fn on_request(&mut self, node: NodeId, object: ObjectId) {
        let c = self.tick();
        self.freq.bump(node, object);
        self.replacement.requested(node, object, c);
    }

    fn decide(&mut self, view: &CacheView<'_>, _object: ObjectId, rng: &mut ChaCha8Rng) -> Result<Admission> {
        if view.free_slots > 0 {
            return Ok(Admission::Admit);
        }
        if !self.decide_admit(rng) {
            return Ok(Admission::Reject);
        }
        Ok(Admission::Replace(self.evict(view.node, view.cached, rng)?))
    }

    fn on_admit(&mut self, node: NodeId, object: ObjectId) {
        let c = self.tick();
        self.replacement.inserted(node, object, c);
    }

    fn on_evict(&mut self, node: NodeId, object: ObjectId) {
        self.replacement.removed(node, object);
    }
}

/// Least Frequently Used: admit a new object only if it has been requested
/// more often than the least requested cached object, which it replaces
/// when the cache is full.
pub struct Lfu {
    freq: Frequencies,
}

impl Lfu {
    pub fn new(nodes: usize, objects: usize) -> Self {
        Self { freq: Frequencies::new(nodes, objects) }
    }

    pub fn frequencies(&self) -> &Frequencies {
        &self.freq
    }
}

impl CachingStrategy for Lfu {
    fn name(&self) -> &str {
        "lfu"
    }

    fn on_request(&mut self, node: NodeId, object: ObjectId) {
        self.freq.bump(node, object);
    }

    fn decide(&mut self, view: &CacheView<'_>, object: ObjectId, _: &mut ChaCha8Rng) -> Result<Admission> {
        let Some(least) = self.freq.least(view.node, view.cached) else {
            return Ok(Admission::Admit);
        };
        if self.freq.get(view.node, object) <= self.freq.get(view.node, least) {
            return Ok(Admission::Reject);
        }
        Ok(if view.free_slots > 0 { Admission::Admit } else { Admission::Replace(least) })
    }
}
