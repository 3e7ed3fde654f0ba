use std::collections::{BTreeMap, HashMap, VecDeque};

use super::packet::{Face, SimTime};
use crate::model::{LinkId, ObjectId};

#[derive(Clone, Debug)]
pub struct PitEntry {
    /// Faces waiting for the Data, each tagged with the request it serves.
    /// A face may appear more than once with different requests.
    pub faces: Vec<(Face, u64)>,
    pub created: SimTime,
    pub out: LinkId,
}

impl PitEntry {
    /// Distinct faces in arrival order.
    pub fn distinct_faces(&self) -> Vec<Face> {
        let mut seen = Vec::with_capacity(self.faces.len());
        for &(f, _) in &self.faces {
            if !seen.contains(&f) {
                seen.push(f);
            }
        }
        seen
    }
}

#[derive(Clone, Debug)]
pub struct Resident {
    chunks: Vec<bool>,
    stored: u32,
    /// Link the admitting chunk arrived on; later chunks are stored only
    /// when they come the same way.
    pub via: Option<LinkId>,
}

impl Resident {
    pub fn has(&self, chunk: u32) -> bool {
        self.chunks[chunk as usize - 1]
    }

    pub fn stored(&self) -> u32 {
        self.stored
    }
}

/// Whole-object content store with chunk-level presence.
#[derive(Clone, Debug)]
pub struct ContentStore {
    slots: usize,
    chunks_per_object: u32,
    objects: BTreeMap<ObjectId, Resident>,
}

impl ContentStore {
    pub fn new(slots: usize, chunks_per_object: u32) -> Self {
        Self { slots, chunks_per_object, objects: BTreeMap::new() }
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn free_slots(&self) -> usize {
        self.slots.saturating_sub(self.objects.len())
    }

    pub fn resident(&self, k: ObjectId) -> Option<&Resident> {
        self.objects.get(&k)
    }

    pub fn is_resident(&self, k: ObjectId) -> bool {
        self.objects.contains_key(&k)
    }

    pub fn has_chunk(&self, k: ObjectId, chunk: u32) -> bool {
        self.objects.get(&k).is_some_and(|r| r.has(chunk))
    }

    /// Resident objects, ascending.
    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.objects.keys().copied()
    }

    /// Reserves a slot for `k`. Returns false when the store is full.
    pub fn admit(&mut self, k: ObjectId, via: Option<LinkId>) -> bool {
        if self.objects.len() >= self.slots {
            return false;
        }
        self.objects.entry(k).or_insert_with(|| Resident {
            chunks: vec![false; self.chunks_per_object as usize],
            stored: 0,
            via,
        });
        true
    }

    /// Drops every chunk of `k`.
    pub fn evict(&mut self, k: ObjectId) -> bool {
        self.objects.remove(&k).is_some()
    }

    pub fn store_chunk(&mut self, k: ObjectId, chunk: u32) {
        if let Some(r) = self.objects.get_mut(&k) {
            let c = &mut r.chunks[chunk as usize - 1];
            if !*c {
                *c = true;
                r.stored += 1;
            }
        }
    }

    /// Fills every chunk, used to preload a cache.
    pub fn fill(&mut self, k: ObjectId) {
        for c in 1..=self.chunks_per_object {
            self.store_chunk(k, c);
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QueuedInterest {
    pub face: Face,
    pub object: ObjectId,
    pub chunk: u32,
    pub request: u64,
}

/// Per-node forwarding state.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub pit: HashMap<(ObjectId, u32), PitEntry>,
    pub store: ContentStore,
    pub queue: VecDeque<QueuedInterest>,
    pub busy: bool,
    /// `alpha_n^k`, the last chunk number of Data received for each object.
    pub progress: Vec<u32>,
    pub last_out: Vec<Option<LinkId>>,
    /// PIT entries per object.
    pub pending: Vec<u32>,
}

impl NodeState {
    pub fn new(objects: usize, slots: usize, chunks_per_object: u32) -> Self {
        Self {
            pit: HashMap::new(),
            store: ContentStore::new(slots, chunks_per_object),
            queue: VecDeque::new(),
            busy: false,
            progress: vec![0; objects],
            last_out: vec![None; objects],
            pending: vec![0; objects],
        }
    }
}
