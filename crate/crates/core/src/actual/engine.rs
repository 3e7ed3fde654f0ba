use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use rand_chacha::ChaCha8Rng;

use super::metrics::{Metrics, RequestRecord};
use super::node::{NodeState, PitEntry, QueuedInterest};
use super::packet::{to_sim_time, transmission_time, Face, PacketEvent, PacketKind, SimTime};
use crate::error::{Error, Result};
use crate::model::rng::{stream, Purpose};
use crate::model::{shortest_path_next_hops, LinkId, NextHops, NodeId, ObjectId, Request, SlotArrivals, Topology};
use crate::strategy::{Admission, CacheView, Policy, RouteView, VirtualCaching};
use crate::vip::{advance_slot, backpressure_allocate, maxweight_cache, Bias, CacheState, FlowStats, LedgerDump, VipLedger};

/// Clocks and knobs for one run.
#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Virtual-plane slot length.
    pub slot_seconds: f64,
    /// Actual-plane time step: one Interest is served per node per step.
    pub step_seconds: f64,
    /// Sliding window `T` for `nu_bar`, in slots.
    pub window: usize,
    pub bias: Bias,
    /// Request generation horizon; also fixes the number of virtual slots.
    pub duration: f64,
    pub propagation_seconds: f64,
    pub max_events: u64,
    pub seed: u64,
    pub record_trace: bool,
    pub record_vip_totals: bool,
    pub dump_ledger: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            slot_seconds: 0.08,
            step_seconds: 2e-6,
            window: 5000,
            bias: Bias::HopCount,
            duration: 100.0,
            propagation_seconds: 0.0,
            max_events: 2_000_000_000,
            seed: 0,
            record_trace: false,
            record_vip_totals: false,
            dump_ledger: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.slot_seconds > 0.0 && self.step_seconds > 0.0) {
            return bad("clocks must be positive");
        }
        if self.step_seconds > self.slot_seconds {
            return bad("actual step must not exceed the virtual slot");
        }
        if self.window == 0 {
            return bad("window must be at least one slot");
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive");
        }
        if self.propagation_seconds < 0.0 {
            return bad("propagation delay must be nonnegative");
        }
        Ok(())
    }

    pub fn slot_count(&self) -> u64 {
        (self.duration / self.slot_seconds - 1e-9).ceil().max(0.0) as u64
    }
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub ledger: Option<VipLedger>,
    pub trace: Option<Vec<PacketEvent>>,
    pub ledger_dump: Option<Vec<u8>>,
}

#[derive(Clone, Copy, Debug)]
enum Event {
    Slot(u64),
    Data { link: LinkId, object: ObjectId, chunk: u32 },
    InterestArrival { node: NodeId, interest: QueuedInterest },
    InterestService(NodeId),
    Request(Request),
}

impl Event {
    fn rank(&self) -> u8 {
        match self {
            Event::Slot(_) => 0,
            Event::Data { .. } => 1,
            Event::InterestArrival { .. } => 2,
            Event::InterestService(_) => 3,
            Event::Request(_) => 4,
        }
    }
}

struct Scheduled {
    key: (SimTime, u8, u32, u64),
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

struct OpenRequest {
    node: NodeId,
    object: ObjectId,
    created: SimTime,
    delivered: u32,
    /// Interest crossings minus Data crossings, per Interest-direction link.
    balance: Vec<(LinkId, i64)>,
    /// First out-link used at each node.
    out: Vec<(NodeId, LinkId)>,
}

impl OpenRequest {
    fn shift(&mut self, l: LinkId, d: i64) {
        match self.balance.iter_mut().find(|(x, _)| *x == l) {
            Some((_, v)) => *v += d,
            None => self.balance.push((l, d)),
        }
    }
}

/// Discrete-event simulator binding the virtual and actual planes.
pub struct Simulator<'t> {
    topo: &'t Topology,
    hops: NextHops,
    cfg: SimConfig,
    policy: Policy,
    nodes: Vec<NodeState>,
    link_free: Vec<SimTime>,
    heap: BinaryHeap<Scheduled>,
    seq: u64,
    now: SimTime,
    rng: ChaCha8Rng,
    ledger: Option<VipLedger>,
    flow: Option<FlowStats>,
    arrivals: BTreeMap<(NodeId, ObjectId), u32>,
    dump: Option<LedgerDump<Vec<u8>>>,
    slot_ns: SimTime,
    slots_total: u64,
    open: HashMap<u64, OpenRequest>,
    metrics: Metrics,
    trace: Option<Vec<PacketEvent>>,
    step: SimTime,
    propagation: SimTime,
    chunks: u32,
    chunk_bits: u64,
    interest_bits: u64,
}

impl<'t> Simulator<'t> {
    pub fn new(topo: &'t Topology, policy: Policy, cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        if policy.forwarding.uses_flow_stats() && policy.virtual_plane.is_none() {
            return Err(Error::Config(format!("policy `{}` reads VIP flows but runs no virtual plane", policy.id)));
        }
        let hops = shortest_path_next_hops(topo)?;
        let cat = topo.catalog();
        let k = topo.object_count();
        let nodes = topo
            .nodes()
            .map(|n| NodeState::new(k, topo.cache_slots(n), cat.chunks_per_object()))
            .collect();
        let virtual_plane = policy.virtual_plane.is_some();
        let dump = if cfg.dump_ledger && virtual_plane { Some(LedgerDump::new(Vec::new())?) } else { None };
        Ok(Self {
            hops,
            policy,
            nodes,
            link_free: vec![0; topo.link_count()],
            heap: BinaryHeap::new(),
            seq: 0,
            now: 0,
            rng: stream(cfg.seed, Purpose::CachePolicy, 0),
            ledger: virtual_plane.then(|| VipLedger::for_topology(topo)),
            flow: virtual_plane.then(|| FlowStats::new(topo, cfg.window)),
            arrivals: BTreeMap::new(),
            dump,
            slot_ns: to_sim_time(cfg.slot_seconds),
            slots_total: cfg.slot_count(),
            open: HashMap::new(),
            metrics: Metrics::new(topo.node_count()),
            trace: cfg.record_trace.then(Vec::new),
            step: to_sim_time(cfg.step_seconds).max(1),
            propagation: to_sim_time(cfg.propagation_seconds),
            chunks: cat.chunks_per_object(),
            chunk_bits: cat.chunk_bits(),
            interest_bits: cat.interest_bits(),
            topo,
            cfg,
        })
    }

    /// Places a complete copy of `k` in the content store of `n`.
    pub fn preload(&mut self, n: NodeId, k: ObjectId) -> Result<()> {
        let store = &mut self.nodes[n.index()].store;
        if !store.admit(k, None) {
            return Err(Error::Config(format!("no room to preload object {} at node {}", k.label(), self.topo.label(n))));
        }
        store.fill(k);
        self.policy.caching.on_admit(n, k);
        Ok(())
    }

    fn schedule(&mut self, time: SimTime, node: NodeId, event: Event) {
        self.seq += 1;
        self.heap.push(Scheduled { key: (time, event.rank(), node.0, self.seq), event });
    }

    /// Runs until every request is fulfilled and every slot has executed.
    pub fn run(mut self, requests: impl IntoIterator<Item = Request>) -> Result<RunOutput> {
        let mut requests = requests.into_iter();
        if let Some(r) = requests.next() {
            self.schedule(to_sim_time(r.time), r.node, Event::Request(r));
        }
        if self.ledger.is_some() && self.slots_total > 0 {
            self.schedule(self.slot_ns, NodeId(0), Event::Slot(1));
        }
        while let Some(Scheduled { key, event }) = self.heap.pop() {
            self.metrics.events += 1;
            if self.metrics.events > self.cfg.max_events {
                return Err(Error::Watchdog { events: self.metrics.events - 1 });
            }
            self.now = key.0;
            match event {
                Event::Slot(j) => self.run_slot(j)?,
                Event::Data { link, object, chunk } => self.on_data(link, object, chunk)?,
                Event::InterestArrival { node, interest } => {
                    self.nodes[node.index()].queue.push_back(interest);
                    self.kick(node);
                }
                Event::InterestService(n) => {
                    let q = self.nodes[n.index()].queue.pop_front().expect("service scheduled on an empty queue");
                    self.on_interest(n, q)?;
                    if self.nodes[n.index()].queue.is_empty() {
                        self.nodes[n.index()].busy = false;
                    } else {
                        self.schedule(self.now + self.step, n, Event::InterestService(n));
                    }
                }
                Event::Request(r) => {
                    self.on_request(r);
                    if let Some(next) = requests.next() {
                        debug_assert!(next.time >= r.time);
                        self.schedule(to_sim_time(next.time), next.node, Event::Request(next));
                    }
                }
            }
        }
        let pending: usize = self.nodes.iter().map(|s| s.pit.len()).sum();
        if pending > 0 || !self.open.is_empty() {
            return Err(Error::Stalled { pending: pending.max(self.open.len()) });
        }
        Ok(RunOutput {
            metrics: self.metrics,
            ledger: self.ledger,
            trace: self.trace,
            ledger_dump: self.dump.map(LedgerDump::into_inner),
        })
    }

    fn kick(&mut self, n: NodeId) {
        let s = &mut self.nodes[n.index()];
        if !s.busy && !s.queue.is_empty() {
            s.busy = true;
            self.schedule(self.now + self.step, n, Event::InterestService(n));
        }
    }

    fn on_request(&mut self, r: Request) {
        self.open.insert(
            r.id,
            OpenRequest { node: r.node, object: r.object, created: self.now, delivered: 0, balance: Vec::new(), out: Vec::new() },
        );
        if self.ledger.is_some() {
            *self.arrivals.entry((r.node, r.object)).or_default() += 1;
        }
        let q = &mut self.nodes[r.node.index()].queue;
        for chunk in 1..=self.chunks {
            q.push_back(QueuedInterest { face: Face::Local(r.id), object: r.object, chunk, request: r.id });
        }
        self.kick(r.node);
    }

    fn record(&mut self, kind: PacketKind, node: NodeId, object: ObjectId, chunk: u32, via: Option<LinkId>, request: u64) {
        if let Some(t) = &mut self.trace {
            t.push(PacketEvent { kind, object, chunk, node, via, time: self.now, request });
        }
    }

    /// Puts `bits` on link `l` behind whatever is already queued there and
    /// returns the arrival time at the far end.
    fn transmit(&mut self, l: LinkId, bits: u64) -> SimTime {
        let start = self.now.max(self.link_free[l.index()]);
        let done = start + transmission_time(bits, self.topo.link(l).capacity_bps);
        self.link_free[l.index()] = done;
        done + self.propagation
    }

    fn on_interest(&mut self, n: NodeId, q: QueuedInterest) -> Result<()> {
        let (k, c) = (q.object, q.chunk);
        if c == 1 {
            self.policy.caching.on_request(n, k);
        }
        let chunk_bytes = self.chunk_bits / 8;
        if self.topo.source(k) == n {
            self.metrics.source_bytes += chunk_bytes;
            return self.send_data(n, q.face, k, c, &[q.request]);
        }
        if self.nodes[n.index()].store.has_chunk(k, c) {
            self.metrics.hit_bytes[n.index()] += chunk_bytes;
            if matches!(q.face, Face::Local(_)) {
                self.metrics.requester_hit_bytes += chunk_bytes;
            }
            return self.send_data(n, q.face, k, c, &[q.request]);
        }
        let state = &mut self.nodes[n.index()];
        if let Some(e) = state.pit.get_mut(&(k, c)) {
            e.faces.push((q.face, q.request));
            return Ok(());
        }
        let arrived_on = match q.face {
            Face::Link(l) => Some(l),
            Face::Local(_) => None,
        };
        let out = if c == 1 {
            let view = RouteView {
                topology: self.topo,
                next_hops: &self.hops,
                flow: self.flow.as_ref(),
                node: n,
                object: k,
                progress: state.progress[k.index()],
                chunks_per_object: self.chunks,
                pending_entries: state.pending[k.index()],
                last_out: state.last_out[k.index()],
                arrived_on,
            };
            self.policy.forwarding.route_new_request(&view)
        } else {
            state.last_out[k.index()].ok_or_else(|| {
                Error::Invariant(format!("chunk {c} of object {} at node {} has no outgoing link", k.label(), self.topo.label(n)))
            })?
        };
        if self.topo.link(out).from != n {
            return Err(Error::Invariant(format!("forwarding chose a link not leaving node {}", self.topo.label(n))));
        }
        state.last_out[k.index()] = Some(out);
        state.pending[k.index()] += 1;
        state.pit.insert((k, c), PitEntry { faces: vec![(q.face, q.request)], created: self.now, out });
        let pit_len = state.pit.len();
        self.metrics.max_pit_entries = self.metrics.max_pit_entries.max(pit_len);
        if let Some(r) = self.open.get_mut(&q.request) {
            r.shift(out, 1);
            match r.out.iter().find(|(m, _)| *m == n) {
                Some(&(_, prev)) if prev != out => self.metrics.single_path_violations += 1,
                Some(_) => {}
                None => r.out.push((n, out)),
            }
        }
        self.record(PacketKind::Interest, n, k, c, Some(out), q.request);
        self.metrics.interests_sent += 1;
        let at = self.transmit(out, self.interest_bits);
        let to = self.topo.link(out).to;
        self.schedule(at, to, Event::InterestArrival { node: to, interest: QueuedInterest { face: Face::Link(out), ..q } });
        Ok(())
    }

    /// Sends Data for `(k, c)` from `n` toward `face`, on behalf of `tags`.
    fn send_data(&mut self, n: NodeId, face: Face, k: ObjectId, c: u32, tags: &[u64]) -> Result<()> {
        match face {
            Face::Local(req) => {
                self.record(PacketKind::Data, n, k, c, None, req);
                self.deliver(req);
            }
            Face::Link(l) => {
                let back = self.topo.reverse(l);
                for &t in tags {
                    if let Some(r) = self.open.get_mut(&t) {
                        r.shift(l, -1);
                    }
                    self.record(PacketKind::Data, n, k, c, Some(back), t);
                }
                self.metrics.data_sent += 1;
                let at = self.transmit(back, self.chunk_bits);
                self.schedule(at, self.topo.link(back).to, Event::Data { link: back, object: k, chunk: c });
            }
        }
        Ok(())
    }

    fn deliver(&mut self, req: u64) {
        self.metrics.delivered_chunks += 1;
        let Some(r) = self.open.get_mut(&req) else { return };
        r.delivered += 1;
        if r.delivered < self.chunks {
            return;
        }
        let r = self.open.remove(&req).expect("present");
        if r.balance.iter().any(|&(_, v)| v != 0) {
            self.metrics.reverse_path_violations += 1;
        }
        self.metrics.requests.push(RequestRecord { id: req, node: r.node, object: r.object, created: r.created, fulfilled: self.now });
    }

    fn on_data(&mut self, l: LinkId, k: ObjectId, c: u32) -> Result<()> {
        let n = self.topo.link(l).to;
        let state = &mut self.nodes[n.index()];
        state.progress[k.index()] = c;
        let Some(entry) = state.pit.remove(&(k, c)) else {
            self.metrics.dropped_data += 1;
            return Ok(());
        };
        state.pending[k.index()] -= 1;
        if entry.out != self.topo.reverse(l) {
            self.metrics.reverse_path_violations += 1;
        }
        self.cache_arrival(n, k, c, l)?;
        for face in entry.distinct_faces() {
            let tags: Vec<u64> = entry.faces.iter().filter(|(f, _)| *f == face).map(|&(_, r)| r).collect();
            self.send_data(n, face, k, c, &tags)?;
        }
        Ok(())
    }

    fn cache_arrival(&mut self, n: NodeId, k: ObjectId, c: u32, l: LinkId) -> Result<()> {
        if self.topo.source(k) == n || self.nodes[n.index()].store.slots() == 0 {
            return Ok(());
        }
        let store = &mut self.nodes[n.index()].store;
        if let Some(res) = store.resident(k) {
            if res.via == Some(l) {
                store.store_chunk(k, c);
            }
            return Ok(());
        }
        if c != 1 {
            return Ok(());
        }
        let cached: Vec<ObjectId> = store.objects().collect();
        let view = CacheView {
            node: n,
            cached: &cached,
            free_slots: store.free_slots(),
            flow: self.flow.as_ref(),
            ledger: self.ledger.as_ref(),
        };
        let decision = self.policy.caching.decide(&view, k, &mut self.rng)?;
        let store = &mut self.nodes[n.index()].store;
        match decision {
            Admission::Reject => return Ok(()),
            Admission::Admit => {}
            Admission::Replace(v) => {
                if !store.evict(v) {
                    return Err(Error::Invariant(format!("policy evicted non-resident object {}", v.label())));
                }
                self.policy.caching.on_evict(n, v);
                self.metrics.churn += 1;
            }
        }
        let store = &mut self.nodes[n.index()].store;
        if !store.admit(k, Some(l)) {
            self.metrics.capacity_violations += 1;
            return Ok(());
        }
        store.store_chunk(k, c);
        if store.len() > store.slots() {
            self.metrics.capacity_violations += 1;
        }
        self.metrics.admissions += 1;
        self.policy.caching.on_admit(n, k);
        Ok(())
    }

    fn run_slot(&mut self, j: u64) -> Result<()> {
        let topo = self.topo;
        let ledger = self.ledger.take().expect("virtual plane active");
        let alloc = backpressure_allocate(&ledger, topo, self.cfg.slot_seconds, self.cfg.bias);
        let cache = match self.policy.virtual_plane {
            Some(VirtualCaching::MaxWeight) => maxweight_cache(&ledger, topo),
            _ => {
                let mut c = CacheState::empty(topo.node_count(), topo.object_count());
                for n in topo.nodes() {
                    c.set_node(n, self.nodes[n.index()].store.objects().collect());
                }
                c
            }
        };
        let arrivals = SlotArrivals { counts: std::mem::take(&mut self.arrivals).into_iter().map(|((n, k), a)| (n, k, a)).collect() };
        let (ledger, tx) = advance_slot(ledger, &alloc, &cache, &arrivals, topo);
        if let Some(f) = &mut self.flow {
            f.update(tx);
        }
        if self.cfg.record_vip_totals {
            self.metrics.vip_totals.push(ledger.total());
        }
        if let Some(d) = &mut self.dump {
            d.record(&ledger, topo)?;
        }
        self.ledger = Some(ledger);
        self.metrics.slots += 1;
        if j < self.slots_total {
            self.schedule(self.slot_ns * (j + 1), NodeId(0), Event::Slot(j + 1));
        }
        Ok(())
    }
}
