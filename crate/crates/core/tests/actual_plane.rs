use vipsim::actual::{reverse_path_mismatches, PacketKind, RunOutput, SimConfig, Simulator};
use vipsim::model::{load_topology, LinkId, NodeId, ObjectId, Request, Topology};
use vipsim::strategy::{PolicyParams, Registry};
use vipsim::vip::Bias;

const CHUNKS: u32 = 4;
// 1000-byte chunks on 8 Mb/s links: 1 ms per chunk
const CHUNK_NS: u64 = 1_000_000;

fn topo(links: &str, caches: &str, source: u32) -> Topology {
    load_topology(&format!(
        "[catalog]\nobjects 4\nchunks {CHUNKS}\nchunk_size 1000\ninterest_size 10\n[links]\n{links}[caches]\n{caches}[sources]\nall {source}\n"
    ))
    .unwrap()
}

fn config() -> SimConfig {
    SimConfig {
        slot_seconds: 0.01,
        step_seconds: 1e-6,
        window: 10,
        bias: Bias::HopCount,
        duration: 1.0,
        record_trace: true,
        ..SimConfig::default()
    }
}

fn node(t: &Topology, label: u32) -> NodeId {
    t.node_by_label(label).unwrap()
}

fn link(t: &Topology, a: u32, b: u32) -> LinkId {
    t.link_between(node(t, a), node(t, b)).unwrap()
}

fn req(id: u64, time: f64, t: &Topology, at: u32, k: u32) -> Request {
    Request { id, time, node: node(t, at), object: ObjectId(k) }
}

fn run(t: &Topology, policy: &str, requests: Vec<Request>, setup: impl FnOnce(&mut Simulator)) -> RunOutput {
    let p = Registry::builtin().build(policy, &PolicyParams::new(t.node_count(), t.object_count())).unwrap();
    let mut sim = Simulator::new(t, p, config()).unwrap();
    setup(&mut sim);
    sim.run(requests).unwrap()
}

fn sent(out: &RunOutput, kind: PacketKind, l: LinkId) -> usize {
    let mut seen: Vec<(u32, u32, u64)> = out
        .trace
        .as_ref()
        .unwrap()
        .iter()
        .filter(|e| e.kind == kind && e.via == Some(l))
        .map(|e| (e.object.0, e.chunk, e.time))
        .collect();
    seen.dedup();
    seen.len()
}

#[test]
fn content_store_hit_answers_locally() {
    let t = topo("1 2 8Mbps\n2 3 8Mbps\n", "2 8000 1\n", 3);
    let out = run(&t, "lce-lru", vec![req(0, 0.0, &t, 1, 0)], |s| s.preload(node(&t, 2), ObjectId(0)).unwrap());
    assert_eq!(sent(&out, PacketKind::Interest, link(&t, 2, 3)), 0);
    assert_eq!(sent(&out, PacketKind::Interest, link(&t, 1, 2)), CHUNKS as usize);
    assert_eq!(out.metrics.hit_bytes[node(&t, 2).index()], 4000);
    assert_eq!(out.metrics.source_bytes, 0);
    assert_eq!(out.metrics.requests.len(), 1);
}

#[test]
fn duplicate_interest_is_suppressed() {
    let t = topo("1 2 8Mbps\n4 2 8Mbps\n2 3 8Mbps\n", "", 3);
    let out = run(&t, "nocache", vec![req(0, 0.0, &t, 1, 0), req(1, 0.0, &t, 4, 0)], |_| {});
    assert_eq!(sent(&out, PacketKind::Interest, link(&t, 2, 3)), CHUNKS as usize);
    assert_eq!(out.metrics.source_bytes, 4000);
    assert_eq!(out.metrics.requests.len(), 2);
}

#[test]
fn data_fans_out_to_every_face() {
    let t = topo("1 2 8Mbps\n4 2 8Mbps\n5 2 8Mbps\n2 3 8Mbps\n", "", 3);
    let reqs = vec![req(0, 0.0, &t, 1, 0), req(1, 0.0, &t, 4, 0), req(2, 0.0, &t, 5, 0)];
    let out = run(&t, "nocache", reqs, |_| {});
    for leaf in [1, 4, 5] {
        assert_eq!(sent(&out, PacketKind::Data, link(&t, 2, leaf)), CHUNKS as usize);
    }
    assert_eq!(sent(&out, PacketKind::Data, link(&t, 3, 2)), CHUNKS as usize);
    assert_eq!(out.metrics.requests.len(), 3);
    assert_eq!(out.metrics.dropped_data, 0);
}

#[test]
fn unloaded_delay_respects_lower_bound() {
    let t = topo("1 2 8Mbps\n2 3 8Mbps\n3 4 8Mbps\n", "", 4);
    let out = run(&t, "nocache", vec![req(0, 0.0, &t, 1, 0)], |_| {});
    let hops = 3;
    let d = out.metrics.requests[0].delay();
    assert!(d >= 2 * hops * CHUNK_NS, "delay {d}");
    // pipelined: the last chunk trails the first by CHUNKS - 1 transmissions
    assert!(d >= (hops + CHUNKS as u64 - 1) * CHUNK_NS);
}

#[test]
fn requester_at_source_waits_one_step_per_chunk() {
    let t = topo("1 2 8Mbps\n", "", 2);
    let out = run(&t, "lce-lru", vec![req(0, 0.25, &t, 2, 0)], |_| {});
    assert_eq!(out.metrics.requests[0].delay(), CHUNKS as u64 * 1_000);
}

#[test]
fn reverse_paths_and_pit_lifecycle_under_load() {
    let t = topo(
        "1 2 8Mbps\n2 3 8Mbps\n3 4 8Mbps\n1 5 8Mbps\n5 4 8Mbps\n2 5 8Mbps\n",
        "2 8000 1\n5 8000 1\n3 4000 1\n",
        4,
    );
    let mut reqs = Vec::new();
    let mut time = 0.0;
    for i in 0..300u64 {
        time += 0.0007 * ((i * 7919) % 5 + 1) as f64;
        let at = [1, 2, 3, 5][(i % 4) as usize];
        reqs.push(req(i, time, &t, at, ((i * 31) % 4) as u32));
    }
    for policy in ["lce-lru", "lce-fifo", "fixp-bias", "lfu", "vip-alg2", "vip-alg1"] {
        let out = run(&t, policy, reqs.clone(), |_| {});
        let m = &out.metrics;
        assert_eq!(m.requests.len(), 300, "{policy}");
        assert_eq!(m.reverse_path_violations, 0, "{policy}");
        assert_eq!(m.single_path_violations, 0, "{policy}");
        assert_eq!(m.capacity_violations, 0, "{policy}");
        assert_eq!(m.dropped_data, 0, "{policy}");
        assert!(reverse_path_mismatches(out.trace.as_ref().unwrap(), &t).is_empty(), "{policy}");
        assert!(m.requests.iter().all(|r| r.fulfilled >= r.created));
    }
}

#[test]
fn identical_runs_are_identical() {
    let t = topo("1 2 8Mbps\n2 3 8Mbps\n1 3 8Mbps\n", "1 4000 1\n2 4000 1\n", 3);
    let reqs: Vec<Request> = (0..50).map(|i| req(i, i as f64 * 0.003, &t, 1 + (i % 2) as u32, (i % 3) as u32)).collect();
    let csv = |out: RunOutput| {
        let mut b = Vec::new();
        out.metrics.write_requests(&mut b).unwrap();
        out.metrics.write_hits(&mut b, t.labels()).unwrap();
        b
    };
    let a = csv(run(&t, "vip-alg2", reqs.clone(), |_| {}));
    let b = csv(run(&t, "vip-alg2", reqs, |_| {}));
    assert_eq!(a, b);
}

#[test]
fn watchdog_aborts() {
    let t = topo("1 2 8Mbps\n", "", 2);
    let p = Registry::builtin().build("nocache", &PolicyParams::new(2, 4)).unwrap();
    let sim = Simulator::new(&t, p, SimConfig { max_events: 3, ..config() }).unwrap();
    assert!(matches!(sim.run(vec![req(0, 0.0, &t, 1, 0)]), Err(vipsim::Error::Watchdog { .. })));
}

#[test]
fn virtual_plane_runs_every_slot() {
    let t = topo("1 2 8Mbps\n", "", 2);
    let out = run(&t, "vip-alg2", vec![req(0, 0.0, &t, 1, 0)], |_| {});
    assert_eq!(out.metrics.slots, 100);
    assert_eq!(out.ledger.unwrap().slot(), 101);
}
