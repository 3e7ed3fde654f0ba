use std::fs;
use std::path::Path;

use vipsim::harness::{emit_results, run_experiment, ExperimentConfig, SweepResult};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text, Path::new(".")).unwrap()
}

/// Requester 1, relay 2, source 3, with extra `[experiment]` keys.
fn line(extra: &str) -> ExperimentConfig {
    config(&format!(
        "[experiment]\nobjects = 6\nchunks = 3\nchunk_size = 1000\ninterest_size = 10\nduration = 2\nslot = 0.01\nstep = 1e-6\nwindow = 20\nrequesters = 1\n{extra}\
         [links]\n1 2 8Mbps\n2 3 8Mbps\n[caches]\n2 2000 1\n[sources]\nall 3\n"
    ))
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn empty_sweep_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    emit_results(&SweepResult::default(), &["vip-alg2".to_string()], dir.path()).unwrap();
    let p = dir.path().join("vip-alg2");
    assert_eq!(lines(&p.join("delay.csv")), vec!["lambda,mean_delay_s,std_delay_s"]);
    assert_eq!(lines(&p.join("cache_hits.csv")), vec!["lambda,mean_hit_bytes,std_hit_bytes"]);
    assert_eq!(lines(&p.join("total_delay.csv")), vec!["lambda,mean_total_delay_s,std_total_delay_s"]);
    assert!(!p.join("raw").exists());
}

#[test]
fn two_lambdas_ten_seeds() {
    let c = line("policy = lce-lru\nlambdas = 5, 10\nseeds = 1-10\n");
    let r = run_experiment(&c).unwrap();
    assert!(r.failures.is_empty());
    assert_eq!(r.cells.len(), 20);
    let dir = tempfile::tempdir().unwrap();
    emit_results(&r, &c.policies, dir.path()).unwrap();
    let p = dir.path().join("lce-lru");
    let delay = lines(&p.join("delay.csv"));
    assert_eq!(delay.len(), 3);
    assert!(delay[1].starts_with("5,") && delay[2].starts_with("10,"));
    assert_eq!(fs::read_dir(p.join("raw")).unwrap().count(), 20);
    for row in delay.iter().skip(1).chain(lines(&p.join("cache_hits.csv")).iter().skip(1)) {
        assert!(!row.contains("NaN") && !row.contains("inf"), "{row}");
    }
    // aggregated mean is the mean over exactly the configured seeds
    let mean = r.cells.iter().filter(|c| c.cell.lambda == 5.0).map(|c| c.mean_delay()).sum::<f64>() / 10.0;
    assert!((r.rows("lce-lru")[0].mean_delay.mean - mean).abs() < 1e-12);
}

#[test]
fn zero_demand_gives_no_requests() {
    let c = line("policy = vip-alg2\nlambda = 0\n");
    let r = run_experiment(&c).unwrap();
    let m = &r.cells[0].metrics;
    assert!(m.requests.is_empty());
    assert_eq!(m.slots, 200);
    let dir = tempfile::tempdir().unwrap();
    emit_results(&r, &c.policies, dir.path()).unwrap();
    let raw = dir.path().join("vip-alg2/raw/lambda_0_seed_1.csv");
    assert_eq!(lines(&raw), vec!["request_id,create_time,fulfill_time,delay"]);
    assert_eq!(lines(&dir.path().join("vip-alg2/delay.csv"))[1], "0,0,0");
}

#[test]
fn requester_at_source_waits_one_step_per_chunk() {
    let text = "[experiment]\nobjects = 4\nchunks = 7\nchunk_size = 1000\nduration = 1\nslot = 0.01\nstep = 2e-6\nwindow = 10\nlambda = 30\npolicies = nocache, lce-lru\n\
                [nodes]\n1\n[sources]\nall 1\n";
    let r = run_experiment(&config(text)).unwrap();
    assert!(r.failures.is_empty(), "{:?}", r.failures);
    for cell in &r.cells {
        assert!(!cell.metrics.requests.is_empty());
        for q in &cell.metrics.requests {
            assert_eq!(q.delay(), 7 * 2_000, "request {}", q.id);
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let c = line("policies = vip-alg2, lce-bias, lfu\nlambdas = 20\nseeds = 3, 4\ntrace = true\n");
    let emit = || {
        let dir = tempfile::tempdir().unwrap();
        let files = emit_results(&run_experiment(&c).unwrap(), &c.policies, dir.path()).unwrap();
        let mut out: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|f| (f.strip_prefix(dir.path()).unwrap().display().to_string(), fs::read(f).unwrap()))
            .collect();
        out.sort();
        out
    };
    let (a, b) = (emit(), emit());
    assert!(a.iter().any(|(name, _)| name.ends_with(".csv.gz")));
    assert_eq!(a, b);
}

#[test]
fn unknown_policy_is_rejected_before_running() {
    let c = line("policy = lru-forever\nlambda = 1\n");
    assert!(matches!(run_experiment(&c), Err(vipsim::error::Error::UnknownPolicy(_))));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for e in fs::read_dir(&root).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "cfg") {
            let mut c = ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            c.apply_scale().unwrap();
            c.build_topology(1).unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 1);
}
