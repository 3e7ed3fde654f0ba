use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::actual::{write_trace, Metrics, PacketEvent, Simulator};
use crate::error::{Error, Result};
use crate::model::{generate_requests, DemandModel};
use crate::strategy::{PolicyParams, Registry};

/// Coordinates of one simulation run in a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub policy: String,
    pub lambda: f64,
    pub seed: u64,
}

/// What one finished run produced.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub cell: Cell,
    pub metrics: Metrics,
    pub labels: Vec<u32>,
    /// Cache hit bytes as reported, honouring `count_requester_hits`.
    pub hit_bytes: u64,
    pub trace: Option<Vec<PacketEvent>>,
    /// Gzip CSV rendering of `trace`.
    pub trace_gz: Option<Vec<u8>>,
}

impl CellResult {
    pub fn mean_delay(&self) -> f64 {
        self.metrics.mean_delay()
    }

    pub fn total_delay(&self) -> f64 {
        self.metrics.total_delay()
    }
}

#[derive(Debug)]
pub struct CellFailure {
    pub cell: Cell,
    pub error: Error,
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { mean: 0.0, std: 0.0, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        };
        Self { mean, std, count }
    }
}

/// Aggregated row for one (policy, λ).
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub policy: String,
    pub lambda: f64,
    pub mean_delay: Summary,
    pub total_delay: Summary,
    pub hit_bytes: Summary,
}

#[derive(Debug, Default)]
pub struct SweepResult {
    /// Successful runs in (policy, λ, seed) configuration order.
    pub cells: Vec<CellResult>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    pub fn policies(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.cell.policy.as_str()) {
                out.push(&c.cell.policy);
            }
        }
        out
    }

    pub fn cells_for<'a>(&'a self, policy: &'a str) -> impl Iterator<Item = &'a CellResult> + 'a {
        self.cells.iter().filter(move |c| c.cell.policy == policy)
    }

    pub fn get(&self, policy: &str, lambda: f64, seed: u64) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.cell.policy == policy && c.cell.lambda == lambda && c.cell.seed == seed)
    }

    /// One row per λ for `policy`, in sweep order.
    pub fn rows(&self, policy: &str) -> Vec<SweepRow> {
        let mut lambdas: Vec<f64> = Vec::new();
        for c in self.cells_for(policy) {
            if !lambdas.contains(&c.cell.lambda) {
                lambdas.push(c.cell.lambda);
            }
        }
        lambdas
            .into_iter()
            .map(|lambda| {
                let runs: Vec<&CellResult> = self.cells_for(policy).filter(|c| c.cell.lambda == lambda).collect();
                let pick = |f: &dyn Fn(&CellResult) -> f64| Summary::of(&runs.iter().map(|c| f(c)).collect::<Vec<_>>());
                SweepRow {
                    policy: policy.to_string(),
                    lambda,
                    mean_delay: pick(&|c| c.mean_delay()),
                    total_delay: pick(&|c| c.total_delay()),
                    hit_bytes: pick(&|c| c.hit_bytes as f64),
                }
            })
            .collect()
    }

    pub fn watchdog_tripped(&self) -> bool {
        self.failures.iter().any(|f| matches!(f.error, Error::Watchdog { .. } | Error::Stalled { .. }))
    }
}

/// Every (policy, λ, seed) combination in configuration order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for policy in &config.policies {
        for &lambda in &config.lambdas {
            for &seed in &config.seeds {
                out.push(Cell { policy: policy.clone(), lambda, seed });
            }
        }
    }
    out
}

/// Runs one cell to quiescence.
pub fn run_cell(config: &ExperimentConfig, registry: &Registry, cell: &Cell) -> Result<CellResult> {
    let topo = config.build_topology(cell.seed)?;
    let demand = DemandModel::new(config.node_rates(&topo, cell.lambda)?, topo.object_count(), config.zipf)?;
    let mut params = PolicyParams::new(topo.node_count(), topo.object_count());
    params.fixp_probability = config.fixp_probability;
    let policy = registry.build(&cell.policy, &params)?;
    let mut sim_cfg = config.sim.clone();
    sim_cfg.seed = cell.seed;
    let requests = generate_requests(&demand, sim_cfg.duration, cell.seed);
    let out = Simulator::new(&topo, policy, sim_cfg)?.run(requests)?;
    let m = out.metrics;
    let hit_bytes = if config.count_requester_hits { m.total_hit_bytes() } else { m.total_hit_bytes() - m.requester_hit_bytes };
    let trace_gz = match &out.trace {
        Some(t) => Some(write_trace(Vec::new(), t, &topo)?),
        None => None,
    };
    Ok(CellResult { cell: cell.clone(), labels: topo.labels().to_vec(), hit_bytes, metrics: m, trace: out.trace, trace_gz })
}

/// Runs every cell of the sweep on the rayon pool. Results come back in
/// configuration order whatever the scheduling; a failing cell is reported
/// and the rest still run.
pub fn run_experiment(config: &ExperimentConfig) -> Result<SweepResult> {
    run_experiment_with(config, &Registry::builtin())
}

pub fn run_experiment_with(config: &ExperimentConfig, registry: &Registry) -> Result<SweepResult> {
    config.validate()?;
    for p in &config.policies {
        if !registry.contains(p) {
            return Err(Error::UnknownPolicy(p.clone()));
        }
    }
    let all = cells(config);
    let outcomes: Vec<Result<CellResult>> = all.par_iter().map(|c| run_cell(config, registry, c)).collect();
    let mut result = SweepResult::default();
    for (cell, outcome) in all.into_iter().zip(outcomes) {
        match outcome {
            Ok(r) => result.cells.push(r),
            Err(error) => result.failures.push(CellFailure { cell, error }),
        }
    }
    Ok(result)
}
