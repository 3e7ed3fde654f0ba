//! Stability-region membership as a linear feasibility problem over flow
//! variables `f_ab^k` and caching-set time fractions `beta_{n,s}`.

use super::sets::CachingSets;
use super::simplex::{LinearProgram, LpOutcome, Relation};
use crate::error::{Error, Result};
use crate::model::{LinkId, NodeId, ObjectId, Topology};

/// Largest LP the checker will build.
pub const VARIABLE_LIMIT: usize = 100_000;

/// Per-(node, object) rates in VIPs per slot.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix {
    nodes: usize,
    objects: usize,
    values: Vec<f64>,
}

impl RateMatrix {
    pub fn zeros(nodes: usize, objects: usize) -> Self {
        Self { nodes, objects, values: vec![0.0; nodes * objects] }
    }

    pub fn for_topology(topology: &Topology) -> Self {
        Self::zeros(topology.node_count(), topology.object_count())
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn object_count(&self) -> usize {
        self.objects
    }

    pub fn get(&self, n: NodeId, k: ObjectId) -> f64 {
        self.values[n.index() * self.objects + k.index()]
    }

    pub fn set(&mut self, n: NodeId, k: ObjectId, v: f64) {
        assert!(v >= 0.0 && v.is_finite(), "rates must be finite and nonnegative");
        self.values[n.index() * self.objects + k.index()] = v;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Whether every entry is at most the matching entry of `other`.
    pub fn le(&self, other: &Self) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }

    /// Parses `node object rate` lines (external labels, rate in VIPs per
    /// slot). `all node rate` sets every object at a node. `#` starts a
    /// comment.
    pub fn parse(text: &str, topology: &Topology) -> Result<Self> {
        let mut m = Self::for_topology(topology);
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let tok: Vec<&str> = body.split_whitespace().collect();
            let node = |s: &str| {
                s.parse::<u32>()
                    .ok()
                    .and_then(|l| topology.node_by_label(l))
                    .ok_or_else(|| Error::parse(line, format!("unknown node `{s}`")))
            };
            let rate = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| *v >= 0.0 && v.is_finite())
                    .ok_or_else(|| Error::parse(line, format!("bad rate `{s}`")))
            };
            match tok.as_slice() {
                ["all", n, r] => {
                    let (n, r) = (node(n)?, rate(r)?);
                    for k in topology.objects() {
                        m.set(n, k, r);
                    }
                }
                [n, k, r] => {
                    let n = node(n)?;
                    let k = k
                        .parse::<u32>()
                        .ok()
                        .filter(|&k| k >= 1 && (k as usize) <= topology.object_count())
                        .ok_or_else(|| Error::parse(line, format!("unknown object `{k}`")))?;
                    m.set(n, ObjectId(k - 1), rate(r)?);
                }
                _ => return Err(Error::parse(line, "expected `node object rate` or `all node rate`")),
            }
        }
        Ok(m)
    }
}

/// Flow and caching variables certifying membership.
#[derive(Clone, Debug)]
pub struct RegionWitness {
    objects: usize,
    /// `f[l * K + k]`.
    pub f: Vec<f64>,
    /// Per node, one fraction per caching set.
    pub beta: Vec<Vec<f64>>,
    pub sets: Vec<CachingSets>,
}

impl RegionWitness {
    pub fn flow(&self, l: LinkId, k: ObjectId) -> f64 {
        self.f[l.index() * self.objects + k.index()]
    }

    pub fn object_count(&self) -> usize {
        self.objects
    }

    /// Expected caching indicator `sum_{s contains k} beta_{n,s}`.
    pub fn cache_fraction(&self, n: NodeId, k: ObjectId) -> f64 {
        self.sets[n.index()]
            .iter()
            .zip(&self.beta[n.index()])
            .filter(|(s, _)| s.contains(&k))
            .map(|(_, b)| b)
            .sum()
    }

    /// Checks every region constraint directly, without the solver.
    pub fn validate(&self, topology: &Topology, rates: &RateMatrix, slot_seconds: f64, tol: f64) -> std::result::Result<(), String> {
        let kk = topology.object_count();
        if self.f.len() != topology.link_count() * kk || self.beta.len() != topology.node_count() {
            return Err("witness dimensions do not match the topology".into());
        }
        for l in topology.link_ids() {
            let link = topology.link(l);
            let mut total = 0.0;
            for k in topology.objects() {
                let f = self.flow(l, k);
                if f < -tol {
                    return Err(format!("negative flow on link {} object {}", l.0, k.label()));
                }
                if (link.from == topology.source(k) || !topology.allows(k, l)) && f.abs() > tol {
                    return Err(format!("flow of object {} on forbidden link {}", k.label(), l.0));
                }
                total += f;
            }
            let cap = topology.vip_rate(l, slot_seconds);
            if total > cap + tol {
                return Err(format!("link {} carries {total} > {cap}", l.0));
            }
        }
        for n in topology.nodes() {
            let beta = &self.beta[n.index()];
            if self.sets[n.index()].max_size() > topology.cache_slots(n) {
                return Err(format!("node {} uses sets larger than its cache", topology.label(n)));
            }
            if beta.iter().any(|&b| !(-tol..=1.0 + tol).contains(&b)) {
                return Err(format!("beta out of [0,1] at node {}", topology.label(n)));
            }
            let sum: f64 = beta.iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(format!("beta sums to {sum} at node {}", topology.label(n)));
            }
            for k in topology.objects() {
                if topology.source(k) == n {
                    continue;
                }
                let out: f64 = topology.out_links(n).iter().map(|&l| self.flow(l, k)).sum();
                let inc: f64 = topology.in_links(n).iter().map(|&l| self.flow(l, k)).sum();
                let served = out - inc + topology.read_rate(n) * self.cache_fraction(n, k);
                let lambda = rates.get(n, k);
                if lambda > served + tol {
                    return Err(format!("demand {lambda} exceeds service {served} at node {} object {}", topology.label(n), k.label()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Stability {
    Inside(RegionWitness),
    Outside,
}

impl Stability {
    pub fn is_inside(&self) -> bool {
        matches!(self, Stability::Inside(_))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Feasible,
    /// maximize theta with theta * lambda in the region
    Scaling,
    /// maximize t with lambda + t in the region
    Slack,
}

struct Layout {
    flow_var: Vec<Option<usize>>,
    beta_offset: Vec<usize>,
    sets: Vec<CachingSets>,
    extra: usize,
    total: usize,
}

fn layout(topology: &Topology) -> Result<Layout> {
    let kk = topology.object_count();
    let mut flow_var = vec![None; topology.link_count() * kk];
    let mut next = 0usize;
    for l in topology.link_ids() {
        for k in topology.objects() {
            if topology.link(l).from != topology.source(k) && topology.allows(k, l) {
                flow_var[l.index() * kk + k.index()] = Some(next);
                next += 1;
            }
        }
    }
    let mut beta_offset = Vec::new();
    let mut sets = Vec::new();
    for n in topology.nodes() {
        let s = CachingSets::new(kk, topology.cache_slots(n));
        let count = usize::try_from(s.count()).unwrap_or(usize::MAX);
        beta_offset.push(next);
        next = next.saturating_add(count);
        sets.push(s);
        if next > VARIABLE_LIMIT {
            return Err(Error::TooManyVariables { count: next, limit: VARIABLE_LIMIT });
        }
    }
    let extra = next;
    let total = next + 1;
    if total > VARIABLE_LIMIT {
        return Err(Error::TooManyVariables { count: total, limit: VARIABLE_LIMIT });
    }
    Ok(Layout { flow_var, beta_offset, sets, extra, total })
}

fn solve(topology: &Topology, rates: &RateMatrix, slot_seconds: f64, mode: Mode) -> Result<Option<(f64, RegionWitness)>> {
    if rates.node_count() != topology.node_count() || rates.object_count() != topology.object_count() {
        return Err(Error::Config("rate matrix does not match the topology".into()));
    }
    let kk = topology.object_count();
    let lay = layout(topology)?;
    let mut lp = LinearProgram::new(lay.total);
    match mode {
        Mode::Feasible => {
            // prefer the smallest flows, then the smallest caching sets
            for v in lay.flow_var.iter().flatten() {
                lp.set_objective(*v, -1.0);
            }
            for (n, s) in lay.sets.iter().enumerate() {
                for i in 0..s.count() {
                    lp.set_objective(lay.beta_offset[n] + i as usize, -1e-3 * s.locate(i).0 as f64);
                }
            }
        }
        Mode::Scaling | Mode::Slack => lp.set_objective(lay.extra, 1.0),
    }
    let mut demand_rows = 0;
    for n in topology.nodes() {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); kk];
        let r = topology.read_rate(n);
        if r > 0.0 {
            let s = &lay.sets[n.index()];
            for i in 0..s.count() {
                for k in s.set(i) {
                    rows[k.index()].push((lay.beta_offset[n.index()] + i as usize, r));
                }
            }
        }
        for k in topology.objects() {
            if topology.source(k) == n {
                continue;
            }
            let row = &mut rows[k.index()];
            for &l in topology.out_links(n) {
                if let Some(v) = lay.flow_var[l.index() * kk + k.index()] {
                    row.push((v, 1.0));
                }
            }
            for &l in topology.in_links(n) {
                if let Some(v) = lay.flow_var[l.index() * kk + k.index()] {
                    row.push((v, -1.0));
                }
            }
            let lambda = rates.get(n, k);
            let rhs = match mode {
                Mode::Feasible => lambda,
                Mode::Scaling => {
                    row.push((lay.extra, -lambda));
                    0.0
                }
                Mode::Slack => {
                    row.push((lay.extra, -1.0));
                    lambda
                }
            };
            lp.add(std::mem::take(row), Relation::Ge, rhs);
            demand_rows += 1;
        }
    }
    for l in topology.link_ids() {
        let row: Vec<(usize, f64)> = topology.objects().filter_map(|k| lay.flow_var[l.index() * kk + k.index()].map(|v| (v, 1.0))).collect();
        if !row.is_empty() {
            lp.add(row, Relation::Le, topology.vip_rate(l, slot_seconds));
        }
    }
    for (n, s) in lay.sets.iter().enumerate() {
        let row = (0..s.count() as usize).map(|i| (lay.beta_offset[n] + i, 1.0)).collect();
        lp.add(row, Relation::Eq, 1.0);
    }
    if mode != Mode::Feasible && demand_rows == 0 {
        return Err(Error::Config("no demand entries outside the content sources".into()));
    }
    match lp.solve() {
        LpOutcome::Infeasible => Ok(None),
        LpOutcome::Unbounded => Ok(Some((f64::INFINITY, witness_from(&lay, topology, &vec![0.0; lay.total])))),
        LpOutcome::Optimal { x, .. } => Ok(Some((x[lay.extra], witness_from(&lay, topology, &x)))),
    }
}

fn witness_from(lay: &Layout, topology: &Topology, x: &[f64]) -> RegionWitness {
    let kk = topology.object_count();
    let f = lay.flow_var.iter().map(|v| v.map_or(0.0, |v| x[v])).collect();
    let beta = lay
        .sets
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let mut b: Vec<f64> = (0..s.count() as usize).map(|i| x[lay.beta_offset[n] + i]).collect();
            if b.iter().all(|&v| v == 0.0) {
                b[0] = 1.0;
            }
            b
        })
        .collect();
    RegionWitness { objects: kk, f, beta, sets: lay.sets.clone() }
}

/// Whether `rates` lies in the stability region.
pub fn check_stability(topology: &Topology, rates: &RateMatrix, slot_seconds: f64) -> Result<Stability> {
    Ok(match solve(topology, rates, slot_seconds, Mode::Feasible)? {
        Some((_, w)) => Stability::Inside(w),
        None => Stability::Outside,
    })
}

/// Largest `theta` with `theta * rates` in the region, with its witness.
/// Infinite when `rates` only touches content sources or is zero.
pub fn max_scaling(topology: &Topology, rates: &RateMatrix, slot_seconds: f64) -> Result<(f64, RegionWitness)> {
    solve(topology, rates, slot_seconds, Mode::Scaling)?.ok_or_else(|| Error::Invariant("zero scaling is always feasible".into()))
}

/// Largest uniform `t >= 0` with `rates + t` in the region (on every entry
/// outside the sources), with the witness for `rates + t`. `None` when
/// `rates` itself is outside.
pub fn max_uniform_slack(topology: &Topology, rates: &RateMatrix, slot_seconds: f64) -> Result<Option<(f64, RegionWitness)>> {
    solve(topology, rates, slot_seconds, Mode::Slack)
}
