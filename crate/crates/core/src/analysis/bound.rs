//! The time-average bound `N B / eps` on total VIP backlog under
//! backpressure with max-weight caching, and a trace check against it.

use super::region::RateMatrix;
use crate::error::{Error, Result};
use crate::model::Topology;

/// Shortest trace `verify_bound` accepts.
pub const MIN_HORIZON: usize = 10_000;

#[derive(Clone, Debug, PartialEq)]
pub struct DriftBound {
    pub b: f64,
    pub epsilon: f64,
    pub nodes: usize,
    pub mu_in_max: Vec<f64>,
    pub mu_out_max: Vec<f64>,
    pub a_max: Vec<f64>,
    pub r_max: Vec<f64>,
}

impl DriftBound {
    /// `N B / eps`.
    pub fn bound(&self) -> f64 {
        self.nodes as f64 * self.b / self.epsilon
    }
}

/// Builds the bound from per-node arrival caps `A_{n,max}` and the slack
/// matrix; `eps` is the smallest slack over entries outside the sources.
pub fn drift_bound(topology: &Topology, slot_seconds: f64, a_max: &[f64], slack: &RateMatrix) -> Result<DriftBound> {
    let mut eps = f64::INFINITY;
    for n in topology.nodes() {
        for k in topology.objects() {
            if topology.source(k) != n {
                eps = eps.min(slack.get(n, k));
            }
        }
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::NonPositiveSlack(if eps.is_finite() { eps } else { 0.0 }));
    }
    drift_bound_with_epsilon(topology, slot_seconds, a_max, eps)
}

pub fn drift_bound_with_epsilon(topology: &Topology, slot_seconds: f64, a_max: &[f64], epsilon: f64) -> Result<DriftBound> {
    if !(epsilon > 0.0) {
        return Err(Error::NonPositiveSlack(epsilon));
    }
    if a_max.len() != topology.node_count() {
        return Err(Error::Config("one arrival cap per node is required".into()));
    }
    let z = topology.catalog().object_bits() as f64;
    let n = topology.node_count();
    let per_slot = |l: crate::model::LinkId| topology.link(l).capacity_bps * slot_seconds / z;
    let mu_in: Vec<f64> = topology.nodes().map(|v| topology.in_links(v).iter().map(|&l| per_slot(l)).sum()).collect();
    let mu_out: Vec<f64> = topology.nodes().map(|v| topology.out_links(v).iter().map(|&l| per_slot(l)).sum()).collect();
    let r_max: Vec<f64> = topology.nodes().map(|v| topology.object_count() as f64 * topology.read_rate(v)).collect();
    let sum: f64 = (0..n)
        .map(|i| mu_out[i].powi(2) + (a_max[i] + mu_in[i] + r_max[i]).powi(2) + 2.0 * mu_out[i] * r_max[i])
        .sum();
    Ok(DriftBound {
        b: sum / (2.0 * n as f64),
        epsilon,
        nodes: n,
        mu_in_max: mu_in,
        mu_out_max: mu_out,
        a_max: a_max.to_vec(),
        r_max,
    })
}

/// Least-squares slope with a confidence interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub half_width: f64,
}

impl SlopeEstimate {
    pub fn positive(&self) -> bool {
        self.slope - self.half_width > 0.0
    }
}

/// Two-sided 97.5% Student-t quantiles for 1..=30 degrees of freedom.
const T975: [f64; 30] = [
    12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120, 2.110,
    2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
];

/// Slope per slot of `series`, estimated from `batches` batch means so
/// that serial correlation does not shrink the interval, with a 95%
/// interval.
pub fn batch_slope(series: &[f64], batches: usize) -> SlopeEstimate {
    let batches = batches.clamp(3, series.len().max(3));
    let size = series.len() / batches;
    if size == 0 {
        return SlopeEstimate { slope: 0.0, half_width: f64::INFINITY };
    }
    let xs: Vec<f64> = (0..batches).map(|b| (b * size) as f64 + (size as f64 - 1.0) / 2.0).collect();
    let ys: Vec<f64> = (0..batches).map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = batches as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    let df = batches - 2;
    let se = (rss / df as f64 / sxx).sqrt();
    let t = T975[(df - 1).min(T975.len() - 1)];
    SlopeEstimate { slope, half_width: t * se }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    /// Mean of `sum V` over the final 20% of the trace.
    pub tail_average: f64,
    pub bound: f64,
    pub passed: bool,
    /// Slope over the second half of the trace.
    pub slope: SlopeEstimate,
    pub diverging: bool,
}

/// Compares the tail average of a `sum V` trace with the bound.
pub fn verify_bound(totals: &[f64], bound: &DriftBound) -> Result<BoundReport> {
    if totals.len() < MIN_HORIZON {
        return Err(Error::HorizonTooShort { slots: totals.len(), min: MIN_HORIZON });
    }
    let tail = &totals[totals.len() * 4 / 5..];
    let tail_average = tail.iter().sum::<f64>() / tail.len() as f64;
    let slope = batch_slope(&totals[totals.len() / 2..], 20);
    let b = bound.bound();
    Ok(BoundReport { tail_average, bound: b, passed: tail_average <= b, slope, diverging: slope.positive() })
}
