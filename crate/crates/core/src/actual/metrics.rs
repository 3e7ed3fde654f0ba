use std::io::{self, Write};

use super::packet::{to_seconds, SimTime};
use crate::model::{NodeId, ObjectId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RequestRecord {
    pub id: u64,
    pub node: NodeId,
    pub object: ObjectId,
    pub created: SimTime,
    pub fulfilled: SimTime,
}

impl RequestRecord {
    pub fn delay(&self) -> SimTime {
        self.fulfilled - self.created
    }

    pub fn delay_seconds(&self) -> f64 {
        to_seconds(self.delay())
    }
}

/// Everything one simulation run measures.
#[derive(Clone, Debug, Default)]
pub struct Metrics {
    /// Completed requests in completion order.
    pub requests: Vec<RequestRecord>,
    /// Data bytes served from each node's content store.
    pub hit_bytes: Vec<u64>,
    /// Data bytes served by content sources.
    pub source_bytes: u64,
    /// Chunks delivered to requesting applications.
    pub delivered_chunks: u64,
    /// Objects evicted to make room for another.
    pub churn: u64,
    pub admissions: u64,
    /// Part of `hit_bytes` served to the node's own requests.
    pub requester_hit_bytes: u64,
    pub dropped_data: u64,
    pub reverse_path_violations: u64,
    pub single_path_violations: u64,
    pub capacity_violations: u64,
    pub max_pit_entries: usize,
    pub events: u64,
    pub interests_sent: u64,
    pub data_sent: u64,
    pub slots: u64,
    /// `sum V` after each slot, when the virtual plane runs.
    pub vip_totals: Vec<f64>,
}

impl Metrics {
    pub fn new(nodes: usize) -> Self {
        Self { hit_bytes: vec![0; nodes], ..Self::default() }
    }

    pub fn total_hit_bytes(&self) -> u64 {
        self.hit_bytes.iter().sum()
    }

    /// Bytes handed out by content stores and sources together.
    pub fn served_bytes(&self) -> u64 {
        self.total_hit_bytes() + self.source_bytes
    }

    pub fn total_delay(&self) -> f64 {
        self.requests.iter().map(RequestRecord::delay_seconds).sum()
    }

    pub fn mean_delay(&self) -> f64 {
        if self.requests.is_empty() {
            0.0
        } else {
            self.total_delay() / self.requests.len() as f64
        }
    }

    /// `request_id,create_time,fulfill_time,delay`, ordered by request id.
    pub fn write_requests<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "request_id,create_time,fulfill_time,delay")?;
        let mut rows: Vec<&RequestRecord> = self.requests.iter().collect();
        rows.sort_by_key(|r| r.id);
        for r in rows {
            writeln!(
                out,
                "{},{:.9},{:.9},{:.9}",
                r.id,
                to_seconds(r.created),
                to_seconds(r.fulfilled),
                r.delay_seconds()
            )?;
        }
        Ok(())
    }

    /// `node,cache_hit_bytes` using node labels.
    pub fn write_hits<W: Write>(&self, mut out: W, labels: &[u32]) -> io::Result<()> {
        writeln!(out, "node,cache_hit_bytes")?;
        for (label, b) in labels.iter().zip(&self.hit_bytes) {
            writeln!(out, "{label},{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_csv() {
        let mut m = Metrics::new(2);
        m.requests.push(RequestRecord { id: 1, node: NodeId(0), object: ObjectId(0), created: 1_000, fulfilled: 5_000 });
        m.requests.push(RequestRecord { id: 0, node: NodeId(1), object: ObjectId(0), created: 0, fulfilled: 2_000_000_000 });
        let mut buf = Vec::new();
        m.write_requests(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "request_id,create_time,fulfill_time,delay");
        assert_eq!(lines[1], "0,0.000000000,2.000000000,2.000000000");
        assert_eq!(lines[2], "1,0.000001000,0.000005000,0.000004000");
        assert!((m.mean_delay() - (2.0 + 4e-6) / 2.0).abs() < 1e-12);
    }
}
