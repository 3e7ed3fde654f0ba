use super::ids::{LinkId, NodeId, ObjectId};
use super::Topology;
use crate::error::{Error, Result};

/// Shortest-path next hops toward each object's source. Computed once per
/// distinct source node; ties are ordered by ascending node id.
#[derive(Clone, Debug)]
pub struct NextHops {
    sources: Vec<NodeId>,
    /// `by_source[src][n]` lists the out-links of `n` that lie on a shortest
    /// path to `src`.
    by_source: Vec<Option<Vec<Vec<LinkId>>>>,
    hops: Vec<Vec<u32>>,
}

pub fn shortest_path_next_hops(topology: &Topology) -> Result<NextHops> {
    let n = topology.node_count();
    let mut by_source: Vec<Option<Vec<Vec<LinkId>>>> = vec![None; n];
    let mut hops = vec![Vec::new(); n];
    for (k, &src) in topology.sources().iter().enumerate() {
        if by_source[src.index()].is_some() {
            continue;
        }
        let dist: Vec<u32> = topology.nodes().map(|v| topology.hops(v, src)).collect();
        if let Some(v) = dist.iter().position(|&d| d == u32::MAX) {
            return Err(Error::Unreachable { node: topology.labels()[v], object: k as u32 + 1 });
        }
        let table = topology
            .nodes()
            .map(|v| {
                topology
                    .out_links(v)
                    .iter()
                    .copied()
                    .filter(|&l| dist[topology.link(l).to.index()] + 1 == dist[v.index()])
                    .collect()
            })
            .collect();
        by_source[src.index()] = Some(table);
        hops[src.index()] = dist;
    }
    Ok(NextHops { sources: topology.sources().to_vec(), by_source, hops })
}

impl NextHops {
    /// Hop count `h_n^k` from `n` to `src(k)`.
    pub fn hops(&self, n: NodeId, k: ObjectId) -> u32 {
        self.hops[self.sources[k.index()].index()][n.index()]
    }

    /// Ordered next-hop links; empty at the source itself.
    pub fn next_hops(&self, n: NodeId, k: ObjectId) -> &[LinkId] {
        let src = self.sources[k.index()];
        &self.by_source[src.index()].as_ref().expect("computed for every source")[n.index()]
    }

    /// First (lowest node id) shortest-path next hop.
    pub fn first(&self, n: NodeId, k: ObjectId) -> Option<LinkId> {
        self.next_hops(n, k).first().copied()
    }
}
