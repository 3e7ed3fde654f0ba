use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use super::ids::{LinkId, NodeId, ObjectId};
use super::rng::{self, Purpose};
use super::Catalog;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity_bps: f64,
}

/// Resolved per-object link permissions.
#[derive(Clone, Debug, PartialEq)]
pub enum AllowedLinks {
    /// Every object may use every link.
    All,
    /// Object `k` may use `(a,b)` only if `b` is one hop closer to `src(k)`.
    ShortestPathDag,
    /// Per-object link masks; `None` means unrestricted.
    Explicit(Vec<Option<Vec<bool>>>),
}

/// How content sources were declared in a topology file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceSpec {
    pub explicit: Vec<(u32, u32, usize)>,
    pub fallback: Option<SourceFallback>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SourceFallback {
    /// Every undeclared object lives at this node.
    All(u32),
    /// Undeclared objects are placed independently and uniformly at random.
    /// Without a seed, the build seed is used.
    Uniform(Option<u64>),
}

/// A parsed but not yet validated topology file.
#[derive(Clone, Debug, Default)]
pub struct TopologyFile {
    catalog: CatalogOverrides,
    nodes: Vec<(u32, usize)>,
    links: Vec<(u32, u32, f64, usize)>,
    caches: Vec<(u32, u64, f64, usize)>,
    cache_default: Option<(u64, f64)>,
    pub sources: SourceSpec,
    allowed_dag: bool,
    allowed: Vec<(u32, u32, u32, usize)>,
}

#[derive(Clone, Debug, Default)]
struct CatalogOverrides {
    objects: Option<usize>,
    chunks: Option<u32>,
    object_bytes: Option<u64>,
    chunk_bytes: Option<u64>,
    interest_bytes: Option<u64>,
}

/// Connected, symmetric network with caches, sources and per-object link
/// permissions. Immutable once built.
#[derive(Clone, Debug)]
pub struct Topology {
    labels: Vec<u32>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    in_links: Vec<Vec<LinkId>>,
    reverse: Vec<LinkId>,
    cache_bits: Vec<u64>,
    read_rate: Vec<f64>,
    catalog: Catalog,
    sources: Vec<NodeId>,
    allowed: AllowedLinks,
    hops: Vec<Vec<u32>>,
}

pub(crate) struct Section<'a> {
    pub name: String,
    pub header_line: usize,
    pub lines: Vec<(usize, &'a str)>,
}

/// Splits line-oriented text into `[section]` blocks. Comments start with
/// `#`; lines before the first header land in an unnamed section.
pub(crate) fn split_sections(text: &str) -> Result<Vec<Section<'_>>> {
    let mut out = vec![Section { name: String::new(), header_line: 0, lines: Vec::new() }];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::parse(line_no, format!("malformed section header `{line}`")))?;
            out.push(Section { name: name.trim().to_ascii_lowercase(), header_line: line_no, lines: Vec::new() });
        } else {
            out.last_mut().expect("non-empty").lines.push((line_no, line));
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::parse(line, format!("invalid {what} `{tok}`")))
}

fn split_suffix(tok: &str) -> (&str, &str) {
    let at = tok
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '-' || c == '+'))
        .unwrap_or(tok.len());
    // "5e3" is a number, "5Ebps" is not a thing we support, so this is fine.
    (&tok[..at], &tok[at..])
}

/// Parses a link capacity such as `500Mbps`, `1.5Gbps` or `1e6` (bits/s).
pub fn parse_capacity(tok: &str) -> Option<f64> {
    let (num, unit) = split_suffix(tok);
    let value: f64 = num.parse().ok()?;
    let scale = match unit.to_ascii_lowercase().as_str() {
        "" | "bps" => 1.0,
        "k" | "kbps" => 1e3,
        "m" | "mbps" => 1e6,
        "g" | "gbps" => 1e9,
        _ => return None,
    };
    Some(value * scale)
}

/// Parses a byte count such as `5GB`, `50KB` or `125`.
pub(crate) fn parse_bytes(tok: &str) -> Option<u64> {
    let (num, unit) = split_suffix(tok);
    let value: f64 = num.parse().ok()?;
    let scale = match unit.to_ascii_lowercase().as_str() {
        "" | "b" => 1.0,
        "kb" => 1e3,
        "mb" => 1e6,
        "gb" => 1e9,
        _ => return None,
    };
    let v = value * scale;
    (v >= 0.0 && v.fract() == 0.0).then_some(v as u64)
}

impl TopologyFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = TopologyFile::default();
        for section in split_sections(text)? {
            file.absorb(&section)?;
        }
        Ok(file)
    }

    pub(crate) fn absorb(&mut self, section: &Section<'_>) -> Result<()> {
        match section.name.as_str() {
            "" => {
                if let Some((line, _)) = section.lines.first() {
                    return Err(Error::parse(*line, "content before the first section header"));
                }
            }
            "catalog" => {
                for &(line, text) in &section.lines {
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    if toks.len() != 2 {
                        return Err(Error::parse(line, "expected `key value`"));
                    }
                    let bytes = || parse_bytes(toks[1]).ok_or_else(|| Error::parse(line, format!("invalid size `{}`", toks[1])));
                    match toks[0] {
                        "objects" => self.catalog.objects = Some(parse_num(line, toks[1], "object count")?),
                        "chunks" => self.catalog.chunks = Some(parse_num(line, toks[1], "chunk count")?),
                        "object_size" => self.catalog.object_bytes = Some(bytes()?),
                        "chunk_size" => self.catalog.chunk_bytes = Some(bytes()?),
                        "interest_size" => self.catalog.interest_bytes = Some(bytes()?),
                        other => return Err(Error::parse(line, format!("unknown catalog key `{other}`"))),
                    }
                }
            }
            "nodes" => {
                for &(line, text) in &section.lines {
                    for tok in text.split_whitespace() {
                        self.nodes.push((parse_num(line, tok, "node id")?, line));
                    }
                }
            }
            "links" => {
                for &(line, text) in &section.lines {
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    if toks.len() != 3 {
                        return Err(Error::parse(line, "expected `a b capacity`"));
                    }
                    let cap = parse_capacity(toks[2])
                        .ok_or_else(|| Error::parse(line, format!("invalid capacity `{}`", toks[2])))?;
                    self.links.push((parse_num(line, toks[0], "node id")?, parse_num(line, toks[1], "node id")?, cap, line));
                }
            }
            "caches" => {
                for &(line, text) in &section.lines {
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    if toks.len() != 3 {
                        return Err(Error::parse(line, "expected `node bytes read_rate`"));
                    }
                    let bytes = parse_bytes(toks[1]).ok_or_else(|| Error::parse(line, format!("invalid cache size `{}`", toks[1])))?;
                    let rate: f64 = parse_num(line, toks[2], "read rate")?;
                    if !(rate >= 0.0 && rate.is_finite()) {
                        return Err(Error::parse(line, "read rate must be nonnegative"));
                    }
                    if toks[0] == "default" {
                        self.cache_default = Some((bytes, rate));
                    } else {
                        self.caches.push((parse_num(line, toks[0], "node id")?, bytes, rate, line));
                    }
                }
            }
            "sources" => {
                for &(line, text) in &section.lines {
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    match toks.as_slice() {
                        ["all", n] => self.sources.fallback = Some(SourceFallback::All(parse_num(line, n, "node id")?)),
                        ["uniform"] => self.sources.fallback = Some(SourceFallback::Uniform(None)),
                        ["uniform", s] => self.sources.fallback = Some(SourceFallback::Uniform(Some(parse_num(line, s, "seed")?))),
                        [k, n] => self.sources.explicit.push((parse_num(line, k, "object id")?, parse_num(line, n, "node id")?, line)),
                        _ => return Err(Error::parse(line, "expected `object node`, `all node` or `uniform [seed]`")),
                    }
                }
            }
            "allowed" => {
                for &(line, text) in &section.lines {
                    let toks: Vec<&str> = text.split_whitespace().collect();
                    match toks.as_slice() {
                        ["dag"] => self.allowed_dag = true,
                        [k, a, b] => self.allowed.push((
                            parse_num(line, k, "object id")?,
                            parse_num(line, a, "node id")?,
                            parse_num(line, b, "node id")?,
                            line,
                        )),
                        _ => return Err(Error::parse(line, "expected `dag` or `object a b`")),
                    }
                }
            }
            other => return Err(Error::parse(section.header_line, format!("unknown section `[{other}]`"))),
        }
        Ok(())
    }

    /// Catalog declared in the file, with unspecified fields taken from
    /// [`Catalog::paper_default`].
    pub fn catalog(&self) -> Result<Catalog> {
        let d = Catalog::paper_default();
        let c = &self.catalog;
        let chunk_bytes = c.chunk_bytes.unwrap_or(d.chunk_bits() / 8);
        let chunks = match (c.chunks, c.object_bytes) {
            (Some(n), Some(obj)) if obj != n as u64 * chunk_bytes => {
                return Err(Error::Topology(format!(
                    "object_size {obj} is not chunks {n} x chunk_size {chunk_bytes}"
                )))
            }
            (Some(n), _) => n,
            (None, Some(obj)) => {
                if obj % chunk_bytes != 0 {
                    return Err(Error::Topology(format!("object_size {obj} is not a multiple of chunk_size {chunk_bytes}")));
                }
                (obj / chunk_bytes) as u32
            }
            (None, None) => d.chunks_per_object(),
        };
        Catalog::new(
            c.objects.unwrap_or(d.object_count()),
            chunks,
            chunk_bytes,
            c.interest_bytes.unwrap_or(d.interest_bits() / 8),
        )
    }

    /// Replaces every nonzero cache size by `objects` whole objects.
    pub fn resize_caches(&mut self, objects: u64, object_bytes: u64) {
        let bytes = objects * object_bytes;
        for c in &mut self.caches {
            if c.1 > 0 {
                c.1 = bytes;
            }
        }
        if let Some(d) = &mut self.cache_default {
            if d.0 > 0 {
                d.0 = bytes;
            }
        }
    }

    /// Overrides every read rate, including the default.
    pub fn set_read_rates(&mut self, rate: f64) {
        for c in &mut self.caches {
            c.2 = rate;
        }
        if let Some(d) = &mut self.cache_default {
            d.1 = rate;
        }
    }

    pub fn build(&self, seed: u64) -> Result<Topology> {
        self.build_with(self.catalog()?, seed)
    }

    pub fn build_with(&self, catalog: Catalog, seed: u64) -> Result<Topology> {
        let mut label_set: BTreeSet<u32> = self.nodes.iter().map(|n| n.0).collect();
        for &(a, b, _, _) in &self.links {
            label_set.insert(a);
            label_set.insert(b);
        }
        if label_set.is_empty() {
            return Err(Error::Topology("no nodes declared".into()));
        }
        let labels: Vec<u32> = label_set.into_iter().collect();
        let lookup = |label: u32, line: usize| -> Result<NodeId> {
            labels
                .binary_search(&label)
                .map(NodeId::from_index)
                .map_err(|_| Error::parse(line, format!("unknown node {label}")))
        };

        let mut caps: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
        for &(a, b, cap, line) in &self.links {
            if a == b {
                return Err(Error::parse(line, format!("self-loop at node {a}")));
            }
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(Error::parse(line, format!("link ({a},{b}) needs a positive capacity")));
            }
            caps.insert((lookup(a, line)?, lookup(b, line)?), cap);
        }
        // Symmetric completion: a one-way declaration gets a reverse link
        // with the same capacity.
        let declared: Vec<((NodeId, NodeId), f64)> = caps.iter().map(|(k, v)| (*k, *v)).collect();
        for ((a, b), cap) in declared {
            caps.entry((b, a)).or_insert(cap);
        }

        let n = labels.len();
        let mut cache_bits = vec![self.cache_default.map_or(0, |c| c.0 * 8); n];
        let mut read_rate = vec![self.cache_default.map_or(0.0, |c| c.1); n];
        for &(node, bytes, rate, line) in &self.caches {
            let id = lookup(node, line)?;
            cache_bits[id.index()] = bytes * 8;
            read_rate[id.index()] = rate;
        }

        let k_total = catalog.object_count();
        let mut sources: Vec<Option<NodeId>> = vec![None; k_total];
        for &(obj, node, line) in &self.sources.explicit {
            if obj == 0 || obj as usize > k_total {
                return Err(Error::parse(line, format!("object {obj} outside 1..={k_total}")));
            }
            let slot = &mut sources[obj as usize - 1];
            if slot.is_some() {
                return Err(Error::parse(line, format!("object {obj} has more than one source")));
            }
            *slot = Some(lookup(node, line)?);
        }
        match &self.sources.fallback {
            Some(SourceFallback::All(node)) => {
                let id = lookup(*node, 0).map_err(|_| Error::Topology(format!("source node {node} is not in the graph")))?;
                for s in sources.iter_mut().filter(|s| s.is_none()) {
                    *s = Some(id);
                }
            }
            Some(SourceFallback::Uniform(fixed)) => {
                let mut r = rng::stream(fixed.unwrap_or(seed), Purpose::SourcePlacement, 0);
                for s in sources.iter_mut() {
                    let pick = NodeId::from_index(r.random_range(0..n));
                    if s.is_none() {
                        *s = Some(pick);
                    }
                }
            }
            None => {}
        }
        let sources = sources
            .into_iter()
            .enumerate()
            .map(|(k, s)| s.ok_or_else(|| Error::Topology(format!("object {} has no source", k + 1))))
            .collect::<Result<Vec<_>>>()?;

        let links: Vec<Link> = caps.iter().map(|(&(from, to), &capacity_bps)| Link { from, to, capacity_bps }).collect();

        let explicit = if self.allowed.is_empty() {
            None
        } else {
            let mut masks: Vec<Option<Vec<bool>>> = vec![None; k_total];
            for &(obj, a, b, line) in &self.allowed {
                if obj == 0 || obj as usize > k_total {
                    return Err(Error::parse(line, format!("object {obj} outside 1..={k_total}")));
                }
                let (a, b) = (lookup(a, line)?, lookup(b, line)?);
                let pos = links
                    .iter()
                    .position(|l| l.from == a && l.to == b)
                    .ok_or_else(|| Error::parse(line, format!("allowed link ({},{}) is not a link", labels[a.index()], labels[b.index()])))?;
                masks[obj as usize - 1].get_or_insert_with(|| vec![false; links.len()])[pos] = true;
            }
            Some(masks)
        };
        let allowed = match (self.allowed_dag, explicit) {
            (true, Some(_)) => return Err(Error::Topology("`dag` cannot be combined with explicit allowed links".into())),
            (true, None) => AllowedLinks::ShortestPathDag,
            (false, Some(m)) => AllowedLinks::Explicit(m),
            (false, None) => AllowedLinks::All,
        };

        Topology::assemble(labels, links, cache_bits, read_rate, catalog, sources, allowed, true)
    }
}

/// Parses and validates a topology file. `uniform` source placement
/// without an explicit seed uses seed 0.
pub fn load_topology(text: &str) -> Result<Topology> {
    TopologyFile::parse(text)?.build(0)
}

impl Topology {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        labels: Vec<u32>,
        links: Vec<Link>,
        cache_bits: Vec<u64>,
        read_rate: Vec<f64>,
        catalog: Catalog,
        sources: Vec<NodeId>,
        allowed: AllowedLinks,
        validate: bool,
    ) -> Result<Self> {
        let n = labels.len();
        let mut out_links = vec![Vec::new(); n];
        let mut in_links = vec![Vec::new(); n];
        for (i, l) in links.iter().enumerate() {
            out_links[l.from.index()].push(LinkId::from_index(i));
            in_links[l.to.index()].push(LinkId::from_index(i));
        }
        // Links are sorted by (from, to), so out_links is ascending in
        // destination; keep in_links ascending in origin too.
        for v in &mut in_links {
            v.sort_by_key(|l: &LinkId| links[l.index()].from);
        }
        let mut reverse = Vec::with_capacity(links.len());
        for l in &links {
            let r = links
                .iter()
                .position(|m| m.from == l.to && m.to == l.from)
                .ok_or_else(|| Error::Topology(format!("link ({},{}) has no reverse", labels[l.from.index()], labels[l.to.index()])))?;
            reverse.push(LinkId::from_index(r));
        }

        let mut hops = vec![vec![u32::MAX; n]; n];
        for (src, row) in hops.iter_mut().enumerate() {
            row[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &l in &out_links[u] {
                    let v = links[l.index()].to.index();
                    if row[v] == u32::MAX {
                        row[v] = row[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }

        let topo = Topology { labels, links, out_links, in_links, reverse, cache_bits, read_rate, catalog, sources, allowed, hops };
        if validate {
            topo.validate()?;
        }
        Ok(topo)
    }

    fn validate(&self) -> Result<()> {
        if let Some(v) = self.hops[0].iter().position(|&h| h == u32::MAX) {
            return Err(Error::Topology(format!("graph is disconnected: node {} unreachable from node {}", self.labels[v], self.labels[0])));
        }
        let kz = self.catalog.object_count() as u128 * self.catalog.object_bits() as u128;
        for (i, &bits) in self.cache_bits.iter().enumerate() {
            if bits as u128 >= kz {
                return Err(Error::Topology(format!(
                    "node {} cache of {} bits can hold the whole catalog ({} bits)",
                    self.labels[i], bits, kz
                )));
            }
        }
        Ok(())
    }

    /// Builds a topology without connectivity or cache-size validation.
    /// Meant for tests that exercise error paths downstream.
    #[doc(hidden)]
    pub fn unchecked(labels: Vec<u32>, links: Vec<(usize, usize, f64)>, catalog: Catalog, sources: Vec<usize>) -> Result<Self> {
        let n = labels.len();
        let mut links: Vec<Link> = links
            .into_iter()
            .map(|(a, b, c)| Link { from: NodeId::from_index(a), to: NodeId::from_index(b), capacity_bps: c })
            .collect();
        links.sort_by_key(|l| (l.from, l.to));
        Self::assemble(
            labels,
            links,
            vec![0; n],
            vec![0.0; n],
            catalog,
            sources.into_iter().map(NodeId::from_index).collect(),
            AllowedLinks::All,
            false,
        )
    }

    /// Replaces the per-node read rates `r_n`.
    pub fn with_read_rates(mut self, rates: Vec<f64>) -> Result<Self> {
        if rates.len() != self.labels.len() || rates.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::Topology("one nonnegative read rate per node is required".into()));
        }
        self.read_rate = rates;
        Ok(self)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len()).map(NodeId::from_index)
    }

    pub fn label(&self, n: NodeId) -> u32 {
        self.labels[n.index()]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn node_by_label(&self, label: u32) -> Option<NodeId> {
        self.labels.binary_search(&label).ok().map(NodeId::from_index)
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, l: LinkId) -> &Link {
        &self.links[l.index()]
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> {
        (0..self.links.len()).map(LinkId::from_index)
    }

    /// Outgoing links of `n`, ascending in destination.
    pub fn out_links(&self, n: NodeId) -> &[LinkId] {
        &self.out_links[n.index()]
    }

    /// Incoming links of `n`, ascending in origin.
    pub fn in_links(&self, n: NodeId) -> &[LinkId] {
        &self.in_links[n.index()]
    }

    pub fn reverse(&self, l: LinkId) -> LinkId {
        self.reverse[l.index()]
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.out_links[a.index()].iter().copied().find(|&l| self.links[l.index()].to == b)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn object_count(&self) -> usize {
        self.catalog.object_count()
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> {
        (0..self.catalog.object_count()).map(ObjectId::from_index)
    }

    pub fn cache_bits(&self, n: NodeId) -> u64 {
        self.cache_bits[n.index()]
    }

    /// Whole objects that fit in the cache of `n`.
    pub fn cache_slots(&self, n: NodeId) -> usize {
        (self.cache_bits[n.index()] / self.catalog.object_bits()) as usize
    }

    /// Read rate `r_n` in objects per virtual slot.
    pub fn read_rate(&self, n: NodeId) -> f64 {
        self.read_rate[n.index()]
    }

    pub fn source(&self, k: ObjectId) -> NodeId {
        self.sources[k.index()]
    }

    pub fn sources(&self) -> &[NodeId] {
        &self.sources
    }

    pub fn hops(&self, a: NodeId, b: NodeId) -> u32 {
        self.hops[a.index()][b.index()]
    }

    /// Hop count from `n` to the source of `k`.
    pub fn hops_to_source(&self, n: NodeId, k: ObjectId) -> u32 {
        self.hops[n.index()][self.sources[k.index()].index()]
    }

    pub fn allowed_links(&self) -> &AllowedLinks {
        &self.allowed
    }

    /// Whether object `k` may use link `l`.
    pub fn allows(&self, k: ObjectId, l: LinkId) -> bool {
        match &self.allowed {
            AllowedLinks::All => true,
            AllowedLinks::ShortestPathDag => {
                let link = &self.links[l.index()];
                let src = self.sources[k.index()].index();
                let (ha, hb) = (self.hops[link.from.index()][src], self.hops[link.to.index()][src]);
                hb != u32::MAX && hb + 1 == ha
            }
            AllowedLinks::Explicit(masks) => masks[k.index()].as_ref().is_none_or(|m| m[l.index()]),
        }
    }

    /// VIPs per slot that link `(a,b)` may carry: the reverse capacity
    /// `C_ba` times the slot length, in objects.
    pub fn vip_rate(&self, l: LinkId, slot_seconds: f64) -> f64 {
        let rev = &self.links[self.reverse[l.index()].index()];
        rev.capacity_bps * slot_seconds / self.catalog.object_bits() as f64
    }
}
