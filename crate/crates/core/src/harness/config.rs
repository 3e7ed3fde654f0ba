use std::path::{Path, PathBuf};

use crate::actual::SimConfig;
use crate::error::{Error, Result};
use crate::model::{parse_bytes, split_sections};
use crate::model::{builtin, Catalog, NodeId, Topology, TopologyFile};
use crate::vip::Bias;

/// How node read rates `r_n` are chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReadRate {
    /// Whatever the topology file says.
    FromTopology,
    Fixed(f64),
    /// The node's total outgoing VIP rate per slot.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Requesters {
    All,
    Nodes(Vec<u32>),
}

/// One experiment: a topology, a catalog, a demand sweep, a set of policies
/// and seeds, and the plane clocks.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub topology_name: String,
    pub topology: TopologyFile,
    pub catalog: Catalog,
    /// Cache size in whole objects at every caching node, overriding the
    /// topology file.
    pub cache_objects: Option<u64>,
    pub read_rate: ReadRate,
    pub lambdas: Vec<f64>,
    pub zipf: f64,
    pub requesters: Requesters,
    pub policies: Vec<String>,
    pub seeds: Vec<u64>,
    pub sim: SimConfig,
    pub fixp_probability: f64,
    pub count_requester_hits: bool,
    pub output: Option<PathBuf>,
}

/// Parameters of the reduced desk-scale profile.
pub const SCALE_OBJECTS: usize = 100;
pub const SCALE_CHUNKS: u32 = 10;
pub const SCALE_DURATION: f64 = 10.0;
pub const SCALE_CACHE_OBJECTS: u64 = 20;

fn builtin_topology(name: &str) -> Option<(String, Requesters)> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let arg = |d: u32| arg.map_or(Some(d), |a| a.parse().ok());
    match base {
        "abilene" => Some((builtin::abilene_text(), Requesters::All)),
        "geant" => Some((builtin::geant_text(), Requesters::All)),
        "tree" => {
            let d = arg(3)?;
            Some((builtin::tree_text(d), Requesters::Nodes(builtin::tree_leaves(d))))
        }
        "service" => {
            let c = arg(4)?;
            Some((builtin::service_text(c), Requesters::Nodes(builtin::service_consumers(c))))
        }
        _ => None,
    }
}

fn list<T>(line: usize, v: &str, f: impl Fn(&str) -> Option<T>) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f(s).ok_or_else(|| Error::parse(line, format!("invalid list item `{s}`"))))
        .collect()
}

fn number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::parse(line, format!("`{key}` needs a number, got `{v}`")))
}

fn seeds(line: usize, v: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = v.split_once('-') {
        let (a, b): (u64, u64) = (
            a.trim().parse().map_err(|_| Error::parse(line, "bad seed range"))?,
            b.trim().parse().map_err(|_| Error::parse(line, "bad seed range"))?,
        );
        if b < a {
            return Err(Error::parse(line, "empty seed range"));
        }
        return Ok((a..=b).collect());
    }
    list(line, v, |s| s.parse().ok())
}

impl ExperimentConfig {
    /// Parses a config file. Relative `topology` and `output` paths resolve
    /// against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let defaults = SimConfig::default();
        let mut cfg = ExperimentConfig {
            topology_name: "inline".into(),
            topology: TopologyFile::default(),
            catalog: Catalog::paper_default(),
            cache_objects: None,
            read_rate: ReadRate::FromTopology,
            lambdas: Vec::new(),
            zipf: 0.75,
            requesters: Requesters::All,
            policies: vec!["vip-alg2".into()],
            seeds: vec![1],
            sim: defaults,
            fixp_probability: 0.75,
            count_requester_hits: true,
            output: None,
        };
        let mut topology_key: Option<(usize, String)> = None;
        let mut catalog_keys: Vec<(usize, String, String)> = Vec::new();
        let mut dag = false;
        let mut requesters: Option<Requesters> = None;
        let sections = split_sections(text)?;
        for section in &sections {
            if section.name != "experiment" {
                if section.name.is_empty() {
                    if let Some((line, _)) = section.lines.first() {
                        return Err(Error::parse(*line, "content before the first section header"));
                    }
                }
                continue;
            }
            for &(line, body) in &section.lines {
                let (key, value) = body
                    .split_once('=')
                    .map(|(k, v)| (k.trim(), v.trim()))
                    .ok_or_else(|| Error::parse(line, "expected `key = value`"))?;
                match key {
                    "topology" => topology_key = Some((line, value.to_string())),
                    "policy" | "policies" => cfg.policies = list(line, value, |s| Some(s.to_string()))?,
                    "lambda" | "lambdas" => cfg.lambdas = list(line, value, |s| s.parse().ok().filter(|x: &f64| *x >= 0.0))?,
                    "seeds" | "seed" => cfg.seeds = seeds(line, value)?,
                    "duration" => cfg.sim.duration = number(line, key, value)?,
                    "slot" => cfg.sim.slot_seconds = number(line, key, value)?,
                    "step" => cfg.sim.step_seconds = number(line, key, value)?,
                    "window" => cfg.sim.window = number(line, key, value)? as usize,
                    "propagation" => cfg.sim.propagation_seconds = number(line, key, value)?,
                    "max_events" => cfg.sim.max_events = number(line, key, value)? as u64,
                    "zipf" => cfg.zipf = number(line, key, value)?,
                    "fixp" => cfg.fixp_probability = number(line, key, value)?,
                    "objects" | "chunks" | "chunk_size" | "interest_size" => {
                        catalog_keys.push((line, key.to_string(), value.to_string()))
                    }
                    "cache_objects" => cfg.cache_objects = Some(number(line, key, value)? as u64),
                    "read_rate" => {
                        cfg.read_rate = match value {
                            "auto" => ReadRate::Auto,
                            "topology" => ReadRate::FromTopology,
                            v => ReadRate::Fixed(number(line, key, v)?),
                        }
                    }
                    "bias" => {
                        cfg.sim.bias = match value {
                            "hop" | "hops" | "on" => Bias::HopCount,
                            "none" | "off" => Bias::None,
                            _ => return Err(Error::parse(line, "bias is `hop` or `none`")),
                        }
                    }
                    "requesters" => {
                        requesters = Some(if value == "all" {
                            Requesters::All
                        } else {
                            Requesters::Nodes(list(line, value, |s| s.parse().ok())?)
                        })
                    }
                    "allowed" => match value {
                        "dag" => dag = true,
                        "all" => dag = false,
                        _ => return Err(Error::parse(line, "allowed is `all` or `dag`")),
                    },
                    "count_requester_hits" => {
                        cfg.count_requester_hits = value.parse().map_err(|_| Error::parse(line, "expected true or false"))?
                    }
                    "trace" => cfg.sim.record_trace = value.parse().map_err(|_| Error::parse(line, "expected true or false"))?,
                    "output" => cfg.output = Some(base.join(value)),
                    other => return Err(Error::parse(line, format!("unknown experiment key `{other}`"))),
                }
            }
        }
        let mut file = match &topology_key {
            Some((line, name)) => {
                if let Some((text, req)) = builtin_topology(name) {
                    cfg.topology_name = name.clone();
                    cfg.requesters = req;
                    TopologyFile::parse(&text)?
                } else {
                    let path = base.join(name);
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::parse(*line, format!("cannot read topology `{}`: {e}", path.display())))?;
                    cfg.topology_name = path.file_stem().map_or(name.clone(), |s| s.to_string_lossy().into_owned());
                    TopologyFile::parse(&text)?
                }
            }
            None => TopologyFile::default(),
        };
        for s in sections.iter().filter(|s| !s.name.is_empty() && s.name != "experiment") {
            file.absorb(s)?;
        }
        if dag {
            for s in split_sections("[allowed]\ndag\n")? {
                file.absorb(&s)?;
            }
        }
        if let Some(r) = requesters {
            cfg.requesters = r;
        }
        let mut catalog = file.catalog()?;
        for (line, key, value) in catalog_keys {
            let bad = || Error::parse(line, format!("invalid `{key}` value `{value}`"));
            catalog = match key.as_str() {
                "objects" => catalog.with_object_count(value.parse().map_err(|_| bad())?)?,
                "chunks" => catalog.with_chunks_per_object(value.parse().map_err(|_| bad())?)?,
                "chunk_size" => Catalog::new(
                    catalog.object_count(),
                    catalog.chunks_per_object(),
                    parse_bytes(&value).ok_or_else(bad)?,
                    catalog.interest_bits() / 8,
                )?,
                _ => Catalog::new(
                    catalog.object_count(),
                    catalog.chunks_per_object(),
                    catalog.chunk_bits() / 8,
                    parse_bytes(&value).ok_or_else(bad)?,
                )?,
            };
        }
        cfg.catalog = catalog;
        cfg.topology = file;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Switches to the reduced desk-scale profile.
    pub fn apply_scale(&mut self) -> Result<()> {
        self.catalog = self.catalog.clone().with_object_count(SCALE_OBJECTS)?.with_chunks_per_object(SCALE_CHUNKS)?;
        self.sim.duration = SCALE_DURATION;
        self.cache_objects = Some(SCALE_CACHE_OBJECTS);
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.lambdas.is_empty() {
            return Err(Error::Config("the lambda sweep is empty".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds given".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("no policy given".into()));
        }
        if !(0.0..=1.0).contains(&self.fixp_probability) {
            return Err(Error::Config("fixp must lie in [0, 1]".into()));
        }
        if !(self.zipf >= 0.0) {
            return Err(Error::Config("zipf exponent must be nonnegative".into()));
        }
        Ok(())
    }

    /// Topology for one seed: sources placed, caches sized, read rates set.
    pub fn build_topology(&self, seed: u64) -> Result<Topology> {
        let mut file = self.topology.clone();
        if let Some(c) = self.cache_objects {
            file.resize_caches(c, self.catalog.object_bits() / 8);
        }
        if let ReadRate::Fixed(r) = self.read_rate {
            file.set_read_rates(r);
        }
        let topo = file.build_with(self.catalog.clone(), seed)?;
        if self.read_rate == ReadRate::Auto {
            let rates = topo
                .nodes()
                .map(|n| topo.out_links(n).iter().map(|&l| topo.vip_rate(topo.reverse(l), self.sim.slot_seconds)).sum())
                .collect();
            return topo.with_read_rates(rates);
        }
        Ok(topo)
    }

    /// Per-node request rates for sweep point `lambda`.
    pub fn node_rates(&self, topology: &Topology, lambda: f64) -> Result<Vec<f64>> {
        let mut rates = vec![0.0; topology.node_count()];
        match &self.requesters {
            Requesters::All => rates.iter_mut().for_each(|r| *r = lambda),
            Requesters::Nodes(labels) => {
                for &l in labels {
                    let n: NodeId = topology.node_by_label(l).ok_or_else(|| Error::Config(format!("unknown requester node {l}")))?;
                    rates[n.index()] = lambda;
                }
            }
        }
        Ok(rates)
    }
}
