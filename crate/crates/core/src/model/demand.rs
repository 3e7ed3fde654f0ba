use super::ids::{NodeId, ObjectId};
use super::topology::split_sections;
use super::Topology;
use crate::error::{Error, Result};

/// Normalized Zipf weights with a precomputed cumulative table for
/// inverse-CDF sampling.
#[derive(Clone, Debug)]
pub struct ZipfTable {
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl ZipfTable {
    pub fn new(objects: usize, exponent: f64) -> Self {
        assert!(objects > 0, "empty catalog");
        let weights: Vec<f64> = (1..=objects).map(|r| (r as f64).powf(-exponent)).collect();
        let total: f64 = weights.iter().sum();
        let pmf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = pmf
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        *cdf.last_mut().expect("non-empty") = 1.0;
        Self { pmf, cdf }
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// Maps a uniform draw in `[0, 1)` to an object.
    pub fn sample(&self, u: f64) -> ObjectId {
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        ObjectId::from_index(i)
    }
}

/// Per-node Poisson request rates and object popularity.
#[derive(Clone, Debug)]
pub struct DemandModel {
    per_node_rate: Vec<f64>,
    popularity: ZipfTable,
    zipf_exponent: f64,
}

impl DemandModel {
    pub fn new(per_node_rate: Vec<f64>, objects: usize, zipf_exponent: f64) -> Result<Self> {
        if let Some(r) = per_node_rate.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::Demand(format!("rate {r} is not a nonnegative number")));
        }
        if objects == 0 {
            return Err(Error::Demand("catalog is empty".into()));
        }
        if !(zipf_exponent >= 0.0 && zipf_exponent.is_finite()) {
            return Err(Error::Demand(format!("zipf parameter {zipf_exponent} must be nonnegative")));
        }
        Ok(Self { per_node_rate, popularity: ZipfTable::new(objects, zipf_exponent), zipf_exponent })
    }

    /// Same rate at every node of `topology`.
    pub fn uniform(topology: &Topology, rate: f64, zipf_exponent: f64) -> Result<Self> {
        Self::new(vec![rate; topology.node_count()], topology.object_count(), zipf_exponent)
    }

    pub fn node_count(&self) -> usize {
        self.per_node_rate.len()
    }

    pub fn rate(&self, n: NodeId) -> f64 {
        self.per_node_rate[n.index()]
    }

    pub fn rates(&self) -> &[f64] {
        &self.per_node_rate
    }

    pub fn popularity(&self) -> &[f64] {
        self.popularity.pmf()
    }

    pub fn zipf(&self) -> &ZipfTable {
        &self.popularity
    }

    pub fn zipf_exponent(&self) -> f64 {
        self.zipf_exponent
    }

    /// Long-run request rate `lambda_n^k = lambda_n * p_k`.
    pub fn object_rate(&self, n: NodeId, k: ObjectId) -> f64 {
        self.per_node_rate[n.index()] * self.popularity.pmf()[k.index()]
    }
}

/// A parsed demand file: `node lambda` lines plus `zipf s`, `objects K`
/// and `all lambda` directives.
#[derive(Clone, Debug, Default)]
pub struct DemandFile {
    pub rates: Vec<(u32, f64, usize)>,
    pub all: Option<f64>,
    pub zipf: Option<f64>,
    pub objects: Option<usize>,
}

impl DemandFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut file = DemandFile::default();
        for section in split_sections(text)? {
            if !section.name.is_empty() && section.name != "demand" {
                return Err(Error::parse(section.header_line, format!("unexpected section `[{}]` in demand file", section.name)));
            }
            for &(line, text) in &section.lines {
                let toks: Vec<&str> = text.split_whitespace().collect();
                let [key, value] = toks.as_slice() else {
                    return Err(Error::parse(line, "expected two fields"));
                };
                let num = |what: &str| value.parse::<f64>().map_err(|_| Error::parse(line, format!("invalid {what} `{value}`")));
                match *key {
                    "zipf" => file.zipf = Some(num("zipf parameter")?),
                    "objects" => {
                        file.objects = Some(value.parse().map_err(|_| Error::parse(line, format!("invalid object count `{value}`")))?)
                    }
                    "all" => file.all = Some(num("rate")?),
                    node => {
                        let node = node.parse().map_err(|_| Error::parse(line, format!("unknown directive `{node}`")))?;
                        file.rates.push((node, num("rate")?, line));
                    }
                }
            }
        }
        Ok(file)
    }

    pub fn resolve(&self, topology: &Topology) -> Result<DemandModel> {
        if let Some(k) = self.objects {
            if k != topology.object_count() {
                return Err(Error::Demand(format!("demand declares {k} objects, topology has {}", topology.object_count())));
            }
        }
        let mut rates = vec![self.all.unwrap_or(0.0); topology.node_count()];
        for &(label, rate, line) in &self.rates {
            let n = topology.node_by_label(label).ok_or_else(|| Error::parse(line, format!("unknown node {label}")))?;
            rates[n.index()] = rate;
        }
        DemandModel::new(rates, topology.object_count(), self.zipf.unwrap_or(0.75))
    }
}
