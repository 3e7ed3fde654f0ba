use std::collections::BTreeMap;

use super::baseline::{Baseline, Bias, Fifo, Fixp, Lce, Lfu, Lru, Unif};
use super::vip::{CacheScore, VipCount, VipFlow};
use super::{NoCache, Policy, ShortestPath, VirtualCaching};
use crate::error::{Error, Result};

/// Sizes and knobs a policy factory may need.
#[derive(Clone, Debug)]
pub struct PolicyParams {
    pub node_count: usize,
    pub object_count: usize,
    pub fixp_probability: f64,
}

impl PolicyParams {
    pub fn new(node_count: usize, object_count: usize) -> Self {
        Self { node_count, object_count, fixp_probability: 0.75 }
    }
}

type Factory = Box<dyn Fn(&PolicyParams) -> Policy + Send + Sync>;

/// Name → policy factory.
pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self { factories: BTreeMap::new() }
    }

    /// All shipped policies.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("vip-alg2", |_| Policy {
            id: "vip-alg2".into(),
            forwarding: Box::new(VipFlow),
            caching: Box::new(CacheScore),
            virtual_plane: Some(VirtualCaching::MirrorActual),
        });
        for id in ["vip-alg1", "alg1-actual-caching"] {
            r.register(id, move |_| Policy {
                id: id.into(),
                forwarding: Box::new(VipFlow),
                caching: Box::new(VipCount),
                virtual_plane: Some(VirtualCaching::MaxWeight),
            });
        }
        type Replacement = fn(&PolicyParams) -> Box<dyn super::baseline::ReplacementRule>;
        let replacements: [(&str, Replacement); 4] = [
            ("lru", |p| Box::new(Lru::new(p.node_count))),
            ("fifo", |p| Box::new(Fifo::new(p.node_count))),
            ("unif", |_| Box::new(Unif)),
            ("bias", |_| Box::new(Bias)),
        ];
        for (name, make) in replacements {
            let id = format!("lce-{name}");
            r.register(&id.clone(), move |p| Policy {
                id: id.clone(),
                forwarding: Box::new(ShortestPath),
                caching: Box::new(Baseline::new(Box::new(Lce), make(p), p.node_count, p.object_count)),
                virtual_plane: None,
            });
            let id = format!("fixp-{name}");
            r.register(&id.clone(), move |p| Policy {
                id: id.clone(),
                forwarding: Box::new(ShortestPath),
                caching: Box::new(Baseline::new(
                    Box::new(Fixp { probability: p.fixp_probability }),
                    make(p),
                    p.node_count,
                    p.object_count,
                )),
                virtual_plane: None,
            });
        }
        r.register("lfu", |p| Policy {
            id: "lfu".into(),
            forwarding: Box::new(ShortestPath),
            caching: Box::new(Lfu::new(p.node_count, p.object_count)),
            virtual_plane: None,
        });
        r.register("nocache", |_| Policy {
            id: "nocache".into(),
            forwarding: Box::new(ShortestPath),
            caching: Box::new(NoCache),
            virtual_plane: None,
        });
        r
    }

    pub fn register(&mut self, name: &str, factory: impl Fn(&PolicyParams) -> Policy + Send + Sync + 'static) {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn build(&self, name: &str, params: &PolicyParams) -> Result<Policy> {
        let f = self.factories.get(name).ok_or_else(|| Error::UnknownPolicy(name.to_string()))?;
        Ok(f(params))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories.keys().map(String::as_str)
    }
}
