//! Immutable problem description: topology, object catalog, demand and
//! seeded request generation.

pub mod builtin;
mod catalog;
mod demand;
mod ids;
mod requests;
pub mod rng;
mod routing;
mod topology;

pub use catalog::Catalog;
pub use demand::{DemandFile, DemandModel, ZipfTable};
pub use ids::{LinkId, NodeId, ObjectId};
pub use requests::{generate_requests, Request, RequestStream, SlotArrivals};
pub use routing::{shortest_path_next_hops, NextHops};
pub(crate) use topology::{parse_bytes, split_sections};
pub use topology::{load_topology, parse_capacity, AllowedLinks, Link, SourceSpec, Topology, TopologyFile};
