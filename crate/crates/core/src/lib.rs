//! Learns per-edge-type usefulness weights (ETUD) for heterogeneous networks
//! with a genetic algorithm, projects the network to a weighted homogeneous
//! graph, detects communities, and evaluates partitions with searching-cost
//! and NDCG metrics.

pub mod community;
pub mod error;
pub mod ga;
pub mod hetnet;
pub mod metrics;
pub mod ppr;
pub mod synth;

pub use error::{Error, Result};
pub use hetnet::{Etud, HeteroGraph, HomoGraph, NodeId};
