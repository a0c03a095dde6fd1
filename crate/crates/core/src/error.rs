//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node type name must be non-empty")]
    EmptyTypeName,

    #[error("unknown node type: {0}")]
    UnknownNodeType(String),

    #[error("unknown node: {0}")]
    UnknownNode(String),

    #[error("duplicate node id: {0}")]
    DuplicateNode(String),

    #[error("edge {src} -> {dst}: node types ({actual_start}, {actual_end}) do not match edge type '{edge_type}' ({expected_start}, {expected_end})")]
    EdgeTypeMismatch {
        src: String,
        dst: String,
        edge_type: String,
        expected_start: String,
        expected_end: String,
        actual_start: String,
        actual_end: String,
    },

    #[error("negative edge weight {weight} on edge {src} -> {dst}")]
    NegativeWeight {
        src: String,
        dst: String,
        weight: f64,
    },

    #[error("no weight for edge type: {0}")]
    MissingEdgeTypeWeight(String),

    #[error("edge type name is ambiguous in this graph: {0}")]
    AmbiguousEdgeTypeName(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("partition does not cover these nodes: {0}")]
    PartitionMissingNodes(String),

    #[error("duplicate node in partition file: {0}")]
    PartitionDuplicateNode(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("user not found in listening history: {0}")]
    UserNotInHistory(String),

    #[error("unknown community detection algorithm '{given}', supported: {supported}")]
    UnknownAlgorithm { given: String, supported: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
