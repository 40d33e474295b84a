//! Error taxonomy shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: parse error: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown vertex {0}")]
    UnknownVertex(u64),

    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u64),

    #[error("self-loop on vertex {0} rejected")]
    SelfLoop(u64),

    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(u64, u64),

    #[error("edge ({0}, {1}) with label {2} not present")]
    MissingEdge(u64, u64, u32),

    #[error("vertex {id} has label {actual}, update supplies {supplied}; relabeling requires an isolated vertex")]
    LabelMismatch { id: u64, actual: u32, supplied: u32 },

    #[error("query graph must be connected")]
    DisconnectedQuery,

    #[error("query has no edges; streams of edge updates cannot change its matches")]
    EdgelessQuery,

    #[error("query is not a tree (required by {0})")]
    NotATree(&'static str),

    #[error("strategy {algo} does not support {op}")]
    Capability { algo: &'static str, op: &'static str },

    #[error("instance exceeds oracle size guard (|V(Q)| <= {max_q}, |V(G)| <= {max_g})")]
    SizeGuard { max_q: usize, max_g: usize },

    #[error("out of memory (index): cached tuple cap {cap} exceeded")]
    OutOfMemoryIndex { cap: usize },

    #[error("workload generation failed: {0}")]
    Workload(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
