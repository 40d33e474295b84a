//! Continuous subgraph matching over dynamic labeled graphs.
//!
//! The crate separates three concerns: graph and query representation
//! ([`graph`], [`query`]), incremental matching strategies behind a common
//! framework ([`ivm`], [`algo`]), and the tooling around them — a brute-force
//! oracle for correctness checks ([`oracle`]), candidate-space analysis
//! ([`analysis`]), workload generation ([`workload`]) and the benchmark
//! driver ([`bench`]).

pub mod algo;
pub mod analysis;
pub mod bench;
pub mod candidates;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod ivm;
pub mod join;
pub mod metrics;
pub mod oracle;
pub mod query;
pub mod workload;

pub use error::{Error, Result};
