//! Benchmark cells: initialize a strategy offline on the initial graph,
//! drive the update stream through it, and fold the outcome into a metrics
//! row. Grid drivers compose cells; each cell owns its graph and strategy
//! copies, so cells can run on separate workers without shared state.

use std::time::{Duration, Instant};

use crate::enumerate::Semantics;
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, UpdateStream, VertexMap};
use crate::ivm::{run_stream, CsmStrategy, MatchEvent, RunConfig};
use crate::metrics::{p95, RunMetrics, Status, HARD_UNSOLVED_THRESHOLD};
use crate::query::QueryGraph;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub semantics: Semantics,
    pub time_limit: Option<Duration>,
    /// Early-termination limit per update batch.
    pub max_results: Option<u64>,
    /// Result-count threshold separating unsolved from hard-unsolved.
    pub hard_threshold: u64,
}

impl BenchConfig {
    pub fn new(semantics: Semantics) -> Self {
        Self {
            semantics,
            time_limit: None,
            max_results: None,
            hard_threshold: HARD_UNSOLVED_THRESHOLD,
        }
    }
}

/// Runs one (query, strategy) cell and reports its metrics row. The graph
/// and vertex map evolve in place, so after the call they reflect the end
/// of the stream; grid drivers hand each cell its own clones. Index-cap
/// blowups — during offline construction or mid-stream — become
/// out-of-memory rows rather than errors; capability mismatches and
/// malformed streams still fail the cell.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    query_id: &str,
    q: &QueryGraph,
    g: &mut LabeledGraph,
    map: &mut VertexMap,
    stream: &UpdateStream,
    strategy: &mut dyn CsmStrategy,
    cfg: &BenchConfig,
    on_match: &mut dyn FnMut(MatchEvent<'_>),
) -> Result<RunMetrics> {
    let t0 = Instant::now();
    let init = strategy.initialize(q, g);
    let offline = t0.elapsed();
    let mut row = RunMetrics {
        query_id: query_id.to_string(),
        algo: strategy.name().to_string(),
        status: Status::Solved,
        offline,
        index_time: Duration::ZERO,
        enum_time: Duration::ZERO,
        results: 0,
        emp: 0,
        vis: 0,
        inv: 0,
        candidates_total: 0,
        p95_update: Duration::ZERO,
        peak_cached: None,
    };
    if let Err(e) = init {
        return match e {
            Error::OutOfMemoryIndex { .. } => {
                row.status = Status::OutOfMemory;
                row.candidates_total = strategy.candidate_total(q, g);
                row.peak_cached = strategy.cached_tuples();
                Ok(row)
            }
            other => Err(other),
        };
    }

    let run_cfg = RunConfig {
        semantics: cfg.semantics,
        max_results: cfg.max_results,
        time_limit: cfg.time_limit,
    };
    let out = run_stream(q, g, map, stream, strategy, &run_cfg, on_match)?;
    row.status = Status::classify(out.status, out.counters.results, cfg.hard_threshold);
    row.index_time = out.index_time;
    row.enum_time = out.enum_time;
    row.results = out.counters.results;
    row.emp = out.counters.emp;
    row.vis = out.counters.vis;
    row.inv = out.counters.inv();
    row.candidates_total = strategy.candidate_total(q, g);
    row.p95_update = p95(&out.per_update);
    row.peak_cached = strategy.cached_tuples();
    Ok(row)
}
