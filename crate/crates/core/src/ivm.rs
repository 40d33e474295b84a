//! The common incremental-matching skeleton shared by all strategies.
//!
//! A strategy plugs into a fixed update loop: insertions are applied to the
//! graph, then the strategy's index is updated, then new matches are
//! enumerated; deletions are enumerated first (against the pre-deletion
//! state), then applied, then the index is updated. Mixed batches are
//! normalized into a deletion phase followed by an insertion phase, with
//! updates present in both cancelled out.
//!
//! Per batch, the delta is decomposed by canonical query edge: a match is
//! reported at position k when it uses an updated tuple on edge k and no
//! updated tuple on any later edge, which makes the per-position result sets
//! disjoint and their union the exact match-set difference.

use std::time::{Duration, Instant};

use crate::enumerate::{Counters, EnumerationConfig, ExclusionSet, Outcome};
use crate::error::{Error, Result};
use crate::graph::{
    EdgeUpdate, Label, LabeledGraph, UpdateBatch, UpdateOp, UpdateStream, VertexId, VertexMap,
};
use crate::query::QueryGraph;

/// Per-strategy feature flags. Batches are never refused: the framework
/// splits them for strategies that cannot consume them natively.
#[derive(Debug, Clone, Copy)]
pub struct Capabilities {
    pub edge_insert: bool,
    pub edge_delete: bool,
    pub batch: bool,
    pub early_termination: bool,
    pub trees_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// An update resolved to internal vertex ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AppliedEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub elabel: Label,
}

/// The per-batch delta decomposition: for each canonical query edge, the
/// updated relation tuples (oriented as the query edge, both orientations
/// when labels permit), plus the "later-position" exclusion sets.
#[derive(Debug, Clone)]
pub struct DeltaPlan {
    applied: Vec<AppliedEdge>,
    per_edge: Vec<Vec<(VertexId, VertexId)>>,
    exclusions: Vec<ExclusionSet>,
}

impl DeltaPlan {
    /// `g` must contain the updated edges (post-application for insertions,
    /// pre-application for deletions) so endpoint labels are readable.
    pub fn build(q: &QueryGraph, g: &LabeledGraph, edges: &[AppliedEdge]) -> Self {
        let n = q.edge_count();
        let mut per_edge: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); n];
        for ae in edges {
            let (la, lb) = (g.label(ae.src), g.label(ae.dst));
            for (k, e) in q.edges().iter().enumerate() {
                if e.label != ae.elabel {
                    continue;
                }
                let (ls, ld) = (q.label(e.src), q.label(e.dst));
                if ls == la && ld == lb {
                    per_edge[k].push((ae.src, ae.dst));
                }
                if ls == lb && ld == la {
                    per_edge[k].push((ae.dst, ae.src));
                }
            }
        }
        for list in &mut per_edge {
            list.sort_unstable();
            list.dedup();
        }
        let mut exclusions = Vec::with_capacity(n);
        for k in 0..n {
            let mut ex = ExclusionSet::default();
            for (i, list) in per_edge.iter().enumerate().skip(k + 1) {
                for &(a, b) in list {
                    ex.insert(i, a, b);
                }
            }
            exclusions.push(ex);
        }
        Self {
            applied: edges.to_vec(),
            per_edge,
            exclusions,
        }
    }

    /// The raw updates behind this plan.
    pub fn applied(&self) -> &[AppliedEdge] {
        &self.applied
    }

    pub fn tuples(&self, k: usize) -> &[(VertexId, VertexId)] {
        &self.per_edge[k]
    }

    /// Tuples of later positions, forbidden while evaluating position `k`.
    pub fn exclusions(&self, k: usize) -> &ExclusionSet {
        &self.exclusions[k]
    }

    pub fn edge_count(&self) -> usize {
        self.per_edge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_edge.iter().all(Vec::is_empty)
    }

    /// Seed binding for one tuple of position `k`.
    pub fn seed(&self, q: &QueryGraph, k: usize, tuple: (VertexId, VertexId)) -> [(VertexId, VertexId); 2] {
        let e = q.edge(k);
        [(e.src, tuple.0), (e.dst, tuple.1)]
    }
}

/// One strategy behind the framework. `initialize` is the offline phase;
/// the index hooks run inside the update loop at the documented points.
pub trait CsmStrategy {
    fn name(&self) -> &'static str;
    fn capabilities(&self) -> Capabilities;

    fn initialize(&mut self, q: &QueryGraph, g: &LabeledGraph) -> Result<()>;

    /// A data vertex was created (isolated, possibly mid-batch).
    fn vertex_added(&mut self, _q: &QueryGraph, _g: &LabeledGraph, _v: VertexId) {}

    /// An isolated data vertex changed label.
    fn vertex_relabeled(&mut self, _q: &QueryGraph, _g: &LabeledGraph, _v: VertexId, _old: Label) {}

    /// Called after the framework applied `edges` (insertions) to `g`.
    fn update_index_insert(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        edges: &[AppliedEdge],
    ) -> Result<()>;

    /// Called after the framework removed `edges` (deletions) from `g`.
    fn update_index_delete(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        edges: &[AppliedEdge],
    ) -> Result<()>;

    /// Reports the batch's incremental matches. For insertions `g` already
    /// contains the batch; for deletions it still does (enumeration precedes
    /// application).
    #[allow(clippy::too_many_arguments)]
    fn enumerate_delta(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        plan: &DeltaPlan,
        sign: Sign,
        cfg: &EnumerationConfig,
        counters: &mut Counters,
        sink: &mut dyn FnMut(&[VertexId]),
    ) -> Result<Outcome>;

    /// Total candidate-set size of this strategy's index (label-filter
    /// baseline for index-free strategies).
    fn candidate_total(&self, q: &QueryGraph, g: &LabeledGraph) -> u64 {
        baseline_candidate_total(q, g)
    }

    /// Cached-tuple footprint for strategies that materialize join tables;
    /// `None` when no such cache exists.
    fn cached_tuples(&self) -> Option<usize> {
        None
    }
}

/// Σ over query vertices of the label-match count: the candidate space of a
/// strategy with no structural index.
pub fn baseline_candidate_total(q: &QueryGraph, g: &LabeledGraph) -> u64 {
    q.vertices()
        .map(|u| g.vertices().filter(|&v| g.label(v) == q.label(u)).count() as u64)
        .sum()
}

/// Splits a batch into deletions then insertions, dropping updates that
/// appear on both sides. A labeled insertion that would relabel an endpoint
/// is kept even when paired with a deletion of the same edge, so
/// delete-then-reinsert label changes survive normalization.
pub fn normalize_batch(
    batch: &UpdateBatch,
    g: &LabeledGraph,
    map: &VertexMap,
) -> (UpdateBatch, UpdateBatch) {
    let key = |u: &EdgeUpdate| (u.src.min(u.dst), u.src.max(u.dst), u.elabel);
    let mut deletions: Vec<EdgeUpdate> = Vec::new();
    let mut insertions: Vec<EdgeUpdate> = Vec::new();
    for u in batch {
        let target = match u.op {
            UpdateOp::Insert => &mut insertions,
            UpdateOp::Delete => &mut deletions,
        };
        if !target.iter().any(|o| key(o) == key(u)) {
            target.push(u.clone());
        }
    }
    let relabels = |u: &EdgeUpdate| {
        let changes = |id: u64, supplied: Option<Label>| match (map.resolve(id), supplied) {
            (Some(v), Some(l)) => g.label(v) != l,
            _ => false,
        };
        changes(u.src, u.src_label) || changes(u.dst, u.dst_label)
    };
    let cancelled: Vec<(u64, u64, Label)> = insertions
        .iter()
        .filter(|u| !relabels(u))
        .map(|u| key(u))
        .filter(|k| deletions.iter().any(|d| key(d) == *k))
        .collect();
    insertions.retain(|u| relabels(u) || !cancelled.contains(&key(u)));
    deletions.retain(|u| !cancelled.contains(&key(u)));
    let order = |u: &EdgeUpdate| (u.src, u.dst);
    deletions.sort_by_key(order);
    insertions.sort_by_key(order);
    (deletions, insertions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Solved,
    /// The time limit expired before the stream was fully processed.
    Unsolved,
    /// The strategy's index exceeded its memory cap.
    OutOfMemory,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub semantics: crate::enumerate::Semantics,
    /// Early-termination limit per update batch.
    pub max_results: Option<u64>,
    pub time_limit: Option<Duration>,
}

impl RunConfig {
    pub fn new(semantics: crate::enumerate::Semantics) -> Self {
        Self {
            semantics,
            max_results: None,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchEvent<'a> {
    /// Index of the originating batch in the input stream.
    pub batch: usize,
    pub sign: Sign,
    /// Data vertices (internal ids) in query-vertex order.
    pub assignment: &'a [VertexId],
}

#[derive(Debug, Clone)]
pub struct StreamOutcome {
    pub status: RunStatus,
    pub counters: Counters,
    pub index_time: Duration,
    pub enum_time: Duration,
    /// Processing time (index + enumeration, excluding graph application)
    /// per input batch, for percentile reporting.
    pub per_update: Vec<Duration>,
    pub batches_processed: usize,
}

/// Upfront refusal of streams and configurations a strategy cannot honor.
pub fn check_support(
    strategy: &dyn CsmStrategy,
    q: &QueryGraph,
    stream: &UpdateStream,
    cfg: &RunConfig,
) -> Result<()> {
    let caps = strategy.capabilities();
    if q.edge_count() == 0 {
        return Err(Error::EdgelessQuery);
    }
    if caps.trees_only && !q.is_tree() {
        return Err(Error::NotATree(strategy.name()));
    }
    if cfg.max_results.is_some() && !caps.early_termination {
        return Err(Error::Capability {
            algo: strategy.name(),
            op: "early termination",
        });
    }
    for batch in &stream.batches {
        for u in batch {
            match u.op {
                UpdateOp::Insert if !caps.edge_insert => {
                    return Err(Error::Capability {
                        algo: strategy.name(),
                        op: "edge insertion",
                    })
                }
                UpdateOp::Delete if !caps.edge_delete => {
                    return Err(Error::Capability {
                        algo: strategy.name(),
                        op: "edge deletion",
                    })
                }
                _ => {}
            }
        }
    }
    Ok(())
}

/// Resolves one parsed update against the graph, creating endpoints on
/// demand (insertions only) and enforcing the isolated-relabel rule.
fn resolve_insert(
    u: &EdgeUpdate,
    q: &QueryGraph,
    g: &mut LabeledGraph,
    map: &mut VertexMap,
    strategy: &mut dyn CsmStrategy,
) -> Result<AppliedEdge> {
    let mut endpoint = |ext: u64, supplied: Option<Label>| -> Result<VertexId> {
        match map.resolve(ext) {
            Some(v) => {
                if let Some(l) = supplied {
                    let old = g.label(v);
                    if old != l {
                        if g.degree(v) != 0 {
                            return Err(Error::LabelMismatch {
                                id: ext,
                                actual: old,
                                supplied: l,
                            });
                        }
                        g.set_label(v, l);
                        strategy.vertex_relabeled(q, g, v, old);
                    }
                }
                Ok(v)
            }
            None => {
                let v = g.add_vertex(supplied.unwrap_or(0));
                map.insert(ext).expect("unresolvable id is new");
                strategy.vertex_added(q, g, v);
                Ok(v)
            }
        }
    };
    let src = endpoint(u.src, u.src_label)?;
    let dst = endpoint(u.dst, u.dst_label)?;
    Ok(AppliedEdge {
        src,
        dst,
        elabel: u.elabel,
    })
}

fn resolve_delete(u: &EdgeUpdate, map: &VertexMap) -> Result<AppliedEdge> {
    let resolve = |ext: u64| map.resolve(ext).ok_or(Error::UnknownVertex(ext));
    Ok(AppliedEdge {
        src: resolve(u.src)?,
        dst: resolve(u.dst)?,
        elabel: u.elabel,
    })
}

/// Drives a stream through an initialized strategy. Timing is split at the
/// phase boundary: index maintenance vs. match enumeration; applying edge
/// updates to the graph is excluded from both.
pub fn run_stream(
    q: &QueryGraph,
    g: &mut LabeledGraph,
    map: &mut VertexMap,
    stream: &UpdateStream,
    strategy: &mut dyn CsmStrategy,
    cfg: &RunConfig,
    sink: &mut dyn FnMut(MatchEvent<'_>),
) -> Result<StreamOutcome> {
    check_support(strategy, q, stream, cfg)?;
    let deadline = cfg.time_limit.map(|l| Instant::now() + l);
    let mut out = StreamOutcome {
        status: RunStatus::Solved,
        counters: Counters::default(),
        index_time: Duration::ZERO,
        enum_time: Duration::ZERO,
        per_update: Vec::new(),
        batches_processed: 0,
    };
    let split = !strategy.capabilities().batch;

    'stream: for (batch_idx, batch) in stream.batches.iter().enumerate() {
        let update_t0 = out.index_time + out.enum_time;
        let (deletions, insertions) = normalize_batch(batch, g, map);
        // Non-batch strategies see one update at a time; the deletion phase
        // still precedes the insertion phase.
        let phases: Vec<(UpdateOp, UpdateBatch)> = if split {
            deletions
                .into_iter()
                .map(|u| (UpdateOp::Delete, vec![u]))
                .chain(insertions.into_iter().map(|u| (UpdateOp::Insert, vec![u])))
                .collect()
        } else {
            let mut v = Vec::new();
            if !deletions.is_empty() {
                v.push((UpdateOp::Delete, deletions));
            }
            if !insertions.is_empty() {
                v.push((UpdateOp::Insert, insertions));
            }
            v
        };

        for (op, updates) in phases {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    out.status = RunStatus::Unsolved;
                    break 'stream;
                }
            }
            let mut enum_cfg = EnumerationConfig::new(cfg.semantics);
            enum_cfg.deadline = deadline;
            enum_cfg.max_results = cfg.max_results.map(|l| out.counters.results + l);
            let sign = match op {
                UpdateOp::Insert => Sign::Positive,
                UpdateOp::Delete => Sign::Negative,
            };
            let mut emit = |m: &[VertexId]| {
                sink(MatchEvent {
                    batch: batch_idx,
                    sign,
                    assignment: m,
                })
            };

            let step = match op {
                UpdateOp::Insert => {
                    let mut applied = Vec::with_capacity(updates.len());
                    for u in &updates {
                        let ae = resolve_insert(u, q, g, map, strategy)?;
                        g.insert_edge(ae.src, ae.dst, ae.elabel)?;
                        applied.push(ae);
                    }
                    let t0 = Instant::now();
                    let r = strategy.update_index_insert(q, g, &applied);
                    out.index_time += t0.elapsed();
                    r?;
                    let t1 = Instant::now();
                    let plan = DeltaPlan::build(q, g, &applied);
                    let r = strategy.enumerate_delta(
                        q,
                        g,
                        &plan,
                        sign,
                        &enum_cfg,
                        &mut out.counters,
                        &mut emit,
                    );
                    out.enum_time += t1.elapsed();
                    r
                }
                UpdateOp::Delete => {
                    let mut applied = Vec::with_capacity(updates.len());
                    for u in &updates {
                        applied.push(resolve_delete(u, map)?);
                    }
                    let t0 = Instant::now();
                    let plan = DeltaPlan::build(q, g, &applied);
                    let r = strategy.enumerate_delta(
                        q,
                        g,
                        &plan,
                        sign,
                        &enum_cfg,
                        &mut out.counters,
                        &mut emit,
                    );
                    out.enum_time += t0.elapsed();
                    for ae in &applied {
                        g.delete_edge(ae.src, ae.dst, ae.elabel)?;
                    }
                    let t1 = Instant::now();
                    let ri = strategy.update_index_delete(q, g, &applied);
                    out.index_time += t1.elapsed();
                    ri?;
                    r
                }
            };
            match step {
                Ok(Outcome::TimedOut) => {
                    out.status = RunStatus::Unsolved;
                    break 'stream;
                }
                Ok(_) => {}
                Err(Error::OutOfMemoryIndex { .. }) => {
                    out.status = RunStatus::OutOfMemory;
                    break 'stream;
                }
                Err(e) => return Err(e),
            }
        }
        out.batches_processed += 1;
        out.per_update
            .push(out.index_time + out.enum_time - update_t0);
    }
    Ok(out)
}

/// Desugars a vertex insertion (a vertex plus its incident edges) into one
/// batch of labeled edge insertions.
pub fn vertex_insertion_batch(
    vertex: u64,
    label: Label,
    edges: &[(u64, Label, Label)],
) -> UpdateBatch {
    edges
        .iter()
        .map(|&(other, other_label, elabel)| EdgeUpdate {
            op: UpdateOp::Insert,
            src: vertex,
            dst: other,
            elabel,
            src_label: Some(label),
            dst_label: Some(other_label),
        })
        .collect()
}

/// Desugars a vertex deletion into one batch deleting its incident edges.
/// The vertex itself remains as an isolated husk, which cannot occur in any
/// further match.
pub fn vertex_deletion_batch(g: &LabeledGraph, map: &VertexMap, vertex: u64) -> Result<UpdateBatch> {
    let v = map.resolve(vertex).ok_or(Error::UnknownVertex(vertex))?;
    Ok(g.adjacency(v)
        .iter()
        .map(|&(w, elabel)| EdgeUpdate {
            op: UpdateOp::Delete,
            src: vertex,
            dst: map.external(w),
            elabel,
            src_label: None,
            dst_label: None,
        })
        .collect())
}

/// Desugars a label update into delete-everything then reinsert-with-new-
/// label, as two batches so the mixed-batch cancellation rule cannot eat
/// the reinsertions.
pub fn label_update_stream(
    g: &LabeledGraph,
    map: &VertexMap,
    vertex: u64,
    new_label: Label,
) -> Result<UpdateStream> {
    let v = map.resolve(vertex).ok_or(Error::UnknownVertex(vertex))?;
    let deletions = vertex_deletion_batch(g, map, vertex)?;
    let insertions: UpdateBatch = g
        .adjacency(v)
        .iter()
        .map(|&(w, elabel)| EdgeUpdate {
            op: UpdateOp::Insert,
            src: vertex,
            dst: map.external(w),
            elabel,
            src_label: Some(new_label),
            dst_label: Some(g.label(w)),
        })
        .collect();
    let mut batches = Vec::new();
    if !deletions.is_empty() {
        batches.push(deletions);
    }
    if !insertions.is_empty() {
        batches.push(insertions);
    }
    Ok(UpdateStream { batches })
}
