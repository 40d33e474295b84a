//! TurboFlux: a spanning-tree candidate index maintained across updates,
//! with static per-edge matching orders driven by path-match counts.
//!
//! The index is the two-phase candidate structure over the tree edges of a
//! minimum-frequency spanning tree; non-tree query edges never touch it and
//! are checked against the data graph during enumeration (every extension
//! is still filtered through the explicit candidate sets). The base
//! matching order deletes the leaf with the fewest root-to-leaf path
//! matches first; the per-edge order starts at the updated edge, climbs to
//! the root, then follows the base order.

use std::collections::HashMap;

use crate::candidates::{CandidateIndex, IndexSnapshot, IndexView, Universe};
use crate::enumerate::{
    Counters, EnumerationConfig, Enumerator, MatchingOrder, OrderMode, Outcome,
};
use crate::error::Result;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::ivm::{AppliedEdge, Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::query::{QueryGraph, SpanningTree};

/// Number of embeddings of the root-to-`u` tree path into the implicit
/// candidate sets, per query vertex (saturating).
fn path_match_totals(
    q: &QueryGraph,
    g: &LabeledGraph,
    t: &SpanningTree,
    idx: &CandidateIndex,
) -> Vec<u64> {
    let n = q.vertex_count();
    let mut per_vertex: Vec<HashMap<VertexId, u64>> = vec![HashMap::new(); n];
    for u in t.dfs_order() {
        match t.parent(u) {
            None => {
                for &v in idx.implicit(u) {
                    per_vertex[u as usize].insert(v, 1);
                }
            }
            Some((p, el, _)) => {
                let upstream = per_vertex[p as usize].clone();
                for &v in idx.implicit(u) {
                    let total = g
                        .neighbors(v, Some(el), Some(q.label(p)))
                        .iter()
                        .filter_map(|w| upstream.get(w))
                        .fold(0u64, |acc, &c| acc.saturating_add(c));
                    per_vertex[u as usize].insert(v, total);
                }
            }
        }
    }
    per_vertex
        .iter()
        .map(|m| m.values().fold(0u64, |acc, &c| acc.saturating_add(c)))
        .collect()
}

/// Reverse leaf-deletion: repeatedly delete the non-root tree leaf with the
/// fewest path matches (ties to the smaller id); the order is the root
/// followed by the deletions reversed.
fn base_order(q: &QueryGraph, t: &SpanningTree, totals: &[u64]) -> Vec<VertexId> {
    let n = q.vertex_count();
    let mut degree: Vec<usize> = q
        .vertices()
        .map(|u| t.children(u).len() + t.parent(u).is_some() as usize)
        .collect();
    let mut remaining = vec![true; n];
    let mut deleted = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let u = q
            .vertices()
            .filter(|&u| remaining[u as usize] && u != t.root() && degree[u as usize] <= 1)
            .min_by_key(|&u| (totals[u as usize], u))
            .expect("a non-root tree leaf always exists");
        remaining[u as usize] = false;
        deleted.push(u);
        let mut relax = |w: VertexId| {
            if remaining[w as usize] {
                degree[w as usize] -= 1;
            }
        };
        if let Some((p, _, _)) = t.parent(u) {
            relax(p);
        }
        for &(c, _, _) in t.children(u) {
            relax(c);
        }
    }
    let mut order = vec![t.root()];
    order.extend(deleted.iter().rev());
    order
}

fn dedup_keep_first(seq: impl IntoIterator<Item = VertexId>, n: usize) -> Vec<VertexId> {
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for u in seq {
        if !seen[u as usize] {
            seen[u as usize] = true;
            out.push(u);
        }
    }
    out
}

/// The base order plus the per-edge orders (updated edge first, then its
/// path to the root, then the base order).
pub(crate) fn order_catalog(
    q: &QueryGraph,
    g: &LabeledGraph,
    t: &SpanningTree,
    idx: &CandidateIndex,
) -> (Vec<VertexId>, Vec<MatchingOrder>) {
    let totals = path_match_totals(q, g, t, idx);
    let base = base_order(q, t, &totals);
    let orders = q
        .edges()
        .iter()
        .map(|e| {
            let seq = [e.src, e.dst]
                .into_iter()
                .chain(t.path_to_root(e.src))
                .chain(base.iter().copied());
            MatchingOrder::new(q, dedup_keep_first(seq, q.vertex_count()))
        })
        .collect();
    (base, orders)
}

pub struct TurboFlux {
    forced_root: Option<VertexId>,
    tree: Option<SpanningTree>,
    index: Option<CandidateIndex>,
    base: Vec<VertexId>,
    orders: Vec<MatchingOrder>,
}

impl TurboFlux {
    pub fn new() -> Self {
        Self {
            forced_root: None,
            tree: None,
            index: None,
            base: Vec::new(),
            orders: Vec::new(),
        }
    }

    /// Pins the spanning-tree root, e.g. to compare candidate sets against
    /// a DAG index grown from the same vertex.
    pub fn rooted(root: VertexId) -> Self {
        Self {
            forced_root: Some(root),
            ..Self::new()
        }
    }

    pub fn tree(&self) -> &SpanningTree {
        self.tree.as_ref().expect("initialized")
    }

    pub fn index(&self) -> &CandidateIndex {
        self.index.as_ref().expect("initialized")
    }

    pub fn snapshot(&self, q: &QueryGraph, g: &LabeledGraph) -> IndexSnapshot {
        self.index().snapshot(q, g)
    }

    pub fn base_order_vertices(&self) -> &[VertexId] {
        &self.base
    }

    pub fn order(&self, k: usize) -> &MatchingOrder {
        &self.orders[k]
    }
}

impl Default for TurboFlux {
    fn default() -> Self {
        Self::new()
    }
}

impl CsmStrategy for TurboFlux {
    fn name(&self) -> &'static str {
        "tf"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            edge_insert: true,
            edge_delete: true,
            batch: false,
            early_termination: true,
            trees_only: false,
        }
    }

    fn initialize(&mut self, q: &QueryGraph, g: &LabeledGraph) -> Result<()> {
        let t = match self.forced_root {
            Some(r) => SpanningTree::min_frequency_with_root(q, g, r),
            None => SpanningTree::min_frequency(q, g),
        };
        let idx = CandidateIndex::build(q, g, Universe::from_tree(q, &t));
        (self.base, self.orders) = order_catalog(q, g, &t, &idx);
        self.tree = Some(t);
        self.index = Some(idx);
        Ok(())
    }

    fn vertex_added(&mut self, q: &QueryGraph, g: &LabeledGraph, v: VertexId) {
        self.index.as_mut().expect("initialized").vertex_added(q, g, v);
    }

    fn vertex_relabeled(&mut self, q: &QueryGraph, g: &LabeledGraph, v: VertexId, old: Label) {
        self.index
            .as_mut()
            .expect("initialized")
            .vertex_relabeled(q, g, v, old);
    }

    fn update_index_insert(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        edges: &[AppliedEdge],
    ) -> Result<()> {
        self.index.as_mut().expect("initialized").insert_edges(q, g, edges);
        Ok(())
    }

    fn update_index_delete(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        edges: &[AppliedEdge],
    ) -> Result<()> {
        self.index.as_mut().expect("initialized").delete_edges(q, g, edges);
        Ok(())
    }

    fn enumerate_delta(
        &mut self,
        q: &QueryGraph,
        g: &LabeledGraph,
        plan: &DeltaPlan,
        _sign: Sign,
        cfg: &EnumerationConfig,
        counters: &mut Counters,
        sink: &mut dyn FnMut(&[VertexId]),
    ) -> Result<Outcome> {
        let view = IndexView {
            q,
            g,
            idx: self.index.as_ref().expect("initialized"),
        };
        for k in 0..plan.edge_count() {
            for &tuple in plan.tuples(k) {
                if let Some(limit) = cfg.max_results {
                    if counters.results >= limit {
                        return Ok(Outcome::LimitReached);
                    }
                }
                let enumerator = Enumerator {
                    q,
                    view: &view,
                    exclusions: plan.exclusions(k),
                    config: cfg,
                };
                let outcome = enumerator.run(
                    OrderMode::Static(&self.orders[k]),
                    &plan.seed(q, k, tuple),
                    counters,
                    sink,
                );
                match outcome {
                    Outcome::Complete => {}
                    stop => return Ok(stop),
                }
            }
        }
        Ok(Outcome::Complete)
    }

    fn candidate_total(&self, _q: &QueryGraph, _g: &LabeledGraph) -> u64 {
        self.index().candidate_total()
    }
}
