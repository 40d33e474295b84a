//! Graphflow: index-free incremental matching.
//!
//! Offline, one static matching order is prepared per canonical query edge
//! (two for label-symmetric edges, one per orientation); online, each
//! updated tuple seeds an enumeration under the corresponding order, with
//! relations read straight off the data graph.

use crate::enumerate::{
    Counters, EnumerationConfig, Enumerator, GraphView, MatchingOrder, OrderMode, Outcome,
};
use crate::error::Result;
use crate::graph::{LabeledGraph, VertexId};
use crate::ivm::{Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::query::QueryGraph;

/// Greedy order starting at the given edge: after the endpoints, repeatedly
/// take the vertex with the most neighbors already placed, breaking ties by
/// larger degree, then smaller id.
pub fn order_for_edge(q: &QueryGraph, first: VertexId, second: VertexId) -> MatchingOrder {
    let n = q.vertex_count();
    let mut order = vec![first, second];
    let mut placed = vec![false; n];
    placed[first as usize] = true;
    placed[second as usize] = true;
    while order.len() < n {
        let next = q
            .vertices()
            .filter(|&u| !placed[u as usize])
            .max_by_key(|&u| {
                let connectivity = q
                    .adjacency(u)
                    .iter()
                    .filter(|&&(w, _)| placed[w as usize])
                    .count();
                (connectivity, q.degree(u), std::cmp::Reverse(u))
            })
            .unwrap();
        placed[next as usize] = true;
        order.push(next);
    }
    MatchingOrder::new(q, order)
}

pub struct Graphflow {
    /// Per canonical edge: the order starting `(src, dst)` and, when the
    /// endpoint labels coincide, the reversed-start variant used for
    /// flipped tuples.
    catalog: Vec<(MatchingOrder, Option<MatchingOrder>)>,
}

impl Graphflow {
    pub fn new() -> Self {
        Self {
            catalog: Vec::new(),
        }
    }

    pub fn catalog_len(&self) -> usize {
        self.catalog
            .iter()
            .map(|(_, rev)| 1 + rev.is_some() as usize)
            .sum()
    }

    pub fn order(&self, k: usize, flipped: bool) -> &MatchingOrder {
        let (fwd, rev) = &self.catalog[k];
        if flipped {
            rev.as_ref().unwrap_or(fwd)
        } else {
            fwd
        }
    }
}

impl Default for Graphflow {
    fn default() -> Self {
        Self::new()
    }
}

impl CsmStrategy for Graphflow {
    fn name(&self) -> &'static str {
        "gf"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            edge_insert: true,
            edge_delete: true,
            batch: true,
            early_termination: true,
            trees_only: false,
        }
    }

    fn initialize(&mut self, q: &QueryGraph, _g: &LabeledGraph) -> Result<()> {
        self.catalog = q
            .edges()
            .iter()
            .map(|e| {
                let fwd = order_for_edge(q, e.src, e.dst);
                let rev = (q.label(e.src) == q.label(e.dst))
                    .then(|| order_for_edge(q, e.dst, e.src));
                (fwd, rev)
            })
            .collect();
        Ok(())
    }

    fn update_index_insert(
        &mut self,
        _q: &QueryGraph,
        _g: &LabeledGraph,
        _edges: &[crate::ivm::AppliedEdge],
    ) -> Result<()> {
        Ok(())
    }

    fn update_index_delete(
        &mut self,
        _q: &QueryGraph,
        _g: &LabeledGraph,
        _edges: &[crate::ivm::AppliedEdge],
    ) -> Result<()> {
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
        let view = GraphView { q, g };
        for k in 0..plan.edge_count() {
            let e = q.edge(k);
            for &tuple in plan.tuples(k) {
                if let Some(limit) = cfg.max_results {
                    if counters.results >= limit {
                        return Ok(Outcome::LimitReached);
                    }
                }
                // A flipped tuple of a label-symmetric edge uses the
                // reversed-start order; the bound endpoints are the same
                // either way.
                let flipped = tuple.0 > tuple.1 && q.label(e.src) == q.label(e.dst);
                let enumerator = Enumerator {
                    q,
                    view: &view,
                    exclusions: plan.exclusions(k),
                    config: cfg,
                };
                let outcome = enumerator.run(
                    OrderMode::Static(self.order(k, flipped)),
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
}
