//! IEDyn: delta enumeration for tree queries without empty intersections.
//!
//! The global index keeps only backward support: a data vertex is a
//! candidate for a tree vertex when every child subtree can be embedded
//! under it. Per updated edge, enumeration runs against a small overlay
//! that pins the root-to-edge path to vertices that actually reach the
//! update, so every intersection taken during enumeration is non-empty and
//! tree matches stream out with no dead ends.
//!
//! Deletions enumerate against the pre-deletion index and graph first; the
//! index catches up afterwards.

use std::collections::HashMap;

use crate::candidates::{CandidateIndex, IndexSnapshot, Universe};
use crate::enumerate::{
    Counters, EnumerationConfig, Enumerator, MatchingOrder, OrderMode, Outcome, RelationView,
};
use crate::error::Result;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::ivm::{AppliedEdge, Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::query::{QueryGraph, SpanningTree};

/// Read-through view: overlaid vertices use their pinned candidate list,
/// everything else falls back to the global explicit sets.
struct OverlayView<'a> {
    q: &'a QueryGraph,
    g: &'a LabeledGraph,
    idx: &'a CandidateIndex,
    overlay: &'a HashMap<VertexId, Vec<VertexId>>,
}

impl OverlayView<'_> {
    fn member(&self, u: VertexId, v: VertexId) -> bool {
        match self.overlay.get(&u) {
            Some(pinned) => pinned.binary_search(&v).is_ok(),
            None => self.idx.in_candidates(u, v),
        }
    }
}

impl RelationView for OverlayView<'_> {
    fn extensions(
        &self,
        eidx: usize,
        _from: VertexId,
        from_v: VertexId,
        to: VertexId,
    ) -> Vec<VertexId> {
        let e = self.q.edge(eidx);
        let mut out = self.g.neighbors(from_v, Some(e.label), Some(self.q.label(to)));
        out.retain(|w| self.member(to, *w));
        out
    }

    fn admits(&self, eidx: usize, vsrc: VertexId, vdst: VertexId) -> bool {
        let e = self.q.edge(eidx);
        self.member(e.src, vsrc)
            && self.member(e.dst, vdst)
            && self.g.has_edge(vsrc, vdst, e.label)
    }

    fn first_candidates(&self, u: VertexId) -> Vec<VertexId> {
        match self.overlay.get(&u) {
            Some(pinned) => pinned.clone(),
            None => self.idx.candidates(u).iter().copied().collect(),
        }
    }
}

pub struct IeDyn {
    tree: Option<SpanningTree>,
    index: Option<CandidateIndex>,
    order: Option<MatchingOrder>,
}

impl IeDyn {
    pub fn new() -> Self {
        Self {
            tree: None,
            index: None,
            order: None,
        }
    }

    pub fn tree(&self) -> &SpanningTree {
        self.tree.as_ref().expect("initialized")
    }

    pub fn index(&self) -> &CandidateIndex {
        self.index.as_ref().expect("initialized")
    }

    pub fn order(&self) -> &MatchingOrder {
        self.order.as_ref().expect("initialized")
    }

    pub fn snapshot(&self, q: &QueryGraph, g: &LabeledGraph) -> IndexSnapshot {
        self.index().snapshot(q, g)
    }

    /// Pins the root-to-update path for one delta edge, or `None` when the
    /// update provably creates no matches. Every pinned vertex reaches the
    /// updated edge through the pinned lists and embeds all off-path
    /// subtrees, which is what rules out empty intersections later.
    fn build_overlay(
        &self,
        q: &QueryGraph,
        g: &LabeledGraph,
        k: usize,
        tuple: (VertexId, VertexId),
    ) -> Option<HashMap<VertexId, Vec<VertexId>>> {
        let t = self.tree();
        let idx = self.index();
        let e = q.edge(k);
        let (ux, vx, uy, vy) = if t.parent(e.dst).map(|(p, _, _)| p) == Some(e.src) {
            (e.src, tuple.0, e.dst, tuple.1)
        } else {
            debug_assert_eq!(t.parent(e.src).map(|(p, _, _)| p), Some(e.dst));
            (e.dst, tuple.1, e.src, tuple.0)
        };
        if !idx.in_candidates(uy, vy) {
            return None;
        }
        let off_path_ok = |w: VertexId, p: VertexId, skip: VertexId| {
            t.children(p).iter().all(|&(child, el, _)| {
                child == skip
                    || g.neighbors(w, Some(el), Some(q.label(child)))
                        .iter()
                        .any(|&y| idx.in_candidates(child, y))
            })
        };
        if !off_path_ok(vx, ux, uy) {
            return None;
        }
        let mut overlay = HashMap::new();
        overlay.insert(ux, vec![vx]);
        let mut child = ux;
        let mut frontier = vec![vx];
        while let Some((p, el, _)) = t.parent(child) {
            let mut next: Vec<VertexId> = frontier
                .iter()
                .flat_map(|&x| g.neighbors(x, Some(el), Some(q.label(p))))
                .collect();
            next.sort_unstable();
            next.dedup();
            next.retain(|&w| off_path_ok(w, p, child));
            if next.is_empty() {
                return None;
            }
            overlay.insert(p, next.clone());
            frontier = next;
            child = p;
        }
        Some(overlay)
    }
}

impl Default for IeDyn {
    fn default() -> Self {
        Self::new()
    }
}

impl CsmStrategy for IeDyn {
    fn name(&self) -> &'static str {
        "dyn"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            edge_insert: true,
            edge_delete: true,
            batch: true,
            early_termination: true,
            trees_only: true,
        }
    }

    fn initialize(&mut self, q: &QueryGraph, g: &LabeledGraph) -> Result<()> {
        let root = q.vertices().min().expect("non-empty query");
        let t = SpanningTree::of_tree(q, root, "dyn")?;
        let idx = CandidateIndex::build(q, g, Universe::from_tree_backward(q, &t));
        self.order = Some(MatchingOrder::new(q, t.dfs_order()));
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
        for k in 0..plan.edge_count() {
            for &tuple in plan.tuples(k) {
                if let Some(limit) = cfg.max_results {
                    if counters.results >= limit {
                        return Ok(Outcome::LimitReached);
                    }
                }
                let Some(overlay) = self.build_overlay(q, g, k, tuple) else {
                    continue;
                };
                let view = OverlayView {
                    q,
                    g,
                    idx: self.index.as_ref().expect("initialized"),
                    overlay: &overlay,
                };
                let enumerator = Enumerator {
                    q,
                    view: &view,
                    exclusions: plan.exclusions(k),
                    config: cfg,
                };
                let outcome = enumerator.run(
                    OrderMode::Static(self.order.as_ref().expect("initialized")),
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
