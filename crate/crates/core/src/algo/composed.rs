//! Index-swapped strategies: another approach's matching orders running on
//! top of the bidirectional DAG index.
//!
//! Each variant keeps its namesake's offline order generation — Graphflow's
//! per-edge greedy orders, the tree DFS order, or the spanning-tree orders
//! with path-count leaf deletion — while every candidate test during
//! enumeration goes through the DAG-filtered sets. Separating the two
//! concerns shows how much of a strategy's pruning power lives in the index
//! rather than the order.

use crate::algo::{graphflow, turboflux};
use crate::candidates::{CandidateIndex, IndexView, Universe};
use crate::enumerate::{
    Counters, EnumerationConfig, Enumerator, MatchingOrder, OrderMode, Outcome,
};
use crate::error::Result;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::ivm::{AppliedEdge, Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::query::{QueryDag, QueryGraph, SpanningTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSource {
    Graphflow,
    TreeDfs,
    PathCounts,
}

/// Per-edge order lookup, covering the reversed-start variants Graphflow
/// keeps for label-symmetric edges.
enum Catalog {
    PerEdge(Vec<(MatchingOrder, Option<MatchingOrder>)>),
    Single(MatchingOrder),
}

impl Catalog {
    fn order(&self, k: usize, flipped: bool) -> &MatchingOrder {
        match self {
            Catalog::Single(o) => o,
            Catalog::PerEdge(v) => {
                let (fwd, rev) = &v[k];
                if flipped {
                    rev.as_ref().unwrap_or(fwd)
                } else {
                    fwd
                }
            }
        }
    }
}

pub struct Composed {
    source: OrderSource,
    index: Option<CandidateIndex>,
    catalog: Option<Catalog>,
}

impl Composed {
    pub fn new(source: OrderSource) -> Self {
        Self {
            source,
            index: None,
            catalog: None,
        }
    }

    pub fn index(&self) -> &CandidateIndex {
        self.index.as_ref().expect("initialized")
    }
}

impl CsmStrategy for Composed {
    fn name(&self) -> &'static str {
        match self.source {
            OrderSource::Graphflow => "o-gf",
            OrderSource::TreeDfs => "o-dyn",
            OrderSource::PathCounts => "o-tf",
        }
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
        self.catalog = Some(match self.source {
            OrderSource::Graphflow => Catalog::PerEdge(
                q.edges()
                    .iter()
                    .map(|e| {
                        let fwd = graphflow::order_for_edge(q, e.src, e.dst);
                        let rev = (q.label(e.src) == q.label(e.dst))
                            .then(|| graphflow::order_for_edge(q, e.dst, e.src));
                        (fwd, rev)
                    })
                    .collect(),
            ),
            OrderSource::TreeDfs => {
                let root = q.vertices().min().expect("non-empty query");
                let t = SpanningTree::min_frequency_with_root(q, g, root);
                Catalog::Single(MatchingOrder::new(q, t.dfs_order()))
            }
            OrderSource::PathCounts => {
                let t = SpanningTree::min_frequency(q, g);
                let tree_idx = CandidateIndex::build(q, g, Universe::from_tree(q, &t));
                let (_, orders) = turboflux::order_catalog(q, g, &t, &tree_idx);
                Catalog::PerEdge(orders.into_iter().map(|o| (o, None)).collect())
            }
        });
        let d = QueryDag::build(q);
        self.index = Some(CandidateIndex::build(q, g, Universe::from_dag(q, &d)));
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
        let catalog = self.catalog.as_ref().expect("initialized");
        for k in 0..plan.edge_count() {
            let e = q.edge(k);
            for &tuple in plan.tuples(k) {
                if let Some(limit) = cfg.max_results {
                    if counters.results >= limit {
                        return Ok(Outcome::LimitReached);
                    }
                }
                let flipped = tuple.0 > tuple.1 && q.label(e.src) == q.label(e.dst);
                let enumerator = Enumerator {
                    q,
                    view: &view,
                    exclusions: plan.exclusions(k),
                    config: cfg,
                };
                let outcome = enumerator.run(
                    OrderMode::Static(catalog.order(k, flipped)),
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
