//! SymBi: bidirectional candidate filtering over the query DAG.
//!
//! Uses the same two-phase counter index as the spanning-tree approach, but
//! the constraint universe covers every query edge (directed by the BFS
//! DAG), so non-tree edges prune candidates too. Matching orders are chosen
//! adaptively during enumeration: at each step the frontier vertex with the
//! fewest live extensions is matched next.

use crate::candidates::{CandidateIndex, IndexSnapshot, IndexView, Universe};
use crate::enumerate::{
    Counters, EnumerationConfig, Enumerator, MatchingOrder, OrderMode, Outcome,
};
use crate::error::Result;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::ivm::{AppliedEdge, Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::query::{QueryDag, QueryGraph};

pub struct SymBi {
    use_static_order: bool,
    dag: Option<QueryDag>,
    index: Option<CandidateIndex>,
    static_order: Option<MatchingOrder>,
}

impl SymBi {
    pub fn new() -> Self {
        Self {
            use_static_order: false,
            dag: None,
            index: None,
            static_order: None,
        }
    }

    /// Replaces the adaptive ordering with the fixed BFS order of the DAG.
    /// The reported match sets are unaffected; only visit order changes.
    pub fn with_static_order() -> Self {
        Self {
            use_static_order: true,
            ..Self::new()
        }
    }

    pub fn dag(&self) -> &QueryDag {
        self.dag.as_ref().expect("initialized")
    }

    pub fn index(&self) -> &CandidateIndex {
        self.index.as_ref().expect("initialized")
    }

    pub fn snapshot(&self, q: &QueryGraph, g: &LabeledGraph) -> IndexSnapshot {
        self.index().snapshot(q, g)
    }
}

impl Default for SymBi {
    fn default() -> Self {
        Self::new()
    }
}

impl CsmStrategy for SymBi {
    fn name(&self) -> &'static str {
        "sym"
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
        let d = QueryDag::build(q);
        let idx = CandidateIndex::build(q, g, Universe::from_dag(q, &d));
        self.static_order = self
            .use_static_order
            .then(|| MatchingOrder::new(q, d.order().to_vec()));
        self.dag = Some(d);
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
        let mode = match &self.static_order {
            Some(order) => OrderMode::Static(order),
            None => OrderMode::Dynamic,
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
                let outcome = enumerator.run(mode, &plan.seed(q, k, tuple), counters, sink);
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
