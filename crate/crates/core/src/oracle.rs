//! Brute-force match oracle.
//!
//! Ground truth for the property tests and the recomputation backend of the
//! neighborhood-recompute strategy. Deliberately shares nothing with the
//! production enumerator: it walks query vertices in plain id order (not a
//! connected matching order), scans every data vertex instead of
//! intersecting sorted neighbor lists, and uses no index — so agreement
//! between the two is meaningful evidence.

use std::collections::BTreeSet;

use crate::enumerate::Semantics;
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, VertexId};
use crate::query::QueryGraph;

/// Full matches as data-vertex tuples in query-vertex (u0, u1, …) order.
pub type MatchSet = BTreeSet<Vec<VertexId>>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignedDelta {
    pub positives: MatchSet,
    pub negatives: MatchSet,
}

pub const MAX_ORACLE_QUERY: usize = 8;
pub const MAX_ORACLE_DATA: usize = 64;

fn guard(q: &QueryGraph, g: &LabeledGraph) -> Result<()> {
    if q.vertex_count() > MAX_ORACLE_QUERY || g.vertex_count() > MAX_ORACLE_DATA {
        return Err(Error::SizeGuard {
            max_q: MAX_ORACLE_QUERY,
            max_g: MAX_ORACLE_DATA,
        });
    }
    Ok(())
}

/// Unguarded core used internally (the neighborhood-recompute strategy runs
/// it on extracted subgraphs of arbitrary size).
pub(crate) fn matches_in(q: &QueryGraph, g: &LabeledGraph, semantics: Semantics) -> MatchSet {
    let n = q.vertex_count();
    let mut out = MatchSet::new();
    let mut assignment: Vec<Option<VertexId>> = vec![None; n];
    descend(q, g, semantics, 0, &mut assignment, &mut out);
    out
}

fn descend(
    q: &QueryGraph,
    g: &LabeledGraph,
    semantics: Semantics,
    u: usize,
    assignment: &mut Vec<Option<VertexId>>,
    out: &mut MatchSet,
) {
    if u == q.vertex_count() {
        out.insert(assignment.iter().map(|a| a.unwrap()).collect());
        return;
    }
    'vertices: for v in g.vertices() {
        if g.label(v) != q.label(u as VertexId) {
            continue;
        }
        if semantics == Semantics::Isomorphism && assignment.contains(&Some(v)) {
            continue;
        }
        for &(u2, elabel) in q.adjacency(u as VertexId) {
            if let Some(v2) = assignment[u2 as usize] {
                if !g.has_edge(v, v2, elabel) {
                    continue 'vertices;
                }
            }
        }
        assignment[u as usize] = Some(v);
        descend(q, g, semantics, u + 1, assignment, out);
        assignment[u as usize] = None;
    }
}

/// All matches of `q` in `g`. Refuses inputs beyond desk scale.
pub fn oracle_matches(q: &QueryGraph, g: &LabeledGraph, semantics: Semantics) -> Result<MatchSet> {
    guard(q, g)?;
    Ok(matches_in(q, g, semantics))
}

/// Signed symmetric difference of the match sets before and after.
pub fn oracle_delta(
    q: &QueryGraph,
    before: &LabeledGraph,
    after: &LabeledGraph,
    semantics: Semantics,
) -> Result<SignedDelta> {
    guard(q, before)?;
    guard(q, after)?;
    let m0 = matches_in(q, before, semantics);
    let m1 = matches_in(q, after, semantics);
    Ok(SignedDelta {
        positives: m1.difference(&m0).cloned().collect(),
        negatives: m0.difference(&m1).cloned().collect(),
    })
}

/// The data edges appearing at canonical position `k` in at least one match,
/// oriented as the query edge.
pub fn complete_relation(
    q: &QueryGraph,
    g: &LabeledGraph,
    k: usize,
    semantics: Semantics,
) -> Result<BTreeSet<(VertexId, VertexId)>> {
    guard(q, g)?;
    let e = q.edge(k);
    Ok(matches_in(q, g, semantics)
        .iter()
        .map(|m| (m[e.src as usize], m[e.dst as usize]))
        .collect())
}
