//! Pruning-power laboratory: the baseline label filter, per-vertex
//! candidate counting, and a reordered tree refinement whose surviving
//! candidates all appear in actual matches.

use std::collections::BTreeSet;

use crate::candidates::CandidateIndex;
use crate::error::Result;
use crate::graph::{LabeledGraph, VertexId};
use crate::oracle::MatchSet;
use crate::query::{QueryGraph, SpanningTree};

/// Label-only candidates, the floor every index method starts from.
pub fn baseline_sets(q: &QueryGraph, g: &LabeledGraph) -> Vec<Vec<VertexId>> {
    q.vertices()
        .map(|u| {
            g.vertices()
                .filter(|&v| g.label(v) == q.label(u))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateCounts {
    pub explicit: usize,
    /// Size of the weaker first-phase set, for indexes that keep one.
    pub implicit: Option<usize>,
}

/// Per-vertex candidate sizes for one filtering method.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateReport {
    pub counts: Vec<CandidateCounts>,
}

impl CandidateReport {
    pub fn baseline(q: &QueryGraph, g: &LabeledGraph) -> Self {
        Self {
            counts: baseline_sets(q, g)
                .into_iter()
                .map(|s| CandidateCounts {
                    explicit: s.len(),
                    implicit: None,
                })
                .collect(),
        }
    }

    pub fn from_index(q: &QueryGraph, idx: &CandidateIndex) -> Self {
        Self {
            counts: q
                .vertices()
                .map(|u| CandidateCounts {
                    explicit: idx.candidates(u).len(),
                    implicit: Some(idx.implicit(u).len()),
                })
                .collect(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| c.explicit as u64).sum()
    }

    /// Whether every per-vertex count in `self` is at most the matching
    /// count in `other` (e.g. any index report against the baseline).
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.counts.len() == other.counts.len()
            && self
                .counts
                .iter()
                .zip(&other.counts)
                .all(|(a, b)| a.explicit <= b.explicit)
    }
}

/// Tree refinement in the dangling-tuple-elimination order: label filter,
/// then a bottom-up prune against children, then a top-down refinement
/// against the already-refined parents. Under homomorphism every survivor
/// appears in at least one match, so the sets equal the per-vertex
/// projections of the match set.
pub fn modified_tree_pruning(
    q: &QueryGraph,
    g: &LabeledGraph,
) -> Result<Vec<BTreeSet<VertexId>>> {
    let root = q.vertices().min().expect("non-empty query");
    let t = SpanningTree::of_tree(q, root, "modified pruning")?;
    let mut c: Vec<BTreeSet<VertexId>> = q
        .vertices()
        .map(|u| {
            g.vertices()
                .filter(|&v| g.label(v) == q.label(u))
                .collect()
        })
        .collect();
    let order = t.dfs_order();
    for &u in order.iter().rev() {
        let mut keep = std::mem::take(&mut c[u as usize]);
        for &(child, el, _) in t.children(u) {
            let child_set = &c[child as usize];
            keep.retain(|&v| {
                g.neighbors(v, Some(el), Some(q.label(child)))
                    .iter()
                    .any(|w| child_set.contains(w))
            });
        }
        c[u as usize] = keep;
    }
    for &u in &order {
        if let Some((p, el, _)) = t.parent(u) {
            let mut keep = std::mem::take(&mut c[u as usize]);
            let parent_set = &c[p as usize];
            keep.retain(|&v| {
                g.neighbors(v, Some(el), Some(q.label(p)))
                    .iter()
                    .any(|w| parent_set.contains(w))
            });
            c[u as usize] = keep;
        }
    }
    Ok(c)
}

/// Per-vertex projection of a match set: which data vertices appear as the
/// image of each query vertex.
pub fn match_projections(matches: &MatchSet, vertex_count: usize) -> Vec<BTreeSet<VertexId>> {
    let mut out = vec![BTreeSet::new(); vertex_count];
    for m in matches {
        for (u, &v) in m.iter().enumerate() {
            out[u].insert(v);
        }
    }
    out
}
