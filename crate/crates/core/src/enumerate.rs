//! Vertex-at-a-time match enumeration.
//!
//! One enumerator serves every strategy: it walks query vertices in a static
//! matching order or picks the next vertex dynamically, intersects candidate
//! extension lists supplied by a [`RelationView`], honors per-edge exclusion
//! sets (for delta decomposition), and counts the standard invalid-partial
//! statistics (#EMP for empty local candidate sets, #VIS for candidates
//! already mapped under isomorphism).

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::graph::{LabeledGraph, VertexId};
use crate::query::QueryGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Homomorphism,
    Isomorphism,
}

#[derive(Debug, Clone)]
pub struct EnumerationConfig {
    pub semantics: Semantics,
    /// Early termination: stop after this many results.
    pub max_results: Option<u64>,
    /// Wall-clock budget; polled periodically during recursion.
    pub deadline: Option<Instant>,
}

impl EnumerationConfig {
    pub fn new(semantics: Semantics) -> Self {
        Self {
            semantics,
            max_results: None,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub results: u64,
    /// Partial matches abandoned because a local candidate set was empty.
    pub emp: u64,
    /// Candidates skipped because their data vertex was already mapped.
    pub vis: u64,
    /// Recursion nodes visited (budget polling granularity).
    pub nodes: u64,
}

impl Counters {
    pub fn inv(&self) -> u64 {
        self.emp + self.vis
    }

    pub fn merge(&mut self, other: &Counters) {
        self.results += other.results;
        self.emp += other.emp;
        self.vis += other.vis;
        self.nodes += other.nodes;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Complete,
    LimitReached,
    TimedOut,
}

/// A static matching order: a connected permutation of the query vertices
/// with, per vertex, the list of its neighbors placed earlier in the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingOrder {
    order: Vec<VertexId>,
    position: Vec<usize>,
    /// Per query vertex: `(earlier neighbor, edge label, canonical index)`.
    earlier: Vec<Vec<(VertexId, u32, usize)>>,
}

impl MatchingOrder {
    /// Builds the order, checking it is a permutation and that every vertex
    /// after the first has at least one earlier neighbor.
    pub fn new(q: &QueryGraph, order: Vec<VertexId>) -> Self {
        let n = q.vertex_count();
        assert_eq!(order.len(), n, "order must cover all query vertices");
        let mut position = vec![usize::MAX; n];
        for (i, &u) in order.iter().enumerate() {
            assert_eq!(position[u as usize], usize::MAX, "duplicate vertex in order");
            position[u as usize] = i;
        }
        let mut earlier = vec![Vec::new(); n];
        for (idx, e) in q.edges().iter().enumerate() {
            let (a, b) = (e.src, e.dst);
            if position[a as usize] < position[b as usize] {
                earlier[b as usize].push((a, e.label, idx));
            } else {
                earlier[a as usize].push((b, e.label, idx));
            }
        }
        for (i, &u) in order.iter().enumerate().skip(1) {
            assert!(
                !earlier[u as usize].is_empty(),
                "vertex {u} at position {i} has no earlier neighbor"
            );
        }
        Self {
            order,
            position,
            earlier,
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.order
    }

    pub fn position(&self, u: VertexId) -> usize {
        self.position[u as usize]
    }

    pub fn earlier_neighbors(&self, u: VertexId) -> &[(VertexId, u32, usize)] {
        &self.earlier[u as usize]
    }
}

/// Candidate supplier for enumeration. Implementations range from the plain
/// data graph to strategy indexes with per-update overlays.
pub trait RelationView {
    /// Sorted data vertices reachable from `from_v` (bound to query vertex
    /// `from`) along canonical query edge `eidx`, valid as images of `to`.
    fn extensions(&self, eidx: usize, from: VertexId, from_v: VertexId, to: VertexId)
        -> Vec<VertexId>;

    /// Membership mirror of [`extensions`](Self::extensions): does the pair
    /// `(vsrc, vdst)` — oriented as the canonical edge — belong to the edge's
    /// relation?
    fn admits(&self, eidx: usize, vsrc: VertexId, vdst: VertexId) -> bool;

    /// Candidates for an unbound first vertex: the intersection over all
    /// incident query edges of the relation projections onto `u`.
    fn first_candidates(&self, u: VertexId) -> Vec<VertexId>;
}

/// The index-free view: relations are read straight off the data graph with
/// label filters.
pub struct GraphView<'a> {
    pub q: &'a QueryGraph,
    pub g: &'a LabeledGraph,
}

impl RelationView for GraphView<'_> {
    fn extensions(
        &self,
        eidx: usize,
        _from: VertexId,
        from_v: VertexId,
        to: VertexId,
    ) -> Vec<VertexId> {
        let e = self.q.edge(eidx);
        self.g
            .neighbors(from_v, Some(e.label), Some(self.q.label(to)))
    }

    fn admits(&self, eidx: usize, vsrc: VertexId, vdst: VertexId) -> bool {
        let e = self.q.edge(eidx);
        self.g.label(vsrc) == self.q.label(e.src)
            && self.g.label(vdst) == self.q.label(e.dst)
            && self.g.has_edge(vsrc, vdst, e.label)
    }

    fn first_candidates(&self, u: VertexId) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .g
            .vertices()
            .filter(|&v| self.g.label(v) == self.q.label(u))
            .collect();
        for &(u2, elabel) in self.q.adjacency(u) {
            let l2 = self.q.label(u2);
            out.retain(|&v| {
                self.g
                    .adjacency(v)
                    .iter()
                    .any(|&(w, el)| el == elabel && self.g.label(w) == l2)
            });
        }
        out
    }
}

/// Per-canonical-edge forbidden pairs, oriented as the canonical edge. Used
/// to evaluate the "already-counted delta" exclusions of the per-edge delta
/// decomposition without copying relations.
#[derive(Debug, Clone, Default)]
pub struct ExclusionSet {
    per_edge: HashMap<usize, HashSet<(VertexId, VertexId)>>,
}

impl ExclusionSet {
    pub fn insert(&mut self, eidx: usize, vsrc: VertexId, vdst: VertexId) {
        self.per_edge.entry(eidx).or_default().insert((vsrc, vdst));
    }

    pub fn contains(&self, eidx: usize, vsrc: VertexId, vdst: VertexId) -> bool {
        self.per_edge
            .get(&eidx)
            .is_some_and(|s| s.contains(&(vsrc, vdst)))
    }

    pub fn is_empty(&self) -> bool {
        self.per_edge.is_empty()
    }
}

/// How the next query vertex is chosen.
#[derive(Clone, Copy)]
pub enum OrderMode<'a> {
    Static(&'a MatchingOrder),
    /// Pick the frontier vertex with the fewest local candidates (ties to
    /// the smallest id). Requires a non-empty seed.
    Dynamic,
}

const BUDGET_POLL_INTERVAL: u64 = 1024;

pub struct Enumerator<'a, V: RelationView + ?Sized> {
    pub q: &'a QueryGraph,
    pub view: &'a V,
    pub exclusions: &'a ExclusionSet,
    pub config: &'a EnumerationConfig,
}

struct Walk<'a, 'b, V: RelationView + ?Sized, F: FnMut(&[VertexId]) + ?Sized> {
    ctx: &'b Enumerator<'a, V>,
    assignment: Vec<Option<VertexId>>,
    matched: Vec<VertexId>,
    counters: &'b mut Counters,
    sink: &'b mut F,
}

enum Stop {
    Limit,
    Time,
}

type Step = Result<(), Stop>;

impl<'a, V: RelationView + ?Sized> Enumerator<'a, V> {
    /// Extends `seed` (query-vertex → data-vertex pairs) to all full
    /// matches, feeding each to `sink` as data vertices in query-vertex
    /// (u0, u1, …) order.
    pub fn run<F: FnMut(&[VertexId]) + ?Sized>(
        &self,
        mode: OrderMode<'_>,
        seed: &[(VertexId, VertexId)],
        counters: &mut Counters,
        sink: &mut F,
    ) -> Outcome {
        let n = self.q.vertex_count();
        let mut assignment = vec![None; n];
        for &(u, v) in seed {
            debug_assert!(assignment[u as usize].is_none());
            assignment[u as usize] = Some(v);
        }
        if matches!(mode, OrderMode::Dynamic) && seed.is_empty() {
            panic!("dynamic ordering needs a non-empty seed");
        }
        let mut walk = Walk {
            ctx: self,
            assignment,
            matched: seed.iter().map(|&(_, v)| v).collect(),
            counters,
            sink,
        };
        let res = match mode {
            OrderMode::Static(order) => walk.step_static(order, 0),
            OrderMode::Dynamic => walk.step_dynamic(),
        };
        match res {
            Ok(()) => Outcome::Complete,
            Err(Stop::Limit) => Outcome::LimitReached,
            Err(Stop::Time) => Outcome::TimedOut,
        }
    }
}

impl<V: RelationView + ?Sized, F: FnMut(&[VertexId]) + ?Sized> Walk<'_, '_, V, F> {
    fn enter_node(&mut self) -> Step {
        self.counters.nodes += 1;
        if self.counters.nodes.is_multiple_of(BUDGET_POLL_INTERVAL) {
            if let Some(deadline) = self.ctx.config.deadline {
                if Instant::now() >= deadline {
                    return Err(Stop::Time);
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self) -> Step {
        let full: Vec<VertexId> = self.assignment.iter().map(|a| a.unwrap()).collect();
        (self.sink)(&full);
        self.counters.results += 1;
        if let Some(limit) = self.ctx.config.max_results {
            if self.counters.results >= limit {
                return Err(Stop::Limit);
            }
        }
        Ok(())
    }

    /// Checks the constraints a pre-bound vertex owes its already-assigned
    /// neighbors. Failures prune silently: they stem from the seed, not from
    /// a computed candidate set.
    fn bound_ok(&self, u: VertexId, consulted: &[(VertexId, u32, usize)]) -> bool {
        let v = self.assignment[u as usize].unwrap();
        consulted.iter().all(|&(u2, _, eidx)| {
            let v2 = self.assignment[u2 as usize].unwrap();
            let (vs, vd) = self.orient(eidx, u, v, v2);
            self.ctx.view.admits(eidx, vs, vd) && !self.ctx.exclusions.contains(eidx, vs, vd)
        })
    }

    /// Orients `(v at u, v2 at the other endpoint)` as the canonical edge.
    fn orient(&self, eidx: usize, u: VertexId, v: VertexId, v2: VertexId) -> (VertexId, VertexId) {
        if self.ctx.q.edge(eidx).src == u {
            (v, v2)
        } else {
            (v2, v)
        }
    }

    /// Intersection of extension lists over `consulted` edges, smallest list
    /// first. Returns the surviving candidates and whether the intersection
    /// was empty before exclusion filtering.
    fn local_candidates(
        &self,
        u: VertexId,
        consulted: &[(VertexId, u32, usize)],
    ) -> (Vec<VertexId>, bool) {
        let mut lists: Vec<(Vec<VertexId>, usize)> = consulted
            .iter()
            .map(|&(u2, _, eidx)| {
                let v2 = self.assignment[u2 as usize].unwrap();
                (self.ctx.view.extensions(eidx, u2, v2, u), eidx)
            })
            .collect();
        lists.sort_by_key(|(l, _)| l.len());
        let (smallest, first_eidx) = lists.remove(0);
        let mut pre_empty = true;
        let mut out = Vec::new();
        'cand: for v in smallest {
            for (list, _) in &lists {
                if list.binary_search(&v).is_err() {
                    continue 'cand;
                }
            }
            pre_empty = false;
            // Candidate survives the raw intersection; drop it silently if
            // any edge reaches it through an excluded pair.
            let excluded = std::iter::once(first_eidx)
                .chain(lists.iter().map(|&(_, e)| e))
                .any(|eidx| {
                    let (u2, _, _) = consulted.iter().find(|&&(_, _, e)| e == eidx).unwrap();
                    let v2 = self.assignment[*u2 as usize].unwrap();
                    let (vs, vd) = self.orient(eidx, u, v, v2);
                    self.ctx.exclusions.contains(eidx, vs, vd)
                });
            if !excluded {
                out.push(v);
            }
        }
        (out, pre_empty)
    }

    fn consulted_static(&self, order: &MatchingOrder, u: VertexId) -> Vec<(VertexId, u32, usize)> {
        order.earlier_neighbors(u).to_vec()
    }

    /// All matched neighbors of `u`.
    fn consulted_dynamic(&self, u: VertexId) -> Vec<(VertexId, u32, usize)> {
        self.ctx
            .q
            .adjacency(u)
            .iter()
            .filter(|&&(u2, _)| self.assignment[u2 as usize].is_some())
            .map(|&(u2, el)| (u2, el, self.ctx.q.edge_index(u, u2).unwrap()))
            .collect()
    }

    fn try_candidate(&mut self, u: VertexId, v: VertexId) -> bool {
        if self.ctx.config.semantics == Semantics::Isomorphism && self.matched.contains(&v) {
            self.counters.vis += 1;
            return false;
        }
        self.assignment[u as usize] = Some(v);
        self.matched.push(v);
        true
    }

    fn undo(&mut self, u: VertexId) {
        self.assignment[u as usize] = None;
        self.matched.pop();
    }

    fn step_static(&mut self, order: &MatchingOrder, depth: usize) -> Step {
        self.enter_node()?;
        if depth == order.vertices().len() {
            return self.emit();
        }
        let u = order.vertices()[depth];
        if self.assignment[u as usize].is_some() {
            let consulted = self.consulted_static(order, u);
            if self.bound_ok(u, &consulted) {
                self.step_static(order, depth + 1)?;
            }
            return Ok(());
        }
        let consulted = self.consulted_static(order, u);
        if consulted.is_empty() {
            // Unbound first vertex: seed from projections.
            for v in self.ctx.view.first_candidates(u) {
                if self.try_candidate(u, v) {
                    self.step_static(order, depth + 1)?;
                    self.undo(u);
                }
            }
            return Ok(());
        }
        let (candidates, pre_empty) = self.local_candidates(u, &consulted);
        if pre_empty {
            self.counters.emp += 1;
            return Ok(());
        }
        for v in candidates {
            if self.try_candidate(u, v) {
                self.step_static(order, depth + 1)?;
                self.undo(u);
            }
        }
        Ok(())
    }

    fn step_dynamic(&mut self) -> Step {
        self.enter_node()?;
        // Frontier: unmatched vertices adjacent to the matched region.
        let mut chosen: Option<(VertexId, Vec<VertexId>, bool)> = None;
        let mut frontier_empty = true;
        for u in self.ctx.q.vertices() {
            if self.assignment[u as usize].is_some() {
                continue;
            }
            let consulted = self.consulted_dynamic(u);
            if consulted.is_empty() {
                continue;
            }
            frontier_empty = false;
            let (candidates, pre_empty) = self.local_candidates(u, &consulted);
            let better = match &chosen {
                None => true,
                Some((_, best, _)) => candidates.len() < best.len(),
            };
            if better {
                let zero = candidates.is_empty();
                chosen = Some((u, candidates, pre_empty));
                if zero {
                    break; // cannot do better than an empty set
                }
            }
        }
        if frontier_empty {
            // Everything reachable is matched; the query being connected,
            // that means everything is matched.
            return self.emit();
        }
        let (u, candidates, pre_empty) = chosen.unwrap();
        if pre_empty {
            self.counters.emp += 1;
            return Ok(());
        }
        for v in candidates {
            if self.try_candidate(u, v) {
                self.step_dynamic()?;
                self.undo(u);
            }
        }
        Ok(())
    }
}
