//! Incrementally maintained candidate sets over a rooted edge universe.
//!
//! The tree- and DAG-indexed strategies all keep, per query vertex `u`, an
//! implicit set `C_im(u)` (label match plus a supporting neighbor in
//! `C_im(u')` for every universe parent `u'`) and an explicit set
//! `C(u) ⊆ C_im(u)` (additionally a supporting neighbor in `C(u'')` for
//! every universe child `u''`). Membership is decided by counter tables —
//! per `(u, v)` row, the number of supporting neighbors per incident
//! universe edge — so an edge update touches counters first and set
//! membership only on zero/nonzero transitions, which propagate through two
//! work queues (top-down for `C_im`, bottom-up for `C`).
//!
//! The same structure serves three configurations: spanning-tree edges with
//! both phases, all DAG edges with both phases, and tree edges with the
//! backward phase only (every parent list empty, so `C_im` degenerates to
//! the label filter).

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::enumerate::RelationView;
use crate::graph::{Label, LabeledGraph, VertexId};
use crate::ivm::AppliedEdge;
use crate::query::{QueryDag, QueryGraph, SpanningTree};

/// One directed universe edge with its slots into the endpoint rows.
#[derive(Debug, Clone, Copy)]
struct Link {
    parent: VertexId,
    child: VertexId,
    elabel: Label,
    cano: usize,
    /// Position of this link in `parents(child)`; `None` when the parent
    /// lists are stripped (backward-only configuration).
    up_slot: Option<usize>,
    /// Position of this link in `children(parent)`.
    down_slot: usize,
}

/// The directed skeleton the index maintains candidates over.
#[derive(Debug, Clone)]
pub struct Universe {
    parents: Vec<Vec<(VertexId, Label, usize)>>,
    children: Vec<Vec<(VertexId, Label, usize)>>,
    /// Query vertices, parents before children.
    topo: Vec<VertexId>,
    links: Vec<Link>,
    /// Link indices grouped by the link's parent resp. child vertex. The
    /// backward-only configuration strips `parents` but keeps the links, so
    /// cascades must consult these, not the constraint lists.
    by_parent: Vec<Vec<usize>>,
    by_child: Vec<Vec<usize>>,
    member_edge: Vec<bool>,
}

impl Universe {
    /// Spanning-tree edges, both phases.
    pub fn from_tree(q: &QueryGraph, t: &SpanningTree) -> Self {
        let n = q.vertex_count();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for u in q.vertices() {
            if let Some(p) = t.parent(u) {
                parents[u as usize].push(p);
            }
            children[u as usize] = t.children(u).to_vec();
        }
        Self::assemble(q, parents, children, t.dfs_order())
    }

    /// Spanning-tree edges with the parent constraints dropped: `C_im`
    /// becomes the plain label filter and only the child phase prunes.
    pub fn from_tree_backward(q: &QueryGraph, t: &SpanningTree) -> Self {
        let n = q.vertex_count();
        let parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for u in q.vertices() {
            children[u as usize] = t.children(u).to_vec();
        }
        Self::assemble(q, parents, children, t.dfs_order())
    }

    /// Every query edge, directed by the DAG.
    pub fn from_dag(q: &QueryGraph, d: &QueryDag) -> Self {
        let mut parents = Vec::with_capacity(q.vertex_count());
        let mut children = Vec::with_capacity(q.vertex_count());
        for u in q.vertices() {
            parents.push(d.parents(u).to_vec());
            children.push(d.children(u).to_vec());
        }
        Self::assemble(q, parents, children, d.order().to_vec())
    }

    fn assemble(
        q: &QueryGraph,
        parents: Vec<Vec<(VertexId, Label, usize)>>,
        children: Vec<Vec<(VertexId, Label, usize)>>,
        topo: Vec<VertexId>,
    ) -> Self {
        let mut links = Vec::new();
        let mut by_parent = vec![Vec::new(); q.vertex_count()];
        let mut by_child = vec![Vec::new(); q.vertex_count()];
        let mut member_edge = vec![false; q.edge_count()];
        for u in q.vertices() {
            for (down_slot, &(child, elabel, cano)) in children[u as usize].iter().enumerate() {
                let up_slot = parents[child as usize]
                    .iter()
                    .position(|&(p, _, c)| p == u && c == cano);
                by_parent[u as usize].push(links.len());
                by_child[child as usize].push(links.len());
                links.push(Link {
                    parent: u,
                    child,
                    elabel,
                    cano,
                    up_slot,
                    down_slot,
                });
                member_edge[cano] = true;
            }
        }
        Self {
            parents,
            children,
            topo,
            links,
            by_parent,
            by_child,
            member_edge,
        }
    }

    pub fn parents(&self, u: VertexId) -> &[(VertexId, Label, usize)] {
        &self.parents[u as usize]
    }

    pub fn children(&self, u: VertexId) -> &[(VertexId, Label, usize)] {
        &self.children[u as usize]
    }

    /// Is the canonical query edge part of the universe?
    pub fn covers_edge(&self, cano: usize) -> bool {
        self.member_edge[cano]
    }
}

/// Support counters for one `(u, v)` pair with `L(v) = L(u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Row {
    up_cnt: Vec<u32>,
    up_nonzero: usize,
    down_cnt: Vec<u32>,
    down_nonzero: usize,
    in_cim: bool,
    in_c: bool,
}

#[derive(Debug)]
pub struct CandidateIndex {
    uni: Universe,
    rows: Vec<HashMap<VertexId, Row>>,
    cim: Vec<BTreeSet<VertexId>>,
    c: Vec<BTreeSet<VertexId>>,
}

/// Deterministic image of the whole index, for equivalence checks against a
/// from-scratch rebuild. Candidate edges are listed per canonical query edge
/// (parent candidate first), derived from the implicit sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSnapshot {
    pub implicit: Vec<Vec<VertexId>>,
    pub explicit: Vec<Vec<VertexId>>,
    /// Per query vertex, rows sorted by data vertex: `(v, parent-edge
    /// support counts, child-edge support counts)`.
    pub counters: Vec<Vec<(VertexId, Vec<u32>, Vec<u32>)>>,
    pub edges: Vec<Vec<(VertexId, VertexId)>>,
}

impl CandidateIndex {
    pub fn build(q: &QueryGraph, g: &LabeledGraph, uni: Universe) -> Self {
        let n = q.vertex_count();
        let mut idx = Self {
            uni,
            rows: vec![HashMap::new(); n],
            cim: vec![BTreeSet::new(); n],
            c: vec![BTreeSet::new(); n],
        };
        for u in q.vertices() {
            let up_len = idx.uni.parents(u).len();
            let down_len = idx.uni.children(u).len();
            for v in g.vertices().filter(|&v| g.label(v) == q.label(u)) {
                idx.rows[u as usize].insert(
                    v,
                    Row {
                        up_cnt: vec![0; up_len],
                        up_nonzero: 0,
                        down_cnt: vec![0; down_len],
                        down_nonzero: 0,
                        in_cim: false,
                        in_c: false,
                    },
                );
            }
        }
        // Top-down phase: parents are final before any child is computed.
        for &u in &idx.uni.topo.clone() {
            let vs: Vec<VertexId> = idx.rows[u as usize].keys().copied().collect();
            for v in vs {
                let counts: Vec<u32> = idx
                    .uni
                    .parents(u)
                    .iter()
                    .map(|&(p, el, _)| {
                        g.neighbors(v, Some(el), Some(q.label(p)))
                            .iter()
                            .filter(|w| idx.cim[p as usize].contains(w))
                            .count() as u32
                    })
                    .collect();
                let nonzero = counts.iter().filter(|&&c| c > 0).count();
                let full = nonzero == counts.len();
                let row = idx.rows[u as usize].get_mut(&v).unwrap();
                row.up_cnt = counts;
                row.up_nonzero = nonzero;
                row.in_cim = full;
                if full {
                    idx.cim[u as usize].insert(v);
                }
            }
        }
        // Bottom-up phase over the final implicit sets.
        for &u in idx.uni.topo.clone().iter().rev() {
            let vs: Vec<VertexId> = idx.rows[u as usize].keys().copied().collect();
            for v in vs {
                let counts: Vec<u32> = idx
                    .uni
                    .children(u)
                    .iter()
                    .map(|&(ch, el, _)| {
                        g.neighbors(v, Some(el), Some(q.label(ch)))
                            .iter()
                            .filter(|w| idx.c[ch as usize].contains(w))
                            .count() as u32
                    })
                    .collect();
                let nonzero = counts.iter().filter(|&&c| c > 0).count();
                let row = idx.rows[u as usize].get_mut(&v).unwrap();
                row.down_cnt = counts;
                row.down_nonzero = nonzero;
                row.in_c = row.in_cim && nonzero == row.down_cnt.len();
                if row.in_c {
                    idx.c[u as usize].insert(v);
                }
            }
        }
        idx
    }

    pub fn universe(&self) -> &Universe {
        &self.uni
    }

    pub fn implicit(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.cim[u as usize]
    }

    pub fn candidates(&self, u: VertexId) -> &BTreeSet<VertexId> {
        &self.c[u as usize]
    }

    pub fn in_candidates(&self, u: VertexId, v: VertexId) -> bool {
        self.c[u as usize].contains(&v)
    }

    pub fn candidate_total(&self) -> u64 {
        self.c.iter().map(|s| s.len() as u64).sum()
    }

    /// The matching `(link, parent-image, child-image)` assignments of one
    /// applied data edge; both orientations when the labels allow it.
    fn matching_links(&self, q: &QueryGraph, g: &LabeledGraph, ae: &AppliedEdge) -> Vec<(usize, VertexId, VertexId)> {
        let (la, lb) = (g.label(ae.src), g.label(ae.dst));
        let mut out = Vec::new();
        for (i, link) in self.uni.links.iter().enumerate() {
            if link.elabel != ae.elabel {
                continue;
            }
            let (lp, lc) = (q.label(link.parent), q.label(link.child));
            if lp == la && lc == lb {
                out.push((i, ae.src, ae.dst));
            }
            if lp == lb && lc == la {
                out.push((i, ae.dst, ae.src));
            }
        }
        out
    }

    /// Applies a batch of edge insertions; `g` must already contain them.
    pub fn insert_edges(&mut self, q: &QueryGraph, g: &LabeledGraph, edges: &[AppliedEdge]) {
        // Direct counter contributions are judged against membership as of
        // the start of the batch; everything that enters later reaches the
        // new edges through its own entry cascade (the graph already holds
        // them), so each contribution is counted exactly once.
        let mut direct = Vec::new();
        for ae in edges {
            for (li, vp, vc) in self.matching_links(q, g, ae) {
                let link = self.uni.links[li];
                direct.push((
                    li,
                    vp,
                    vc,
                    self.cim[link.parent as usize].contains(&vp),
                    self.c[link.child as usize].contains(&vc),
                ));
            }
        }
        let mut forward = VecDeque::new();
        let mut backward = VecDeque::new();
        for (li, vp, vc, vp_in_cim, vc_in_c) in direct {
            let link = self.uni.links[li];
            if vp_in_cim {
                if let Some(slot) = link.up_slot {
                    self.bump_up(link.child, vc, slot, &mut forward, &mut backward);
                }
            }
            if vc_in_c {
                self.bump_down(link.parent, vp, link.down_slot, &mut backward);
            }
        }
        while let Some((u, v)) = forward.pop_front() {
            // (u, v) just entered the implicit set: feed child rows.
            for li in self.uni.by_parent[u as usize].clone() {
                let link = self.uni.links[li];
                let Some(slot) = link.up_slot else { continue };
                for w in g.neighbors(v, Some(link.elabel), Some(q.label(link.child))) {
                    self.bump_up(link.child, w, slot, &mut forward, &mut backward);
                }
            }
        }
        while let Some((u, v)) = backward.pop_front() {
            // (u, v) just entered the explicit set: feed parent rows.
            for li in self.uni.by_child[u as usize].clone() {
                let link = self.uni.links[li];
                for w in g.neighbors(v, Some(link.elabel), Some(q.label(link.parent))) {
                    self.bump_down(link.parent, w, link.down_slot, &mut backward);
                }
            }
        }
    }

    /// Applies a batch of edge deletions; `g` must no longer contain them.
    pub fn delete_edges(&mut self, q: &QueryGraph, g: &LabeledGraph, edges: &[AppliedEdge]) {
        // Mirror of insertion: the removed edges' contributions are dropped
        // against start-of-batch membership; eviction cascades walk the
        // post-deletion adjacency, which no longer reaches through them.
        let mut direct = Vec::new();
        for ae in edges {
            for (li, vp, vc) in self.matching_links(q, g, ae) {
                let link = self.uni.links[li];
                direct.push((
                    li,
                    vp,
                    vc,
                    self.cim[link.parent as usize].contains(&vp),
                    self.c[link.child as usize].contains(&vc),
                ));
            }
        }
        let mut forward = VecDeque::new();
        let mut backward = VecDeque::new();
        for (li, vp, vc, vp_in_cim, vc_in_c) in direct {
            let link = self.uni.links[li];
            if vp_in_cim {
                if let Some(slot) = link.up_slot {
                    self.drop_up(link.child, vc, slot, &mut forward, &mut backward);
                }
            }
            if vc_in_c {
                self.drop_down(link.parent, vp, link.down_slot, &mut backward);
            }
        }
        while let Some((u, v)) = forward.pop_front() {
            for li in self.uni.by_parent[u as usize].clone() {
                let link = self.uni.links[li];
                let Some(slot) = link.up_slot else { continue };
                for w in g.neighbors(v, Some(link.elabel), Some(q.label(link.child))) {
                    self.drop_up(link.child, w, slot, &mut forward, &mut backward);
                }
            }
        }
        while let Some((u, v)) = backward.pop_front() {
            for li in self.uni.by_child[u as usize].clone() {
                let link = self.uni.links[li];
                for w in g.neighbors(v, Some(link.elabel), Some(q.label(link.parent))) {
                    self.drop_down(link.parent, w, link.down_slot, &mut backward);
                }
            }
        }
    }

    fn bump_up(
        &mut self,
        u: VertexId,
        v: VertexId,
        slot: usize,
        forward: &mut VecDeque<(VertexId, VertexId)>,
        backward: &mut VecDeque<(VertexId, VertexId)>,
    ) {
        let row = self.rows[u as usize]
            .get_mut(&v)
            .expect("row exists for every label match");
        row.up_cnt[slot] += 1;
        if row.up_cnt[slot] == 1 {
            row.up_nonzero += 1;
            if row.up_nonzero == row.up_cnt.len() && !row.in_cim {
                row.in_cim = true;
                let full_below = row.down_nonzero == row.down_cnt.len();
                self.cim[u as usize].insert(v);
                forward.push_back((u, v));
                if full_below {
                    self.enter_c(u, v, backward);
                }
            }
        }
    }

    fn bump_down(
        &mut self,
        u: VertexId,
        v: VertexId,
        slot: usize,
        backward: &mut VecDeque<(VertexId, VertexId)>,
    ) {
        let row = self.rows[u as usize]
            .get_mut(&v)
            .expect("row exists for every label match");
        row.down_cnt[slot] += 1;
        if row.down_cnt[slot] == 1 {
            row.down_nonzero += 1;
            if row.down_nonzero == row.down_cnt.len() && row.in_cim && !row.in_c {
                self.enter_c(u, v, backward);
            }
        }
    }

    fn enter_c(&mut self, u: VertexId, v: VertexId, backward: &mut VecDeque<(VertexId, VertexId)>) {
        let row = self.rows[u as usize].get_mut(&v).unwrap();
        debug_assert!(row.in_cim && !row.in_c);
        row.in_c = true;
        self.c[u as usize].insert(v);
        backward.push_back((u, v));
    }

    fn drop_up(
        &mut self,
        u: VertexId,
        v: VertexId,
        slot: usize,
        forward: &mut VecDeque<(VertexId, VertexId)>,
        backward: &mut VecDeque<(VertexId, VertexId)>,
    ) {
        let row = self.rows[u as usize]
            .get_mut(&v)
            .expect("row exists for every label match");
        debug_assert!(row.up_cnt[slot] > 0, "support drop without support");
        row.up_cnt[slot] -= 1;
        if row.up_cnt[slot] == 0 {
            row.up_nonzero -= 1;
            if row.in_cim {
                row.in_cim = false;
                let was_in_c = row.in_c;
                if was_in_c {
                    row.in_c = false;
                    self.c[u as usize].remove(&v);
                }
                self.cim[u as usize].remove(&v);
                forward.push_back((u, v));
                if was_in_c {
                    backward.push_back((u, v));
                }
            }
        }
    }

    fn drop_down(
        &mut self,
        u: VertexId,
        v: VertexId,
        slot: usize,
        backward: &mut VecDeque<(VertexId, VertexId)>,
    ) {
        let row = self.rows[u as usize]
            .get_mut(&v)
            .expect("row exists for every label match");
        debug_assert!(row.down_cnt[slot] > 0, "support drop without support");
        row.down_cnt[slot] -= 1;
        if row.down_cnt[slot] == 0 {
            row.down_nonzero -= 1;
            if row.in_c {
                row.in_c = false;
                self.c[u as usize].remove(&v);
                backward.push_back((u, v));
            }
        }
    }

    /// Registers a freshly created (isolated) data vertex.
    pub fn vertex_added(&mut self, q: &QueryGraph, g: &LabeledGraph, v: VertexId) {
        debug_assert_eq!(g.degree(v), 0);
        let label = g.label(v);
        for u in q.vertices().filter(|&u| q.label(u) == label) {
            let up_len = self.uni.parents(u).len();
            let down_len = self.uni.children(u).len();
            let in_cim = up_len == 0;
            let in_c = in_cim && down_len == 0;
            self.rows[u as usize].insert(
                v,
                Row {
                    up_cnt: vec![0; up_len],
                    up_nonzero: 0,
                    down_cnt: vec![0; down_len],
                    down_nonzero: 0,
                    in_cim,
                    in_c,
                },
            );
            if in_cim {
                self.cim[u as usize].insert(v);
            }
            if in_c {
                self.c[u as usize].insert(v);
            }
        }
    }

    /// Moves an isolated vertex's rows from its old label to the current
    /// one. With no incident edges there is nothing to cascade.
    pub fn vertex_relabeled(&mut self, q: &QueryGraph, g: &LabeledGraph, v: VertexId, old: Label) {
        debug_assert_eq!(g.degree(v), 0);
        for u in q.vertices().filter(|&u| q.label(u) == old) {
            self.rows[u as usize].remove(&v);
            self.cim[u as usize].remove(&v);
            self.c[u as usize].remove(&v);
        }
        self.vertex_added(q, g, v);
    }

    pub fn snapshot(&self, q: &QueryGraph, g: &LabeledGraph) -> IndexSnapshot {
        let n = q.vertex_count();
        let mut counters = Vec::with_capacity(n);
        for u in 0..n {
            let mut rows: Vec<(VertexId, Vec<u32>, Vec<u32>)> = self.rows[u]
                .iter()
                .map(|(&v, r)| (v, r.up_cnt.clone(), r.down_cnt.clone()))
                .collect();
            rows.sort_unstable_by_key(|r| r.0);
            counters.push(rows);
        }
        let mut edges = vec![Vec::new(); q.edge_count()];
        for link in &self.uni.links {
            let list = &mut edges[link.cano];
            for &vc in &self.cim[link.child as usize] {
                for vp in g.neighbors(vc, Some(link.elabel), Some(q.label(link.parent))) {
                    if self.cim[link.parent as usize].contains(&vp) {
                        list.push((vp, vc));
                    }
                }
            }
            list.sort_unstable();
            list.dedup();
        }
        IndexSnapshot {
            implicit: self.cim.iter().map(|s| s.iter().copied().collect()).collect(),
            explicit: self.c.iter().map(|s| s.iter().copied().collect()).collect(),
            counters,
            edges,
        }
    }
}

/// Enumeration view over the explicit sets: every extension must land in
/// `C(u)` of the target vertex, whether or not the traversed query edge is
/// part of the universe (non-universe edges are read from the graph but
/// filtered the same way).
pub struct IndexView<'a> {
    pub q: &'a QueryGraph,
    pub g: &'a LabeledGraph,
    pub idx: &'a CandidateIndex,
}

impl RelationView for IndexView<'_> {
    fn extensions(
        &self,
        eidx: usize,
        _from: VertexId,
        from_v: VertexId,
        to: VertexId,
    ) -> Vec<VertexId> {
        let e = self.q.edge(eidx);
        let mut out = self.g.neighbors(from_v, Some(e.label), Some(self.q.label(to)));
        out.retain(|w| self.idx.in_candidates(to, *w));
        out
    }

    fn admits(&self, eidx: usize, vsrc: VertexId, vdst: VertexId) -> bool {
        let e = self.q.edge(eidx);
        self.idx.in_candidates(e.src, vsrc)
            && self.idx.in_candidates(e.dst, vdst)
            && self.g.has_edge(vsrc, vdst, e.label)
    }

    fn first_candidates(&self, u: VertexId) -> Vec<VertexId> {
        self.idx.candidates(u).iter().copied().collect()
    }
}
