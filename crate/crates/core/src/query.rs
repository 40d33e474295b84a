//! Query patterns: small connected labeled graphs with a canonical edge
//! order, plus the rooted structures the index-based strategies derive from
//! them (spanning trees and BFS DAGs).
//!
//! The canonical order of a query's edges is the order of its `e` lines in
//! the query file. Incremental results are attributed to edge positions in
//! this order, so it is preserved through parsing and serialization.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{self, Label, LabeledGraph, VertexId, VertexMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueryEdge {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: Label,
}

impl QueryEdge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if v == self.src {
            self.dst
        } else {
            self.src
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.src == v || self.dst == v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGraph {
    graph: LabeledGraph,
    map: VertexMap,
    edges: Vec<QueryEdge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    Tree,
    /// Cyclic with average degree at most 3.
    Sparse,
    /// Average degree above 3.
    Dense,
}

impl QueryGraph {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let (graph, map) = graph::parse_graph_text(text, path)?;
        // Recover the file order of the e lines; parse_graph_text validated them.
        let mut edges = Vec::new();
        for raw in text.lines() {
            let line = match raw.find('#') {
                Some(p) => raw[..p].trim(),
                None => raw.trim(),
            };
            if !line.starts_with('e') {
                continue;
            }
            let mut it = line.split_whitespace().skip(1);
            let src: u64 = it.next().unwrap().parse().unwrap();
            let dst: u64 = it.next().unwrap().parse().unwrap();
            let label: Label = it.next().map(|r| r.parse().unwrap()).unwrap_or(0);
            edges.push(QueryEdge {
                src: map.resolve(src).unwrap(),
                dst: map.resolve(dst).unwrap(),
                label,
            });
        }
        let q = Self { graph, map, edges };
        q.validate()?;
        Ok(q)
    }

    /// Builds a query from parts; edges are inserted in the given order,
    /// which becomes the canonical order.
    pub fn from_parts(labels: &[Label], edges: &[(VertexId, VertexId, Label)]) -> Result<Self> {
        let mut graph = LabeledGraph::new();
        for &l in labels {
            graph.add_vertex(l);
        }
        let mut canonical = Vec::new();
        for &(a, b, el) in edges {
            graph.insert_edge(a, b, el)?;
            canonical.push(QueryEdge {
                src: a,
                dst: b,
                label: el,
            });
        }
        let q = Self {
            graph,
            map: VertexMap::identity(labels.len()),
            edges: canonical,
        };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        if self.graph.vertex_count() == 0 {
            return Err(Error::InvalidArgument("query has no vertices".into()));
        }
        // A single vertex is a valid (connected, edgeless) query for static
        // matching; the update framework separately refuses edgeless queries.
        let reached = self.graph.distances_within(0, self.graph.vertex_count() as u32);
        if reached.iter().any(Option::is_none) {
            return Err(Error::DisconnectedQuery);
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, u: VertexId) -> Label {
        self.graph.label(u)
    }

    pub fn degree(&self, u: VertexId) -> usize {
        self.graph.degree(u)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        self.graph.vertices()
    }

    pub fn adjacency(&self, u: VertexId) -> &[(VertexId, Label)] {
        self.graph.adjacency(u)
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn map(&self) -> &VertexMap {
        &self.map
    }

    /// Edges in canonical order.
    pub fn edges(&self) -> &[QueryEdge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &QueryEdge {
        &self.edges[idx]
    }

    /// Canonical index of the edge between `a` and `b`, if present.
    pub fn edge_index(&self, a: VertexId, b: VertexId) -> Option<usize> {
        self.edges
            .iter()
            .position(|e| (e.src == a && e.dst == b) || (e.src == b && e.dst == a))
    }

    /// Canonical indices of all edges matching the given labels, in either
    /// orientation. A data edge update is relevant to each of these.
    pub fn edges_matching(&self, la: Label, lb: Label, el: Label) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, e)| {
                e.label == el && {
                    let (s, d) = (self.label(e.src), self.label(e.dst));
                    (s == la && d == lb) || (s == lb && d == la)
                }
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() == self.vertex_count() - 1
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.vertex_count() as f64
    }

    pub fn classify(&self) -> QueryClass {
        if self.is_tree() {
            QueryClass::Tree
        } else if self.average_degree() <= 3.0 {
            QueryClass::Sparse
        } else {
            QueryClass::Dense
        }
    }

    pub fn is_path(&self) -> bool {
        self.is_tree() && self.vertices().all(|u| self.degree(u) <= 2)
    }

    pub fn is_star(&self) -> bool {
        let n = self.vertex_count();
        self.is_tree() && (n <= 2 || self.vertices().filter(|&u| self.degree(u) == 1).count() == n - 1)
    }

    pub fn is_cycle(&self) -> bool {
        self.edges.len() == self.vertex_count() && self.vertices().all(|u| self.degree(u) == 2)
    }

    /// Longest shortest path between any two query vertices.
    pub fn diameter(&self) -> u32 {
        let n = self.vertex_count() as u32;
        self.vertices()
            .map(|u| {
                self.graph
                    .distances_within(u, n)
                    .into_iter()
                    .flatten()
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Serializes with vertices ascending and edges in canonical order.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for u in self.vertices() {
            writeln!(out, "v {} {}", self.map.external(u), self.label(u)).unwrap();
        }
        for e in &self.edges {
            writeln!(
                out,
                "e {} {} {}",
                self.map.external(e.src),
                self.map.external(e.dst),
                e.label
            )
            .unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Number of data vertices carrying `label`.
pub fn label_frequency(g: &LabeledGraph, label: Label) -> usize {
    g.vertices().filter(|&v| g.label(v) == label).count()
}

/// Number of data edges a query edge can match on labels alone, counting
/// each data edge once regardless of orientation.
pub fn edge_frequency(g: &LabeledGraph, q: &QueryGraph, e: &QueryEdge) -> usize {
    let (la, lb) = (q.label(e.src), q.label(e.dst));
    let mut n = 0;
    for v in g.vertices() {
        let lv = g.label(v);
        for &(w, el) in g.adjacency(v) {
            if v < w && el == e.label {
                let lw = g.label(w);
                if (lv == la && lw == lb) || (lv == lb && lw == la) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// A rooted spanning tree of a query, tracking which canonical edges are
/// tree edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    root: VertexId,
    /// `(parent, edge label, canonical index)` per vertex; `None` at the root.
    parent: Vec<Option<(VertexId, Label, usize)>>,
    /// Children ascending by id, with edge label and canonical index.
    children: Vec<Vec<(VertexId, Label, usize)>>,
    tree_edge: Vec<bool>,
}

impl SpanningTree {
    /// Frequency-greedy construction: the root is the less frequent endpoint
    /// of the least frequent edge, and the tree grows by repeatedly
    /// attaching the frontier edge with the fewest label matches in `g`.
    /// Frequency ties during growth prefer the endpoint attached earliest,
    /// then the smaller new vertex, then the smaller canonical index.
    pub fn min_frequency(q: &QueryGraph, g: &LabeledGraph) -> Self {
        let (_, seed_edge) = q
            .edges()
            .iter()
            .enumerate()
            .map(|(idx, e)| ((edge_frequency(g, q, e), (e.src, e.dst), idx), e))
            .min_by_key(|&(key, _)| key)
            .unwrap();
        let root = [seed_edge.src, seed_edge.dst]
            .into_iter()
            .min_by_key(|&u| (label_frequency(g, q.label(u)), u))
            .unwrap();
        Self::min_frequency_with_root(q, g, root)
    }

    pub fn min_frequency_with_root(q: &QueryGraph, g: &LabeledGraph, root: VertexId) -> Self {
        let n = q.vertex_count();
        let freq: Vec<usize> = q.edges().iter().map(|e| edge_frequency(g, q, e)).collect();
        let mut attach_rank: Vec<Option<usize>> = vec![None; n];
        attach_rank[root as usize] = Some(0);
        let mut tree = Self::empty(root, n, q.edge_count());
        for step in 1..n {
            let mut best: Option<((usize, usize, VertexId, usize), usize)> = None;
            for (idx, e) in q.edges().iter().enumerate() {
                let (inside, outside) = match (attach_rank[e.src as usize], attach_rank[e.dst as usize])
                {
                    (Some(_), None) => (e.src, e.dst),
                    (None, Some(_)) => (e.dst, e.src),
                    _ => continue,
                };
                let key = (
                    freq[idx],
                    attach_rank[inside as usize].unwrap(),
                    outside,
                    idx,
                );
                if best.is_none_or(|(k, _)| key < k) {
                    best = Some((key, idx));
                }
            }
            let (key, idx) = best.expect("query is connected");
            let (_, _, new_vertex, _) = key;
            let e = q.edge(idx);
            let parent = e.other(new_vertex);
            attach_rank[new_vertex as usize] = Some(step);
            tree.attach(new_vertex, parent, e.label, idx);
        }
        tree
    }

    /// The whole query as a tree rooted at `root`; fails unless the query is
    /// a tree.
    pub fn of_tree(q: &QueryGraph, root: VertexId, algo: &'static str) -> Result<Self> {
        if !q.is_tree() {
            return Err(Error::NotATree(algo));
        }
        let n = q.vertex_count();
        let mut tree = Self::empty(root, n, q.edge_count());
        let mut seen = vec![false; n];
        seen[root as usize] = true;
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            for &(w, el) in q.adjacency(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    tree.attach(w, u, el, q.edge_index(u, w).unwrap());
                    stack.push(w);
                }
            }
        }
        Ok(tree)
    }

    fn empty(root: VertexId, n: usize, m: usize) -> Self {
        Self {
            root,
            parent: vec![None; n],
            children: vec![Vec::new(); n],
            tree_edge: vec![false; m],
        }
    }

    fn attach(&mut self, child: VertexId, parent: VertexId, elabel: Label, idx: usize) {
        self.parent[child as usize] = Some((parent, elabel, idx));
        let list = &mut self.children[parent as usize];
        let pos = list.partition_point(|&(c, _, _)| c < child);
        list.insert(pos, (child, elabel, idx));
        self.tree_edge[idx] = true;
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn parent(&self, u: VertexId) -> Option<(VertexId, Label, usize)> {
        self.parent[u as usize]
    }

    pub fn children(&self, u: VertexId) -> &[(VertexId, Label, usize)] {
        &self.children[u as usize]
    }

    pub fn is_tree_edge(&self, idx: usize) -> bool {
        self.tree_edge[idx]
    }

    pub fn non_tree_edges(&self) -> Vec<usize> {
        (0..self.tree_edge.len())
            .filter(|&i| !self.tree_edge[i])
            .collect()
    }

    /// Depth-first order from the root, visiting children in ascending id
    /// order.
    pub fn dfs_order(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.parent.len());
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &(c, _, _) in self.children(u).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// `u`, its parent, …, the root.
    pub fn path_to_root(&self, u: VertexId) -> Vec<VertexId> {
        let mut path = vec![u];
        let mut cur = u;
        while let Some((p, _, _)) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path
    }
}

/// A query directed acyclically by breadth-first discovery order from a
/// root chosen to maximize the DAG's height (ties to the smallest id).
/// Every canonical edge appears, directed from the earlier-discovered
/// endpoint to the later one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryDag {
    root: VertexId,
    /// Breadth-first discovery order; topological for the DAG.
    order: Vec<VertexId>,
    parents: Vec<Vec<(VertexId, Label, usize)>>,
    children: Vec<Vec<(VertexId, Label, usize)>>,
}

impl QueryDag {
    pub fn build(q: &QueryGraph) -> Self {
        let root = q
            .vertices()
            .max_by(|&a, &b| {
                Self::height_from(q, a)
                    .cmp(&Self::height_from(q, b))
                    .then(b.cmp(&a))
            })
            .unwrap();
        Self::rooted_at(q, root)
    }

    pub fn rooted_at(q: &QueryGraph, root: VertexId) -> Self {
        let order = Self::bfs_order(q, root);
        let mut rank = vec![0usize; q.vertex_count()];
        for (i, &u) in order.iter().enumerate() {
            rank[u as usize] = i;
        }
        let mut parents = vec![Vec::new(); q.vertex_count()];
        let mut children = vec![Vec::new(); q.vertex_count()];
        for (idx, e) in q.edges().iter().enumerate() {
            let (from, to) = if rank[e.src as usize] < rank[e.dst as usize] {
                (e.src, e.dst)
            } else {
                (e.dst, e.src)
            };
            children[from as usize].push((to, e.label, idx));
            parents[to as usize].push((from, e.label, idx));
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_by_key(|&(v, _, _)| v);
        }
        Self {
            root,
            order,
            parents,
            children,
        }
    }

    fn bfs_order(q: &QueryGraph, root: VertexId) -> Vec<VertexId> {
        let mut seen = vec![false; q.vertex_count()];
        seen[root as usize] = true;
        let mut order = vec![root];
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &(w, _) in q.adjacency(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    /// Length in edges of the longest root-to-descendant path of the DAG
    /// rooted at `root`.
    fn height_from(q: &QueryGraph, root: VertexId) -> usize {
        let order = Self::bfs_order(q, root);
        let mut rank = vec![0usize; q.vertex_count()];
        for (i, &u) in order.iter().enumerate() {
            rank[u as usize] = i;
        }
        let mut dist = vec![0usize; q.vertex_count()];
        let mut best = 0;
        for &u in &order {
            for &(w, _) in q.adjacency(u) {
                if rank[u as usize] < rank[w as usize] {
                    dist[w as usize] = dist[w as usize].max(dist[u as usize] + 1);
                    best = best.max(dist[w as usize]);
                }
            }
        }
        best
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn parents(&self, u: VertexId) -> &[(VertexId, Label, usize)] {
        &self.parents[u as usize]
    }

    pub fn children(&self, u: VertexId) -> &[(VertexId, Label, usize)] {
        &self.children[u as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // A 4-cycle with distinct vertex labels and, as data, a small graph in
    // which exactly one embedding exists.
    fn cycle_query() -> QueryGraph {
        QueryGraph::from_parts(&[0, 1, 2, 3], &[(0, 1, 0), (0, 2, 0), (1, 3, 0), (2, 3, 0)])
            .unwrap()
    }

    fn sample_data() -> LabeledGraph {
        let mut g = LabeledGraph::new();
        for l in [0, 0, 0, 0, 1, 2, 1, 2, 3, 3, 3, 3] {
            g.add_vertex(l);
        }
        for (a, b) in [
            (0, 4),
            (2, 6),
            (3, 6),
            (0, 5),
            (1, 5),
            (2, 5),
            (3, 7),
            (4, 8),
            (5, 8),
            (5, 9),
            (5, 10),
            (7, 11),
        ] {
            g.insert_edge(a, b, 0).unwrap();
        }
        g
    }

    #[test]
    fn canonical_order_survives_parse_and_serialize() {
        let text = "v 0 0\nv 1 1\nv 2 2\nv 3 3\ne 0 1 0\ne 0 2 0\ne 1 3 0\ne 2 3 0\n";
        let q = QueryGraph::parse(text, Path::new("<mem>")).unwrap();
        assert_eq!(q.edge(2), &QueryEdge { src: 1, dst: 3, label: 0 });
        assert_eq!(q.to_text(), text);
        assert_eq!(q.edge_index(3, 1), Some(2));
        assert_eq!(q.edge_index(1, 2), None);
    }

    #[test]
    fn parse_rejects_invalid_queries() {
        // Two vertices without an edge are disconnected; a lone vertex is fine.
        assert!(matches!(
            QueryGraph::parse("v 0 0\nv 1 0\n", Path::new("<mem>")),
            Err(Error::DisconnectedQuery)
        ));
        assert!(matches!(
            QueryGraph::parse("v 0 0\nv 1 0\nv 2 0\ne 0 1 0\n", Path::new("<mem>")),
            Err(Error::DisconnectedQuery)
        ));
        let lone = QueryGraph::parse("v 0 7\n", Path::new("<mem>")).unwrap();
        assert_eq!(lone.classify(), QueryClass::Tree);
        assert_eq!(lone.diameter(), 0);
    }

    #[test]
    fn classification() {
        let cycle = cycle_query();
        assert_eq!(cycle.classify(), QueryClass::Sparse);
        assert!(cycle.is_cycle());
        assert!(!cycle.is_tree());
        assert_eq!(cycle.diameter(), 2);

        let path = QueryGraph::from_parts(&[0, 0, 0], &[(0, 1, 0), (1, 2, 0)]).unwrap();
        assert_eq!(path.classify(), QueryClass::Tree);
        assert!(path.is_path());
        assert!(!path.is_cycle());
        assert_eq!(path.diameter(), 2);

        let star = QueryGraph::from_parts(&[0, 0, 0, 0], &[(0, 1, 0), (0, 2, 0), (0, 3, 0)])
            .unwrap();
        assert!(star.is_star());
        assert!(!star.is_path());

        // K4 sits exactly on the boundary (average degree 3).
        let k4 = QueryGraph::from_parts(
            &[0, 0, 0, 0],
            &[(0, 1, 0), (0, 2, 0), (0, 3, 0), (1, 2, 0), (1, 3, 0), (2, 3, 0)],
        )
        .unwrap();
        assert_eq!(k4.classify(), QueryClass::Sparse);
        assert_eq!(k4.diameter(), 1);

        let mut k5_edges = Vec::new();
        for a in 0..5u32 {
            for b in a + 1..5 {
                k5_edges.push((a, b, 0));
            }
        }
        let k5 = QueryGraph::from_parts(&[0; 5], &k5_edges).unwrap();
        assert_eq!(k5.classify(), QueryClass::Dense);
    }

    #[test]
    fn frequency_counts() {
        let q = cycle_query();
        let g = sample_data();
        assert_eq!(label_frequency(&g, 1), 2);
        assert_eq!(label_frequency(&g, 3), 4);
        let freqs: Vec<usize> = q.edges().iter().map(|e| edge_frequency(&g, &q, e)).collect();
        assert_eq!(freqs, vec![3, 4, 1, 4]);
    }

    #[test]
    fn greedy_spanning_tree_on_sample() {
        let q = cycle_query();
        let g = sample_data();
        let t = SpanningTree::min_frequency(&q, &g);
        assert_eq!(t.root(), 1);
        assert!(t.is_tree_edge(0) && t.is_tree_edge(2) && t.is_tree_edge(3));
        assert_eq!(t.non_tree_edges(), vec![1]);
        assert_eq!(t.dfs_order(), vec![1, 0, 3, 2]);
        assert_eq!(t.parent(2), Some((3, 0, 3)));
        assert_eq!(t.path_to_root(2), vec![2, 3, 1]);

        // Forcing the root changes which edge stays out of the tree.
        let t0 = SpanningTree::min_frequency_with_root(&q, &g, 0);
        assert_eq!(t0.non_tree_edges(), vec![3]);
        assert_eq!(t0.children(0), &[(1, 0, 0), (2, 0, 1)]);
    }

    #[test]
    fn root_comes_from_least_frequent_edge() {
        // u0's label is globally rarest, but the rarest edge is (u1,u2), so
        // the root must be one of its endpoints.
        let q = QueryGraph::from_parts(&[9, 1, 2], &[(0, 1, 0), (1, 2, 0)]).unwrap();
        let mut g = LabeledGraph::new();
        for l in [9, 1, 1, 1, 2, 2] {
            g.add_vertex(l);
        }
        for (a, b) in [(0, 1), (0, 2), (0, 3), (1, 4)] {
            g.insert_edge(a, b, 0).unwrap();
        }
        let t = SpanningTree::min_frequency(&q, &g);
        assert_eq!(t.root(), 2);
    }

    #[test]
    fn tree_query_rooting() {
        let path = QueryGraph::from_parts(&[0, 0, 0], &[(0, 1, 0), (1, 2, 0)]).unwrap();
        let t = SpanningTree::of_tree(&path, 0, "x").unwrap();
        assert_eq!(t.dfs_order(), vec![0, 1, 2]);
        assert_eq!(t.children(1), &[(2, 0, 1)]);
        let cyc = cycle_query();
        assert!(matches!(
            SpanningTree::of_tree(&cyc, 0, "x"),
            Err(Error::NotATree(_))
        ));
    }

    #[test]
    fn bfs_dag_on_cycle() {
        let q = cycle_query();
        let dag = QueryDag::build(&q);
        assert_eq!(dag.root(), 0);
        assert_eq!(dag.order(), &[0, 1, 2, 3]);
        assert_eq!(dag.children(0), &[(1, 0, 0), (2, 0, 1)]);
        assert_eq!(dag.parents(3), &[(1, 0, 2), (2, 0, 3)]);
        assert!(dag.parents(0).is_empty());
    }

    #[test]
    fn dag_root_maximizes_height() {
        // A path 0-1-2: rooting at an end gives height 2, at the middle 1.
        let path = QueryGraph::from_parts(&[0, 0, 0], &[(0, 1, 0), (1, 2, 0)]).unwrap();
        let dag = QueryDag::build(&path);
        assert_eq!(dag.root(), 0);
        assert_eq!(dag.order(), &[0, 1, 2]);
    }
}
