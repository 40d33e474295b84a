//! Workload preparation: carving update streams out of a static graph,
//! re-labeling vertices from a target label distribution, and extracting
//! query graphs by random walks.
//!
//! Everything here is seeded; the same inputs and seed always produce the
//! same stream, labels, or query set. Generators that depend on luck (star
//! centers with enough neighbors, induced subgraphs of the right density)
//! retry with a bounded budget and report [`Error::Workload`] when the
//! graph cannot supply the requested shape.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{
    EdgeUpdate, Label, LabeledGraph, UpdateOp, UpdateStream, VertexId, VertexMap,
};
use crate::query::{QueryClass, QueryGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamKind {
    /// Withhold the sampled edges from the initial graph and insert them.
    Insert,
    /// Keep the full graph and delete the sampled edges.
    Delete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// Sample the tail of the edge order, preserving order.
    Suffix,
    /// Sample uniformly without replacement, in random order.
    Random,
}

#[derive(Debug, Clone)]
pub struct StreamSpec {
    /// Percentage of edges to stream, in (0, 100].
    pub rate: f64,
    pub kind: StreamKind,
    pub mode: StreamMode,
    pub seed: u64,
}

/// Splits a graph into an initial graph and an update stream, sampling
/// `rate` percent of the edges (rounded, so the partition is within one
/// edge of the exact fraction). The initial graph keeps the full vertex
/// set, so insert streams need no endpoint labels. Edge order is the
/// sorted [`LabeledGraph::edges`] order; use [`sample_stream_ordered`] to
/// honor a file's own edge order.
pub fn sample_stream(
    g: &LabeledGraph,
    map: &VertexMap,
    spec: &StreamSpec,
) -> Result<(LabeledGraph, UpdateStream)> {
    sample_stream_ordered(g, map, &g.edges(), spec)
}

/// As [`sample_stream`], with the edge order supplied by the caller.
/// `order` must list every edge of `g` exactly once.
pub fn sample_stream_ordered(
    g: &LabeledGraph,
    map: &VertexMap,
    order: &[(VertexId, VertexId, Label)],
    spec: &StreamSpec,
) -> Result<(LabeledGraph, UpdateStream)> {
    if !(spec.rate > 0.0 && spec.rate <= 100.0) {
        return Err(Error::InvalidArgument(format!(
            "stream rate must be in (0, 100], got {}",
            spec.rate
        )));
    }
    debug_assert_eq!(order.len(), g.edge_count(), "edge order must cover the graph");
    let m = order.len();
    let streamed = ((m as f64) * spec.rate / 100.0).round() as usize;
    let streamed = streamed.min(m);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let picks: Vec<usize> = match spec.mode {
        StreamMode::Suffix => (m - streamed..m).collect(),
        StreamMode::Random => index::sample(&mut rng, m, streamed).into_vec(),
    };

    let op = match spec.kind {
        StreamKind::Insert => UpdateOp::Insert,
        StreamKind::Delete => UpdateOp::Delete,
    };
    let mut initial = g.clone();
    let mut stream = UpdateStream::default();
    for &i in &picks {
        let (a, b, el) = order[i];
        if spec.kind == StreamKind::Insert {
            initial.delete_edge(a, b, el)?;
        }
        stream.batches.push(vec![EdgeUpdate {
            op,
            src: map.external(a),
            dst: map.external(b),
            elabel: el,
            src_label: None,
            dst_label: None,
        }]);
    }
    Ok((initial, stream))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelDistribution {
    Uniform,
    /// Probability grows linearly with the label value.
    Linear,
    /// Probability falls off as 1/rank; label 0 is the most frequent.
    Zipfian,
}

impl LabelDistribution {
    fn weights(self, k: u32) -> Vec<f64> {
        (1..=k)
            .map(|i| match self {
                LabelDistribution::Uniform => 1.0,
                LabelDistribution::Linear => i as f64,
                LabelDistribution::Zipfian => 1.0 / i as f64,
            })
            .collect()
    }
}

/// Re-labels every vertex with a draw from `0..k` under the distribution.
/// Meant for offline workload preparation, before any strategy has indexed
/// the graph.
pub fn assign_labels(
    g: &mut LabeledGraph,
    k: u32,
    dist: LabelDistribution,
    seed: u64,
) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("label count must be at least 1".into()));
    }
    let table = WeightedIndex::new(dist.weights(k)).expect("weights are positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in 0..g.vertex_count() as VertexId {
        g.set_label(v, table.sample(&mut rng) as Label);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryShape {
    Tree,
    Sparse,
    Dense,
    Path,
    Star,
    Cycle,
}

/// Extracts `count` connected queries of the given shape and vertex count
/// from `g`, inheriting vertex and edge labels. Tree, path, star and cycle
/// queries are built to shape; sparse and dense queries are induced
/// subgraphs of random connected vertex sets, kept when they classify as
/// requested. Duplicates are possible on small graphs.
pub fn extract_queries(
    g: &LabeledGraph,
    shape: QueryShape,
    size: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<QueryGraph>> {
    if size < 2 {
        return Err(Error::InvalidArgument("query size must be at least 2".into()));
    }
    match shape {
        QueryShape::Cycle | QueryShape::Sparse if size < 3 => {
            return Err(Error::InvalidArgument(format!(
                "{shape:?} queries need at least 3 vertices"
            )));
        }
        // Average degree above 3 forces n(n-1)/2 >= m > 3n/2, so n >= 5.
        QueryShape::Dense if size < 5 => {
            return Err(Error::InvalidArgument(
                "dense queries need at least 5 vertices".into(),
            ));
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let budget = 200 * count + 1000;
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Workload(format!(
                "could not extract {count} {shape:?} queries of {size} vertices \
                 in {budget} attempts"
            )));
        }
        let q = match shape {
            QueryShape::Path => extract_path(g, &mut rng, size),
            QueryShape::Star => extract_star(g, &mut rng, size),
            QueryShape::Cycle => extract_cycle(g, &mut rng, size),
            QueryShape::Tree => extract_tree(g, &mut rng, size),
            QueryShape::Sparse => extract_classified(g, &mut rng, size, QueryClass::Sparse),
            QueryShape::Dense => extract_classified(g, &mut rng, size, QueryClass::Dense),
        };
        if let Some(q) = q {
            out.push(q?);
        }
    }
    Ok(out)
}

/// A connected vertex set grown edge by edge, with the spanning edges used.
/// Vertices are distinct; indices in the edge list refer to pick order.
fn grow_connected(
    g: &LabeledGraph,
    rng: &mut ChaCha8Rng,
    size: usize,
) -> Option<(Vec<VertexId>, Vec<(VertexId, VertexId, Label)>)> {
    let start = random_endpoint(g, rng)?;
    let mut picked = vec![start];
    let mut seen = HashSet::from([start]);
    let mut tree = Vec::new();
    while picked.len() < size {
        let mut frontier = Vec::new();
        for (i, &v) in picked.iter().enumerate() {
            for &(w, el) in g.adjacency(v) {
                if !seen.contains(&w) {
                    frontier.push((i, w, el));
                }
            }
        }
        let &(i, w, el) = frontier.choose(rng)?;
        tree.push((i as VertexId, picked.len() as VertexId, el));
        seen.insert(w);
        picked.push(w);
    }
    Some((picked, tree))
}

fn random_endpoint(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> Option<VertexId> {
    let candidates: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) > 0).collect();
    candidates.choose(rng).copied()
}

fn random_simple_path(
    g: &LabeledGraph,
    rng: &mut ChaCha8Rng,
    size: usize,
) -> Option<Vec<VertexId>> {
    let start = random_endpoint(g, rng)?;
    let mut path = vec![start];
    let mut seen = HashSet::from([start]);
    while path.len() < size {
        let cur = *path.last().unwrap();
        let next: Vec<(VertexId, Label)> = g
            .adjacency(cur)
            .iter()
            .copied()
            .filter(|(w, _)| !seen.contains(w))
            .collect();
        let &(w, _) = next.choose(rng)?;
        seen.insert(w);
        path.push(w);
    }
    Some(path)
}

fn query_of(
    g: &LabeledGraph,
    picked: &[VertexId],
    edges: &[(VertexId, VertexId, Label)],
) -> Result<QueryGraph> {
    let labels: Vec<Label> = picked.iter().map(|&v| g.label(v)).collect();
    QueryGraph::from_parts(&labels, edges)
}

fn extract_path(g: &LabeledGraph, rng: &mut ChaCha8Rng, size: usize) -> Option<Result<QueryGraph>> {
    let picked = random_simple_path(g, rng, size)?;
    let edges: Vec<(VertexId, VertexId, Label)> = picked
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let el = g.edge_label(w[0], w[1]).expect("walked edge exists");
            (i as VertexId, i as VertexId + 1, el)
        })
        .collect();
    let q = query_of(g, &picked, &edges);
    debug_assert!(q.as_ref().map(is_path).unwrap_or(true));
    Some(q)
}

fn extract_cycle(g: &LabeledGraph, rng: &mut ChaCha8Rng, size: usize) -> Option<Result<QueryGraph>> {
    let picked = random_simple_path(g, rng, size)?;
    let closing = g.edge_label(picked[size - 1], picked[0])?;
    let mut edges: Vec<(VertexId, VertexId, Label)> = picked
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let el = g.edge_label(w[0], w[1]).expect("walked edge exists");
            (i as VertexId, i as VertexId + 1, el)
        })
        .collect();
    edges.push((size as VertexId - 1, 0, closing));
    let q = query_of(g, &picked, &edges);
    debug_assert!(q.as_ref().map(is_cycle).unwrap_or(true));
    Some(q)
}

fn extract_star(g: &LabeledGraph, rng: &mut ChaCha8Rng, size: usize) -> Option<Result<QueryGraph>> {
    let center = random_endpoint(g, rng)?;
    let adj = g.adjacency(center);
    if adj.len() < size - 1 {
        return None;
    }
    let mut picked = vec![center];
    let mut edges = Vec::with_capacity(size - 1);
    for i in index::sample(rng, adj.len(), size - 1) {
        let (w, el) = adj[i];
        edges.push((0, picked.len() as VertexId, el));
        picked.push(w);
    }
    let q = query_of(g, &picked, &edges);
    debug_assert!(q.as_ref().map(is_star).unwrap_or(true));
    Some(q)
}

fn extract_tree(g: &LabeledGraph, rng: &mut ChaCha8Rng, size: usize) -> Option<Result<QueryGraph>> {
    let (picked, tree) = grow_connected(g, rng, size)?;
    let q = query_of(g, &picked, &tree);
    debug_assert!(q.as_ref().map(|q| q.is_tree()).unwrap_or(true));
    Some(q)
}

fn extract_classified(
    g: &LabeledGraph,
    rng: &mut ChaCha8Rng,
    size: usize,
    want: QueryClass,
) -> Option<Result<QueryGraph>> {
    let (picked, _) = grow_connected(g, rng, size)?;
    let mut edges = Vec::new();
    for i in 0..picked.len() {
        for j in i + 1..picked.len() {
            if let Some(el) = g.edge_label(picked[i], picked[j]) {
                edges.push((i as VertexId, j as VertexId, el));
            }
        }
    }
    match query_of(g, &picked, &edges) {
        Ok(q) if q.classify() == want => Some(Ok(q)),
        Ok(_) => None,
        Err(e) => Some(Err(e)),
    }
}

fn degree_counts(q: &QueryGraph) -> (usize, usize, usize) {
    let mut ones = 0;
    let mut twos = 0;
    let mut other = 0;
    for u in q.vertices() {
        match q.degree(u) {
            1 => ones += 1,
            2 => twos += 1,
            _ => other += 1,
        }
    }
    (ones, twos, other)
}

fn is_path(q: &QueryGraph) -> bool {
    let n = q.vertex_count();
    let (ones, twos, other) = degree_counts(q);
    q.edge_count() == n - 1 && ones == 2 && twos == n - 2 && other == 0
}

fn is_star(q: &QueryGraph) -> bool {
    let n = q.vertex_count();
    q.edge_count() == n - 1
        && q.vertices().filter(|&u| q.degree(u) == n - 1).count() >= 1
        && q.vertices().filter(|&u| q.degree(u) == 1).count() >= n - 1
}

fn is_cycle(q: &QueryGraph) -> bool {
    let n = q.vertex_count();
    let (_, twos, _) = degree_counts(q);
    n >= 3 && q.edge_count() == n && twos == n
}

/// The seed to use: the `CSM_SEED` environment variable when set, otherwise
/// `flag`. A set but unparseable value is an error, not a silent fallback.
pub fn effective_seed(flag: u64) -> Result<u64> {
    match std::env::var("CSM_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("CSM_SEED must be an integer, got {raw:?}"))
        }),
        Err(_) => Ok(flag),
    }
}
