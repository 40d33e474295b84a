//! Shared fixtures and randomized instance generation for the integration
//! suites. Instances stay inside the oracle size guards (queries of at most
//! 6 vertices, data graphs of at most 30), so every stream can be checked
//! against brute force.

#![allow(dead_code)] // compiled once per test target; not every target uses everything

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use csm_core::enumerate::Semantics;
use csm_core::graph::{
    load_graph, parse_stream, EdgeUpdate, Label, LabeledGraph, UpdateOp, UpdateStream, VertexId,
    VertexMap,
};
use csm_core::ivm::{run_stream, CsmStrategy, RunConfig, RunStatus, Sign, StreamOutcome};
use csm_core::oracle::{oracle_matches, MatchSet};
use csm_core::query::QueryGraph;

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// The running scenario: 4-cycle query, 12-vertex graph, one insertion and
/// one deletion.
pub fn fig1() -> (QueryGraph, LabeledGraph, VertexMap, UpdateStream) {
    let q = QueryGraph::load(&data_path("fig1_query.txt")).unwrap();
    let (g, map) = load_graph(&data_path("fig1_graph.txt")).unwrap();
    let stream = parse_stream(&data_path("fig1_stream.txt")).unwrap();
    (q, g, map, stream)
}

pub fn fig1_tree_query() -> QueryGraph {
    QueryGraph::load(&data_path("fig1_tree_query.txt")).unwrap()
}

#[derive(Debug, Clone)]
pub struct StreamOptions {
    /// Upper bound on the number of update operations.
    pub ops: usize,
    /// Largest batch size; 1 produces one-op batches.
    pub max_batch: usize,
    pub insert_only: bool,
    /// Allow insertions that bring in brand-new labeled vertices.
    pub grow_vertices: bool,
}

impl Default for StreamOptions {
    fn default() -> Self {
        Self {
            ops: 50,
            max_batch: 1,
            insert_only: false,
            grow_vertices: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub query: QueryGraph,
    pub initial: LabeledGraph,
    pub map: VertexMap,
    pub stream: UpdateStream,
}

pub fn random_query(rng: &mut ChaCha8Rng, force_tree: bool) -> QueryGraph {
    let n = rng.gen_range(2..=6);
    let labels: Vec<Label> = (0..n).map(|_| rng.gen_range(0..4)).collect();
    let mut edges: Vec<(VertexId, VertexId, Label)> = (1..n)
        .map(|i| {
            (
                rng.gen_range(0..i) as VertexId,
                i as VertexId,
                rng.gen_range(0..2),
            )
        })
        .collect();
    if !force_tree && n >= 3 {
        for _ in 0..rng.gen_range(0..=3) {
            let i = rng.gen_range(0..n - 1);
            let j = rng.gen_range(i + 1..n);
            let (i, j) = (i as VertexId, j as VertexId);
            if !edges.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                edges.push((i, j, rng.gen_range(0..2)));
            }
        }
    }
    QueryGraph::from_parts(&labels, &edges).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> (LabeledGraph, VertexMap) {
    let n = rng.gen_range(8..=24);
    let mut g = LabeledGraph::new();
    for _ in 0..n {
        g.add_vertex(rng.gen_range(0..4));
    }
    let p: f64 = rng.gen_range(0.06..0.22);
    for i in 0..n as VertexId {
        for j in i + 1..n as VertexId {
            if rng.gen_bool(p) {
                g.insert_edge(i, j, rng.gen_range(0..2)).unwrap();
            }
        }
    }
    (g, VertexMap::identity(n))
}

/// A stream that is valid against `initial`: deletions target edges that
/// exist when their batch starts, insertions target absent pairs, and no
/// batch touches the same edge twice. Grown vertices carry endpoint labels
/// and keep the graph at 30 vertices or fewer.
pub fn random_stream(
    rng: &mut ChaCha8Rng,
    initial: &LabeledGraph,
    map: &VertexMap,
    opts: &StreamOptions,
) -> UpdateStream {
    let mut g = initial.clone();
    let mut m = map.clone();
    let mut next_ext: u64 = (0..m.len())
        .map(|i| m.external(i as VertexId))
        .max()
        .map_or(0, |x| x + 1);
    let total = rng.gen_range(1..=opts.ops);
    let mut stream = UpdateStream::default();
    let mut made = 0;
    while made < total {
        let want = rng.gen_range(1..=opts.max_batch).min(total - made);
        let mut batch: Vec<EdgeUpdate> = Vec::new();
        // One touch per vertex pair and batch; the graph holds at most one
        // edge per pair, so this keeps every batch applicable as a unit.
        let mut used: Vec<(u64, u64)> = Vec::new();
        let key = |a: u64, b: u64| (a.min(b), a.max(b));
        for _ in 0..want {
            let mut placed = false;
            for _ in 0..60 {
                let roll: f64 = rng.gen();
                if !opts.insert_only && roll < 0.35 && g.edge_count() > 0 {
                    let &(a, b, el) = g.edges().choose(rng).unwrap();
                    let (ea, eb) = (m.external(a), m.external(b));
                    if used.contains(&key(ea, eb)) {
                        continue;
                    }
                    used.push(key(ea, eb));
                    batch.push(EdgeUpdate {
                        op: UpdateOp::Delete,
                        src: ea,
                        dst: eb,
                        elabel: el,
                        src_label: None,
                        dst_label: None,
                    });
                    placed = true;
                    break;
                }
                if opts.grow_vertices && roll >= 0.85 && g.vertex_count() < 30 {
                    let partner = rng.gen_range(0..g.vertex_count()) as VertexId;
                    let ext = next_ext;
                    next_ext += 1;
                    used.push(key(ext, m.external(partner)));
                    batch.push(EdgeUpdate {
                        op: UpdateOp::Insert,
                        src: ext,
                        dst: m.external(partner),
                        elabel: rng.gen_range(0..2),
                        src_label: Some(rng.gen_range(0..4)),
                        dst_label: Some(g.label(partner)),
                    });
                    placed = true;
                    break;
                }
                let n = g.vertex_count();
                let a = rng.gen_range(0..n) as VertexId;
                let b = rng.gen_range(0..n) as VertexId;
                if a == b || g.edge_label(a, b).is_some() {
                    continue;
                }
                let el = rng.gen_range(0..2);
                let (ea, eb) = (m.external(a), m.external(b));
                if used.contains(&key(ea, eb)) {
                    continue;
                }
                used.push(key(ea, eb));
                batch.push(EdgeUpdate {
                    op: UpdateOp::Insert,
                    src: ea,
                    dst: eb,
                    elabel: el,
                    src_label: None,
                    dst_label: None,
                });
                placed = true;
                break;
            }
            if !placed {
                break;
            }
        }
        if batch.is_empty() {
            break;
        }
        made += batch.len();
        apply_batch(&mut g, &mut m, &batch);
        stream.batches.push(batch);
    }
    stream
}

pub fn random_instance(seed: u64, tree_query: bool, opts: &StreamOptions) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let query = random_query(&mut rng, tree_query);
    let (initial, map) = random_graph(&mut rng);
    let stream = random_stream(&mut rng, &initial, &map, opts);
    Instance {
        seed,
        query,
        initial,
        map,
        stream,
    }
}

/// Applies one batch the way the update framework does: deletions first,
/// then insertions, creating labeled vertices on demand.
pub fn apply_batch(g: &mut LabeledGraph, map: &mut VertexMap, batch: &[EdgeUpdate]) {
    for u in batch.iter().filter(|u| u.op == UpdateOp::Delete) {
        let a = map.resolve(u.src).unwrap();
        let b = map.resolve(u.dst).unwrap();
        g.delete_edge(a, b, u.elabel).unwrap();
    }
    for u in batch.iter().filter(|u| u.op == UpdateOp::Insert) {
        let mut endpoint = |ext: u64, l: Option<Label>| match map.resolve(ext) {
            Some(v) => v,
            None => {
                let v = g.add_vertex(l.unwrap_or(0));
                map.insert(ext).unwrap();
                v
            }
        };
        let a = endpoint(u.src, u.src_label);
        let b = endpoint(u.dst, u.dst_label);
        g.insert_edge(a, b, u.elabel).unwrap();
    }
}

pub type Event = (usize, Sign, Vec<VertexId>);

/// Initializes `strategy` on the instance's initial graph and plays the
/// whole stream, collecting every reported match.
pub fn run_collect(
    inst: &Instance,
    strategy: &mut dyn CsmStrategy,
    semantics: Semantics,
) -> (StreamOutcome, Vec<Event>) {
    strategy.initialize(&inst.query, &inst.initial).unwrap();
    let mut g = inst.initial.clone();
    let mut map = inst.map.clone();
    let mut events = Vec::new();
    let cfg = RunConfig::new(semantics);
    let out = run_stream(
        &inst.query,
        &mut g,
        &mut map,
        &inst.stream,
        strategy,
        &cfg,
        &mut |m| events.push((m.batch, m.sign, m.assignment.to_vec())),
    )
    .unwrap();
    assert_eq!(out.status, RunStatus::Solved, "seed {}", inst.seed);
    assert_eq!(out.batches_processed, inst.stream.batches.len());
    (out, events)
}

/// Per-batch signed match deltas computed by brute force over the evolving
/// graph.
pub fn oracle_batch_deltas(inst: &Instance, semantics: Semantics) -> Vec<(MatchSet, MatchSet)> {
    let q = &inst.query;
    let mut g = inst.initial.clone();
    let mut map = inst.map.clone();
    let mut current = oracle_matches(q, &g, semantics).unwrap();
    let mut deltas = Vec::with_capacity(inst.stream.batches.len());
    for batch in &inst.stream.batches {
        apply_batch(&mut g, &mut map, batch);
        let next = oracle_matches(q, &g, semantics).unwrap();
        let pos: MatchSet = next.difference(&current).cloned().collect();
        let neg: MatchSet = current.difference(&next).cloned().collect();
        deltas.push((pos, neg));
        current = next;
    }
    deltas
}

/// Splits a flat event list by batch, refusing duplicate emissions.
pub fn events_by_batch(events: &[Event], batches: usize, ctx: &str) -> Vec<(MatchSet, MatchSet)> {
    let mut grouped = vec![(MatchSet::new(), MatchSet::new()); batches];
    for (b, sign, m) in events {
        let slot = match sign {
            Sign::Positive => &mut grouped[*b].0,
            Sign::Negative => &mut grouped[*b].1,
        };
        assert!(
            slot.insert(m.clone()),
            "{ctx}: duplicate {sign:?} emission {m:?} in batch {b}"
        );
    }
    grouped
}

/// Full oracle check of a collected run: every batch's positive and
/// negative sets must equal the brute-force delta.
pub fn check_events(inst: &Instance, events: &[Event], expected: &[(MatchSet, MatchSet)], ctx: &str) {
    let grouped = events_by_batch(events, expected.len(), ctx);
    for (k, (got, want)) in grouped.iter().zip(expected).enumerate() {
        assert_eq!(got.0, want.0, "{ctx}: batch {k} positives (seed {})", inst.seed);
        assert_eq!(got.1, want.1, "{ctx}: batch {k} negatives (seed {})", inst.seed);
    }
}

/// Whether a strategy can process this instance at all, mirroring the
/// capability flags the framework enforces.
pub fn applicable(strategy: &dyn CsmStrategy, inst: &Instance) -> bool {
    let caps = strategy.capabilities();
    if caps.trees_only && !inst.query.is_tree() {
        return false;
    }
    let has_delete = inst
        .stream
        .batches
        .iter()
        .flatten()
        .any(|u| u.op == UpdateOp::Delete);
    !(has_delete && !caps.edge_delete)
}
