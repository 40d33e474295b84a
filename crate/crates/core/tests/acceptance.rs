//! End-to-end acceptance gate. Each test covers one release criterion and
//! prints a single PASS line with its headline numbers; a failed assert is
//! the corresponding FAIL.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use csm_core::algo::iedyn::IeDyn;
use csm_core::algo::sjtree::SjTree;
use csm_core::algo::symbi::SymBi;
use csm_core::algo::turboflux::TurboFlux;
use csm_core::algo::{strategy_by_name, STRATEGY_NAMES};
use csm_core::analysis::{baseline_sets, match_projections, modified_tree_pruning};
use csm_core::candidates::{CandidateIndex, Universe};
use csm_core::enumerate::{
    Counters, EnumerationConfig, Enumerator, GraphView, OrderMode, Outcome, Semantics,
};
use csm_core::error::Error;
use csm_core::graph::{
    EdgeUpdate, LabeledGraph, UpdateOp, UpdateStream, VertexId, VertexMap,
};
use csm_core::ivm::{
    run_stream, AppliedEdge, CsmStrategy, DeltaPlan, RunConfig, RunStatus, Sign,
};
use csm_core::metrics::{individual_speedup, p95, relative_performance, Status};
use csm_core::oracle::{oracle_matches, MatchSet};
use csm_core::query::{QueryDag, QueryGraph, SpanningTree};
use csm_core::workload::{assign_labels, extract_queries, LabelDistribution, QueryShape};

use common::{Instance, StreamOptions};

const BOTH: [Semantics; 2] = [Semantics::Homomorphism, Semantics::Isomorphism];

/// Strategies without capability restrictions on the scenario stream.
const UNRESTRICTED: [&str; 7] = ["im", "gf", "tf", "sym", "o-gf", "o-dyn", "o-tf"];

fn fig1_instance() -> Instance {
    let (query, initial, map, stream) = common::fig1();
    Instance {
        seed: 0,
        query,
        initial,
        map,
        stream,
    }
}

#[test]
fn acceptance_01_scenario_graph_exactness() {
    let started = Instant::now();
    let inst = fig1_instance();
    let (q, g) = (&inst.query, &inst.initial);

    // The per-edge label filter relations of the scenario graph.
    let relation = |k: usize| -> BTreeSet<(VertexId, VertexId)> {
        let e = q.edge(k);
        let mut r = BTreeSet::new();
        for &(a, b, el) in &g.edges() {
            for (x, y) in [(a, b), (b, a)] {
                if el == e.label && g.label(x) == q.label(e.src) && g.label(y) == q.label(e.dst)
                {
                    r.insert((x, y));
                }
            }
        }
        r
    };
    let pairs = |v: &[(VertexId, VertexId)]| v.iter().copied().collect::<BTreeSet<_>>();
    assert_eq!(relation(0), pairs(&[(0, 4), (2, 6), (3, 6)]));
    assert_eq!(relation(1), pairs(&[(0, 5), (1, 5), (2, 5), (3, 7)]));
    assert_eq!(relation(2), pairs(&[(4, 8)]));
    assert_eq!(relation(3), pairs(&[(5, 8), (5, 9), (5, 10), (7, 11)]));

    // Full stream: exactly one new match on the insertion, one dissolved
    // match on the deletion, for every strategy that supports both ops.
    for name in UNRESTRICTED {
        for sem in BOTH {
            let mut s = strategy_by_name(name, sem).unwrap();
            let (_, events) = common::run_collect(&inst, s.as_mut(), sem);
            assert_eq!(
                events,
                vec![
                    (0, Sign::Positive, vec![2, 6, 5, 10]),
                    (1, Sign::Negative, vec![0, 4, 5, 8]),
                ],
                "{name} {sem:?}"
            );
        }
    }

    // SJ-Tree processes the insertion prefix and refuses the deletion.
    let mut prefix = inst.clone();
    prefix.stream.batches.truncate(1);
    let mut sj = strategy_by_name("sj", Semantics::Isomorphism).unwrap();
    let (_, events) = common::run_collect(&prefix, sj.as_mut(), Semantics::Isomorphism);
    assert_eq!(events, vec![(0, Sign::Positive, vec![2, 6, 5, 10])]);

    let mut sj = strategy_by_name("sj", Semantics::Isomorphism).unwrap();
    sj.initialize(q, g).unwrap();
    let mut g2 = g.clone();
    let mut m2 = inst.map.clone();
    let err = run_stream(
        q,
        &mut g2,
        &mut m2,
        &inst.stream,
        sj.as_mut(),
        &RunConfig::new(Semantics::Isomorphism),
        &mut |_| {},
    )
    .unwrap_err();
    assert!(matches!(err, Error::Capability { algo: "sj", .. }));

    // IEDyn refuses the cyclic query outright and handles its spanning
    // tree, where the insertion completes two matches.
    let mut dy = IeDyn::new();
    assert!(matches!(dy.initialize(q, g), Err(Error::NotATree(_))));

    let mut tree_inst = inst.clone();
    tree_inst.query = common::fig1_tree_query();
    for sem in BOTH {
        let mut dy = IeDyn::new();
        let (_, events) = common::run_collect(&tree_inst, &mut dy, sem);
        let grouped = common::events_by_batch(&events, 2, "dyn tree");
        let two: MatchSet = [vec![2, 6, 5, 10], vec![3, 6, 7, 10]].into_iter().collect();
        let one: MatchSet = [vec![0, 4, 5, 8]].into_iter().collect();
        assert_eq!(grouped[0], (two, MatchSet::new()), "{sem:?}");
        assert_eq!(grouped[1], (MatchSet::new(), one), "{sem:?}");
    }

    assert!(started.elapsed() < Duration::from_secs(1));
    println!(
        "acceptance 01 scenario graph exactness: PASS ({:?})",
        started.elapsed()
    );
}

fn criterion_2_instance(i: u64) -> Instance {
    let opts = StreamOptions {
        ops: 50,
        max_batch: 1,
        insert_only: i % 4 == 0,
        grow_vertices: true,
    };
    common::random_instance(0xC2_0000 + i, i % 2 == 0, &opts)
}

#[test]
fn acceptance_02_randomized_streams_match_brute_force() {
    let started = Instant::now();
    let mut runs = 0usize;
    let mut batches = 0usize;
    for i in 0..1000 {
        let inst = criterion_2_instance(i);
        for sem in BOTH {
            let expected = common::oracle_batch_deltas(&inst, sem);
            for name in STRATEGY_NAMES {
                let mut s = strategy_by_name(name, sem).unwrap();
                if !common::applicable(s.as_ref(), &inst) {
                    continue;
                }
                let ctx = format!("{name} {sem:?} seed {}", inst.seed);
                let (_, events) = common::run_collect(&inst, s.as_mut(), sem);
                common::check_events(&inst, &events, &expected, &ctx);
                runs += 1;
                batches += expected.len();
            }
        }
    }
    assert!(runs >= 2000, "only {runs} verified runs");
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    println!(
        "acceptance 02 randomized streams match brute force: PASS \
         ({runs} runs, {batches} verified batches, {elapsed:?})"
    );
}

/// Plays the stream one batch at a time, calling `after` with the strategy
/// and the graph as of that batch.
fn drive_batches<S: CsmStrategy>(
    inst: &Instance,
    s: &mut S,
    mut after: impl FnMut(&S, &LabeledGraph),
) {
    s.initialize(&inst.query, &inst.initial).unwrap();
    let mut g = inst.initial.clone();
    let mut map = inst.map.clone();
    let cfg = RunConfig::new(Semantics::Homomorphism);
    for batch in &inst.stream.batches {
        let one = UpdateStream {
            batches: vec![batch.clone()],
        };
        let out = run_stream(&inst.query, &mut g, &mut map, &one, s, &cfg, &mut |_| {}).unwrap();
        assert_eq!(out.status, RunStatus::Solved);
        after(s, &g);
    }
}

#[test]
fn acceptance_03_incremental_index_equals_rebuild() {
    let started = Instant::now();
    let mut compared = 0usize;
    for i in 0..1000 {
        let inst = criterion_2_instance(i);
        let q = &inst.query;

        let mut tf = TurboFlux::new();
        drive_batches(&inst, &mut tf, |s, g| {
            let rebuilt = CandidateIndex::build(q, g, s.index().universe().clone());
            assert_eq!(s.snapshot(q, g), rebuilt.snapshot(q, g), "tf seed {}", inst.seed);
            compared += 1;
        });

        let mut sym = SymBi::new();
        drive_batches(&inst, &mut sym, |s, g| {
            let rebuilt = CandidateIndex::build(q, g, s.index().universe().clone());
            assert_eq!(s.snapshot(q, g), rebuilt.snapshot(q, g), "sym seed {}", inst.seed);
            compared += 1;
        });

        if q.is_tree() {
            let mut dy = IeDyn::new();
            drive_batches(&inst, &mut dy, |s, g| {
                let rebuilt = CandidateIndex::build(q, g, s.index().universe().clone());
                assert_eq!(s.snapshot(q, g), rebuilt.snapshot(q, g), "dyn seed {}", inst.seed);
                compared += 1;
            });
        }
    }
    println!(
        "acceptance 03 incremental index equals rebuild: PASS \
         ({compared} snapshots compared, {:?})",
        started.elapsed()
    );
}

#[test]
fn acceptance_04_candidate_set_containment() {
    let mut trees = 0usize;
    let mut cyclic = 0usize;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4_0000 + i);
        let q = common::random_query(&mut rng, i % 2 == 0);
        let (g, _) = common::random_graph(&mut rng);
        let root = rng.gen_range(0..q.vertex_count()) as VertexId;

        let dag_idx = CandidateIndex::build(
            &q,
            &g,
            Universe::from_dag(&q, &QueryDag::rooted_at(&q, root)),
        );
        let tree_idx = CandidateIndex::build(
            &q,
            &g,
            Universe::from_tree(&q, &SpanningTree::min_frequency_with_root(&q, &g, root)),
        );
        let base = baseline_sets(&q, &g);

        for u in q.vertices() {
            assert!(
                dag_idx.candidates(u).len() <= tree_idx.candidates(u).len(),
                "seed {i}: dag index larger than tree index at u{u}"
            );
        }
        if q.is_tree() {
            let t = SpanningTree::of_tree(&q, root, "acceptance").unwrap();
            let backward = CandidateIndex::build(&q, &g, Universe::from_tree_backward(&q, &t));
            for u in q.vertices() {
                assert_eq!(
                    dag_idx.candidates(u),
                    tree_idx.candidates(u),
                    "seed {i}: dag and tree indexes disagree on a tree query at u{u}"
                );
                assert!(
                    tree_idx.candidates(u).len() <= backward.candidates(u).len(),
                    "seed {i}: two-directional pruning weaker than backward-only at u{u}"
                );
                assert!(
                    backward.candidates(u).len() <= base[u as usize].len(),
                    "seed {i}: backward pruning weaker than the label filter at u{u}"
                );
            }
            trees += 1;
        } else {
            cyclic += 1;
        }
    }
    println!(
        "acceptance 04 candidate set containment: PASS \
         ({trees} tree and {cyclic} cyclic instances)"
    );
}

#[test]
fn acceptance_05_tree_enumeration_never_wastes_work() {
    let mut results = 0u64;
    let mut run = |inst: &Instance| {
        let mut dy = IeDyn::new();
        let (out, _) = common::run_collect(inst, &mut dy, Semantics::Homomorphism);
        assert_eq!(out.counters.emp, 0, "seed {}: abandoned partial match", inst.seed);
        results += out.counters.results;
    };
    for i in 0..300 {
        run(&common::random_instance(0xC5_0000 + i, true, &StreamOptions::default()));
    }
    // Multi-op batches go through the same delta enumeration.
    let batched = StreamOptions {
        ops: 40,
        max_batch: 3,
        ..StreamOptions::default()
    };
    for i in 0..100 {
        run(&common::random_instance(0xC5_1000 + i, true, &batched));
    }
    // The guarantee is only interesting if enumeration actually happened.
    assert!(results > 0, "no run produced a delta");
    println!(
        "acceptance 05 tree enumeration never wastes work: PASS \
         (400 runs, {results} matches reported, zero abandoned partials)"
    );
}

#[test]
fn acceptance_06_reordered_pruning_matches_projections() {
    let mut nonempty = 0usize;
    for i in 0..250u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC6_0000 + i);
        let q = common::random_query(&mut rng, true);
        let (g, _) = common::random_graph(&mut rng);
        let survivors = modified_tree_pruning(&q, &g).unwrap();
        let matches = oracle_matches(&q, &g, Semantics::Homomorphism).unwrap();
        let projections = match_projections(&matches, q.vertex_count());
        assert_eq!(survivors, projections, "seed {i}");
        if !matches.is_empty() {
            nonempty += 1;
        }
    }
    println!(
        "acceptance 06 reordered pruning matches projections: PASS \
         (250 instances, {nonempty} with matches)"
    );
}

/// Enumerates every delta tuple of `plan` against `g` and checks that the
/// per-position result sets partition `want`.
fn check_decomposition(
    q: &QueryGraph,
    g: &LabeledGraph,
    edges: &[AppliedEdge],
    sem: Semantics,
    want: &MatchSet,
    ctx: &str,
) {
    let plan = DeltaPlan::build(q, g, edges);
    let cfg = EnumerationConfig {
        semantics: sem,
        max_results: None,
        deadline: None,
    };
    let view = GraphView { q, g };
    let mut per_position: Vec<MatchSet> = Vec::new();
    for k in 0..q.edge_count() {
        let mut set = MatchSet::new();
        for &tuple in plan.tuples(k) {
            let en = Enumerator {
                q,
                view: &view,
                exclusions: plan.exclusions(k),
                config: &cfg,
            };
            let mut counters = Counters::default();
            let outcome = en.run(
                OrderMode::Dynamic,
                &plan.seed(q, k, tuple),
                &mut counters,
                &mut |m: &[VertexId]| {
                    assert!(set.insert(m.to_vec()), "{ctx}: duplicate at position {k}: {m:?}");
                },
            );
            assert_eq!(outcome, Outcome::Complete, "{ctx}");
        }
        per_position.push(set);
    }
    let mut union = MatchSet::new();
    for (k, set) in per_position.iter().enumerate() {
        for m in set {
            assert!(
                union.insert(m.clone()),
                "{ctx}: positions overlap at {k}: {m:?}"
            );
        }
    }
    assert_eq!(union, *want, "{ctx}");
}

#[test]
fn acceptance_07_delta_decomposition_partitions_the_diff() {
    let mut insert_checked = 0usize;
    let mut delete_checked = 0usize;
    let mut i = 0u64;
    while insert_checked < 200 || delete_checked < 200 {
        assert!(i < 1000, "generator starved at {insert_checked}/{delete_checked}");
        let mut rng = ChaCha8Rng::seed_from_u64(0xC7_0000 + i);
        let q = common::random_query(&mut rng, i % 2 == 0);
        let (mut g, _) = common::random_graph(&mut rng);
        i += 1;

        let before = g.clone();
        let mut inserts = Vec::new();
        for _ in 0..rng.gen_range(2..=4) {
            for _ in 0..40 {
                let a = rng.gen_range(0..g.vertex_count()) as VertexId;
                let b = rng.gen_range(0..g.vertex_count()) as VertexId;
                if a == b || g.edge_label(a, b).is_some() {
                    continue;
                }
                let elabel = rng.gen_range(0..2);
                g.insert_edge(a, b, elabel).unwrap();
                inserts.push(AppliedEdge { src: a, dst: b, elabel });
                break;
            }
        }
        if insert_checked < 200 && inserts.len() >= 2 {
            for sem in BOTH {
                let m0 = oracle_matches(&q, &before, sem).unwrap();
                let m2 = oracle_matches(&q, &g, sem).unwrap();
                let want: MatchSet = m2.difference(&m0).cloned().collect();
                check_decomposition(&q, &g, &inserts, sem, &want, &format!("insert seed {i}"));
            }
            insert_checked += 1;
        }

        // Deletions enumerate against the graph still holding the edges.
        if delete_checked < 200 && g.edge_count() >= 2 {
            let amount = rng.gen_range(2..=4);
            let picked: Vec<AppliedEdge> = g
                .edges()
                .choose_multiple(&mut rng, amount)
                .map(|&(src, dst, elabel)| AppliedEdge { src, dst, elabel })
                .collect();
            let mut after = g.clone();
            for e in &picked {
                after.delete_edge(e.src, e.dst, e.elabel).unwrap();
            }
            for sem in BOTH {
                let m0 = oracle_matches(&q, &g, sem).unwrap();
                let m2 = oracle_matches(&q, &after, sem).unwrap();
                let want: MatchSet = m0.difference(&m2).cloned().collect();
                check_decomposition(&q, &g, &picked, sem, &want, &format!("delete seed {i}"));
            }
            delete_checked += 1;
        }
    }
    println!(
        "acceptance 07 delta decomposition partitions the diff: PASS \
         ({insert_checked} insert and {delete_checked} delete batches, both semantics)"
    );
}

#[test]
fn acceptance_08_counter_identity_and_metric_tables() {
    // Every invocation either comes home empty or visits at least one
    // result, across real runs of all strategies.
    let mut runs = 0usize;
    let inst = fig1_instance();
    for name in UNRESTRICTED {
        let mut s = strategy_by_name(name, Semantics::Isomorphism).unwrap();
        let (out, _) = common::run_collect(&inst, s.as_mut(), Semantics::Isomorphism);
        assert_eq!(out.counters.inv(), out.counters.emp + out.counters.vis, "{name}");
        runs += 1;
    }
    for i in 0..40 {
        let inst = criterion_2_instance(i);
        for sem in BOTH {
            for name in STRATEGY_NAMES {
                let mut s = strategy_by_name(name, sem).unwrap();
                if !common::applicable(s.as_ref(), &inst) {
                    continue;
                }
                let (out, _) = common::run_collect(&inst, s.as_mut(), sem);
                assert_eq!(
                    out.counters.inv(),
                    out.counters.emp + out.counters.vis,
                    "{name} {sem:?} seed {}",
                    inst.seed
                );
                runs += 1;
            }
        }
    }

    // Reported figures reproduce the hand-computed tables.
    let secs = |xs: &[f64]| xs.iter().map(|&s| Duration::from_secs_f64(s)).collect::<Vec<_>>();
    assert!((individual_speedup(&secs(&[2.0, 4.0]), &secs(&[4.0, 4.0])) - 1.5).abs() < 1e-12);
    let hand = relative_performance(&[vec![2.0, 1.0], vec![4.0, 3.0]]);
    assert!((hand[0] - 5.0 / 12.0).abs() < 1e-12);
    assert!((hand[1] - 1.0).abs() < 1e-12);
    let samples = secs(&(1..=100).map(f64::from).collect::<Vec<_>>());
    assert_eq!(p95(&samples), Duration::from_secs(95));
    assert_eq!(Status::classify(RunStatus::Solved, 0, 1000), Status::Solved);
    assert_eq!(Status::classify(RunStatus::Unsolved, 999, 1000), Status::HardUnsolved);
    assert_eq!(Status::classify(RunStatus::Unsolved, 1000, 1000), Status::Unsolved);
    assert_eq!(Status::classify(RunStatus::OutOfMemory, 5, 1000), Status::OutOfMemory);

    println!(
        "acceptance 08 counter identity and metric tables: PASS ({runs} runs checked)"
    );
}

#[test]
fn acceptance_09_cache_cap_reports_out_of_memory() {
    // Path query over four labels; the data graph joins a 40-wide fan
    // through one hub, so every streamed hub edge multiplies the cached
    // join tables. Layout: 0..40 fan (label 0), 40 hub (label 1), 41..81
    // middle (label 2), 81..121 leaves (label 3).
    let q = QueryGraph::from_parts(&[0, 1, 2, 3], &[(0, 1, 0), (1, 2, 0), (2, 3, 0)]).unwrap();
    let mut g = LabeledGraph::new();
    for _ in 0..40 {
        g.add_vertex(0);
    }
    let hub = g.add_vertex(1);
    for _ in 0..40 {
        g.add_vertex(2);
    }
    for _ in 0..40 {
        g.add_vertex(3);
    }
    for a in 0..40 {
        g.insert_edge(a, hub, 0).unwrap();
    }
    for j in 0..40 {
        g.insert_edge(41 + j, 81 + j, 0).unwrap();
    }
    g.insert_edge(hub, 41, 0).unwrap();
    g.insert_edge(hub, 42, 0).unwrap();
    let map = VertexMap::identity(g.vertex_count());
    let stream = UpdateStream {
        batches: (2..40u64)
            .map(|j| {
                vec![EdgeUpdate {
                    op: UpdateOp::Insert,
                    src: 41 + j,
                    dst: u64::from(hub),
                    elabel: 0,
                    src_label: None,
                    dst_label: None,
                }]
            })
            .collect(),
    };

    let run = || {
        let mut sj = SjTree::with_cap(Semantics::Isomorphism, 1000);
        sj.initialize(&q, &g).unwrap();
        // 2 hub edges joined against two 40-wide fans: 2 + 40 + 40 leaf
        // tuples plus 80 + 80 partial joins.
        assert_eq!(sj.cached_tuples(), Some(242));
        let mut g2 = g.clone();
        let mut m2 = map.clone();
        let out = run_stream(
            &q,
            &mut g2,
            &mut m2,
            &stream,
            &mut sj,
            &RunConfig::new(Semantics::Isomorphism),
            &mut |_| {},
        )
        .unwrap();
        (out.status, out.batches_processed, sj.cached_tuples())
    };
    let first = run();
    let second = run();
    assert_eq!(first.0, RunStatus::OutOfMemory);
    // Each insert adds 81 tuples; the cap of 1000 falls in the tenth.
    assert_eq!(first.1, 9);
    assert!(first.1 < stream.batches.len());
    assert_eq!(first, second, "cap trigger must be deterministic");
    println!(
        "acceptance 09 cache cap reports out of memory: PASS \
         (stopped after batch {} of {}, {:?} cached)",
        first.1,
        stream.batches.len(),
        first.2.unwrap()
    );
}

#[test]
fn acceptance_10_dag_index_prunes_at_scale() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC10_0000);
    let n = 2500;
    let mut g = LabeledGraph::new();
    for _ in 0..n {
        g.add_vertex(0);
    }
    let mut added = 0;
    while added < 10_000 {
        let a = rng.gen_range(0..n) as VertexId;
        let b = rng.gen_range(0..n) as VertexId;
        if a == b || g.edge_label(a, b).is_some() {
            continue;
        }
        g.insert_edge(a, b, 0).unwrap();
        added += 1;
    }
    assign_labels(&mut g, 6, LabelDistribution::Uniform, 7).unwrap();
    let queries = extract_queries(&g, QueryShape::Sparse, 5, 24, 11).unwrap();

    let mut strictly_smaller = 0usize;
    for (qi, q) in queries.iter().enumerate() {
        let mut sym = SymBi::new();
        sym.initialize(q, &g).unwrap();
        let mut tf = TurboFlux::rooted(sym.dag().root());
        tf.initialize(q, &g).unwrap();

        let sym_total = sym.index().candidate_total();
        let tf_total = tf.index().candidate_total();
        let base_total: u64 = baseline_sets(q, &g).iter().map(|c| c.len() as u64).sum();
        assert!(sym_total <= tf_total, "query {qi}: {sym_total} > {tf_total}");
        assert!(tf_total <= base_total, "query {qi}: {tf_total} > {base_total}");
        if sym_total < tf_total {
            strictly_smaller += 1;
        }
    }
    assert!(
        strictly_smaller * 2 >= queries.len(),
        "dag index strictly smaller on only {strictly_smaller} of {} queries",
        queries.len()
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(120), "took {elapsed:?}");
    println!(
        "acceptance 10 dag index prunes at scale: PASS \
         ({strictly_smaller} of {} queries strictly smaller, {elapsed:?})",
        queries.len()
    );
}
