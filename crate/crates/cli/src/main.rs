//! Command-line driver: single runs, benchmark grids, and workload
//! generation for the continuous matching engine.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use csm_core::algo::{strategy_by_name, STRATEGY_NAMES};
use csm_core::bench::{run_cell, BenchConfig};
use csm_core::enumerate::Semantics;
use csm_core::error::Error as CoreError;
use csm_core::graph::{
    load_graph, parse_graph_text, parse_stream, serialize, write_stream, Label, VertexId,
    VertexMap,
};
use csm_core::ivm::{CsmStrategy, Sign};
use csm_core::metrics::{write_csv, RunMetrics};
use csm_core::query::QueryGraph;
use csm_core::workload::{
    assign_labels, effective_seed, extract_queries, sample_stream_ordered, LabelDistribution,
    QueryShape, StreamKind, StreamMode, StreamSpec,
};

#[derive(Parser)]
#[command(
    name = "csm",
    version,
    about = "Continuous subgraph matching over graph update streams"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one query under one strategy and print its match events.
    Run(RunArgs),
    /// Run a query-set x strategy grid and report metrics as CSV.
    Bench(BenchArgs),
    /// Generate workloads: streams, label assignments, query sets.
    #[command(subcommand)]
    Gen(GenCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    /// Vertex-injective matches.
    Iso,
    /// Unrestricted homomorphic matches.
    Homo,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Iso => Semantics::Isomorphism,
            SemanticsArg::Homo => Semantics::Homomorphism,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Initial data graph file.
    #[arg(long)]
    graph: PathBuf,
    /// Update stream file.
    #[arg(long)]
    stream: PathBuf,
    /// Query graph file.
    #[arg(long)]
    query: PathBuf,
    /// Strategy short name: im, gf, sj, dyn, tf, sym, o-gf, o-dyn, o-tf.
    #[arg(long)]
    algo: String,
    #[arg(long, value_enum)]
    semantics: SemanticsArg,
    /// Wall-clock budget in seconds; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Stop after this many reported matches.
    #[arg(long)]
    max_results: Option<u64>,
    /// Write the metrics row (with header) to this CSV file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Suppress the per-match output lines.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    stream: PathBuf,
    /// Query graph files; the grid is their cross product with --algos.
    #[arg(long, num_args = 1.., required = true)]
    queries: Vec<PathBuf>,
    /// Comma-separated strategy names, or "all".
    #[arg(long, default_value = "all")]
    algos: String,
    #[arg(long, value_enum)]
    semantics: SemanticsArg,
    /// Wall-clock budget in seconds per cell; 0 disables the limit.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// Stop each cell after this many reported matches.
    #[arg(long)]
    max_results: Option<u64>,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Split a graph file into an initial graph and an update stream.
    Stream(GenStreamArgs),
    /// Redraw vertex labels from a distribution.
    Labels(GenLabelsArgs),
    /// Extract a set of query graphs from a data graph.
    Queries(GenQueriesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Stream the last edges of the file, in file order.
    Suffix,
    /// Stream a uniform sample of edges.
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Insert,
    Delete,
}

#[derive(Args)]
struct GenStreamArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Percentage of edges to stream, in (0, 100].
    #[arg(long)]
    rate: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Suffix)]
    mode: ModeArg,
    #[arg(long, value_enum, default_value_t = KindArg::Insert)]
    kind: KindArg,
    /// Sampling seed; the CSM_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_graph: PathBuf,
    #[arg(long)]
    out_stream: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Uniform,
    Linear,
    Zipfian,
}

#[derive(Args)]
struct GenLabelsArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Number of labels to draw from.
    #[arg(short, long)]
    k: u32,
    #[arg(long, value_enum, default_value_t = DistArg::Uniform)]
    distribution: DistArg,
    /// Sampling seed; the CSM_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Tree,
    Sparse,
    Dense,
    Path,
    Star,
    Cycle,
}

#[derive(Args)]
struct GenQueriesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum)]
    shape: ShapeArg,
    /// Number of query vertices.
    #[arg(long)]
    size: usize,
    #[arg(long)]
    count: usize,
    /// Sampling seed; the CSM_SEED environment variable overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Queries are written here as query_000.txt, query_001.txt, ...
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run(a) => run_one(&a),
        Cmd::Bench(a) => run_bench(&a),
        Cmd::Gen(GenCmd::Stream(a)) => gen_stream(&a),
        Cmd::Gen(GenCmd::Labels(a)) => gen_labels(&a),
        Cmd::Gen(GenCmd::Queries(a)) => gen_queries(&a),
    }
}

fn lookup(name: &str, sem: Semantics) -> Result<Box<dyn CsmStrategy>> {
    strategy_by_name(name, sem).ok_or_else(|| {
        anyhow!(
            "unknown algorithm {name:?}; expected one of {}",
            STRATEGY_NAMES.join(", ")
        )
    })
}

fn bench_config(sem: Semantics, time_limit: f64, max_results: Option<u64>) -> BenchConfig {
    let mut cfg = BenchConfig::new(sem);
    if time_limit > 0.0 {
        cfg.time_limit = Some(Duration::from_secs_f64(time_limit));
    }
    cfg.max_results = max_results;
    cfg
}

fn query_id(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn run_one(a: &RunArgs) -> Result<()> {
    let (mut g, mut map) = load_graph(&a.graph)?;
    let q = QueryGraph::load(&a.query)?;
    let stream = parse_stream(&a.stream)?;
    let sem: Semantics = a.semantics.into();
    let mut strategy = lookup(&a.algo, sem)?;
    let cfg = bench_config(sem, a.time_limit, a.max_results);

    let mut events: Vec<(usize, Sign, Vec<VertexId>)> = Vec::new();
    let row = run_cell(
        &query_id(&a.query),
        &q,
        &mut g,
        &mut map,
        &stream,
        strategy.as_mut(),
        &cfg,
        &mut |m| {
            if !a.quiet {
                events.push((m.batch, m.sign, m.assignment.to_vec()));
            }
        },
    )?;
    // The map has grown with the stream, so every buffered assignment
    // translates back to the input files' external ids.
    for (batch, sign, assignment) in events {
        let tag = match sign {
            Sign::Positive => '+',
            Sign::Negative => '-',
        };
        let cols: Vec<String> = assignment
            .iter()
            .enumerate()
            .map(|(u, &v)| format!("u{u}:{}", map.external(v)))
            .collect();
        println!("{tag} {batch} {}", cols.join(" "));
    }
    eprintln!(
        "{} {}: {}, {} results",
        row.query_id,
        row.algo,
        row.status.as_str(),
        row.results
    );
    if let Some(path) = &a.report {
        std::fs::write(path, write_csv(&[row]))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_bench(a: &BenchArgs) -> Result<()> {
    let (initial, map) = load_graph(&a.graph)?;
    let stream = parse_stream(&a.stream)?;
    let sem: Semantics = a.semantics.into();
    let algos: Vec<&str> = if a.algos == "all" {
        STRATEGY_NAMES.to_vec()
    } else {
        a.algos.split(',').map(str::trim).collect()
    };
    for name in &algos {
        lookup(name, sem)?;
    }
    let queries: Vec<(String, QueryGraph)> = a
        .queries
        .iter()
        .map(|p| Ok((query_id(p), QueryGraph::load(p)?)))
        .collect::<Result<_>>()?;
    let cfg = bench_config(sem, a.time_limit, a.max_results);

    // One worker per cell; each cell owns its graph and strategy copies,
    // and the row order stays query-major regardless of thread count.
    let cells: Vec<(usize, &str)> = queries
        .iter()
        .enumerate()
        .flat_map(|(qi, _)| algos.iter().map(move |&al| (qi, al)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(qi, algo)| -> Result<Option<RunMetrics>> {
            let (id, q) = &queries[qi];
            let mut strategy = lookup(algo, sem)?;
            let mut g = initial.clone();
            let mut m = map.clone();
            match run_cell(id, q, &mut g, &mut m, &stream, strategy.as_mut(), &cfg, &mut |_| {}) {
                Ok(row) => Ok(Some(row)),
                Err(e @ (CoreError::Capability { .. } | CoreError::NotATree(_))) => {
                    eprintln!("skipping {id} x {algo}: {e}");
                    Ok(None)
                }
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<RunMetrics> = rows.into_iter().flatten().collect();
    let csv = write_csv(&rows);
    match &a.report {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// The edge list in file order, which `LabeledGraph` does not preserve.
/// Only called on text that `parse_graph_text` has already validated.
fn file_edge_order(text: &str, map: &VertexMap) -> Vec<(VertexId, VertexId, Label)> {
    let mut order = Vec::new();
    for raw in text.lines() {
        let line = match raw.find('#') {
            Some(p) => raw[..p].trim(),
            None => raw.trim(),
        };
        let mut it = line.split_whitespace();
        if it.next() != Some("e") {
            continue;
        }
        let mut id = || {
            let ext: u64 = it.next().expect("validated").parse().expect("validated");
            map.resolve(ext).expect("validated")
        };
        let (a, b) = (id(), id());
        let elabel: Label = it.next().map_or(0, |r| r.parse().expect("validated"));
        order.push((a, b, elabel));
    }
    order
}

fn gen_stream(a: &GenStreamArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.graph)
        .with_context(|| format!("reading {}", a.graph.display()))?;
    let (g, map) = parse_graph_text(&text, &a.graph)?;
    let spec = StreamSpec {
        rate: a.rate,
        kind: match a.kind {
            KindArg::Insert => StreamKind::Insert,
            KindArg::Delete => StreamKind::Delete,
        },
        mode: match a.mode {
            ModeArg::Suffix => StreamMode::Suffix,
            ModeArg::Random => StreamMode::Random,
        },
        seed: effective_seed(a.seed)?,
    };
    let order = file_edge_order(&text, &map);
    let (initial, stream) = sample_stream_ordered(&g, &map, &order, &spec)?;
    serialize(&initial, &map, &a.out_graph)?;
    write_stream(&stream, &a.out_stream)?;
    eprintln!(
        "kept {} edges, streamed {} updates",
        initial.edge_count(),
        stream.update_count()
    );
    Ok(())
}

fn gen_labels(a: &GenLabelsArgs) -> Result<()> {
    let (mut g, map) = load_graph(&a.graph)?;
    let dist = match a.distribution {
        DistArg::Uniform => LabelDistribution::Uniform,
        DistArg::Linear => LabelDistribution::Linear,
        DistArg::Zipfian => LabelDistribution::Zipfian,
    };
    assign_labels(&mut g, a.k, dist, effective_seed(a.seed)?)?;
    serialize(&g, &map, &a.out)?;
    eprintln!("relabeled {} vertices over {} labels", g.vertex_count(), a.k);
    Ok(())
}

fn gen_queries(a: &GenQueriesArgs) -> Result<()> {
    let (g, _) = load_graph(&a.graph)?;
    let shape = match a.shape {
        ShapeArg::Tree => QueryShape::Tree,
        ShapeArg::Sparse => QueryShape::Sparse,
        ShapeArg::Dense => QueryShape::Dense,
        ShapeArg::Path => QueryShape::Path,
        ShapeArg::Star => QueryShape::Star,
        ShapeArg::Cycle => QueryShape::Cycle,
    };
    let queries = extract_queries(&g, shape, a.size, a.count, effective_seed(a.seed)?)?;
    std::fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    for (i, q) in queries.iter().enumerate() {
        let path = a.out_dir.join(format!("query_{i:03}.txt"));
        std::fs::write(&path, q.to_text())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    eprintln!("wrote {} queries to {}", queries.len(), a.out_dir.display());
    Ok(())
}
