//! Labeled undirected graphs with dynamic edge sets.
//!
//! Adjacency is kept as per-vertex vectors sorted by neighbor id, so edge
//! insertion/deletion and membership tests are binary searches. Vertex ids are
//! dense `u32`s assigned by the loader; external file ids are remembered in a
//! [`VertexMap`] so graphs and streams can round-trip through text files.
//!
//! File format: `v <id> <label>` lines followed by `e <src> <dst> <label>`
//! lines, `#` starts a comment. Missing trailing labels default to 0. Self
//! loops and parallel edges are rejected at parse time and at update time.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type Label = u32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledGraph {
    labels: Vec<Label>,
    adj: Vec<Vec<(VertexId, Label)>>,
    n_edges: usize,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: Label) -> VertexId {
        let id = self.labels.len() as VertexId;
        self.labels.push(label);
        self.adj.push(Vec::new());
        id
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        (v as usize) < self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> Label {
        self.labels[v as usize]
    }

    /// Relabels `v`. Callers must ensure `v` is isolated when the label
    /// actually changes; candidate indexes key set membership on labels and
    /// only isolated vertices can change sets without cascading support.
    pub fn set_label(&mut self, v: VertexId, label: Label) {
        self.labels[v as usize] = label;
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.labels.len() as VertexId
    }

    /// Neighbor list of `v`, sorted by neighbor id, with edge labels.
    pub fn adjacency(&self, v: VertexId) -> &[(VertexId, Label)] {
        &self.adj[v as usize]
    }

    pub fn insert_edge(&mut self, a: VertexId, b: VertexId, elabel: Label) -> Result<()> {
        if a == b {
            return Err(Error::SelfLoop(a as u64));
        }
        if !self.contains_vertex(a) || !self.contains_vertex(b) {
            let missing = if self.contains_vertex(a) { b } else { a };
            return Err(Error::UnknownVertex(missing as u64));
        }
        let pos_a = match self.adj[a as usize].binary_search_by_key(&b, |e| e.0) {
            Ok(_) => return Err(Error::DuplicateEdge(a as u64, b as u64)),
            Err(p) => p,
        };
        self.adj[a as usize].insert(pos_a, (b, elabel));
        let pos_b = self.adj[b as usize]
            .binary_search_by_key(&a, |e| e.0)
            .unwrap_err();
        self.adj[b as usize].insert(pos_b, (a, elabel));
        self.n_edges += 1;
        Ok(())
    }

    pub fn delete_edge(&mut self, a: VertexId, b: VertexId, elabel: Label) -> Result<()> {
        if !self.contains_vertex(a) || !self.contains_vertex(b) {
            let missing = if self.contains_vertex(a) { b } else { a };
            return Err(Error::UnknownVertex(missing as u64));
        }
        let pos_a = self.adj[a as usize]
            .binary_search_by_key(&b, |e| e.0)
            .map_err(|_| Error::MissingEdge(a as u64, b as u64, elabel))?;
        if self.adj[a as usize][pos_a].1 != elabel {
            return Err(Error::MissingEdge(a as u64, b as u64, elabel));
        }
        self.adj[a as usize].remove(pos_a);
        let pos_b = self.adj[b as usize]
            .binary_search_by_key(&a, |e| e.0)
            .expect("adjacency lists out of sync");
        self.adj[b as usize].remove(pos_b);
        self.n_edges -= 1;
        Ok(())
    }

    /// Edge label of `(a, b)` if the edge exists.
    pub fn edge_label(&self, a: VertexId, b: VertexId) -> Option<Label> {
        let list = self.adj.get(a as usize)?;
        list.binary_search_by_key(&b, |e| e.0)
            .ok()
            .map(|p| list[p].1)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId, elabel: Label) -> bool {
        self.edge_label(a, b) == Some(elabel)
    }

    /// Neighbors of `v`, optionally restricted by connecting edge label and
    /// neighbor vertex label. Output stays sorted by vertex id.
    pub fn neighbors(
        &self,
        v: VertexId,
        elabel: Option<Label>,
        vlabel: Option<Label>,
    ) -> Vec<VertexId> {
        self.adj[v as usize]
            .iter()
            .filter(|(w, el)| {
                elabel.is_none_or(|f| *el == f) && vlabel.is_none_or(|f| self.labels[*w as usize] == f)
            })
            .map(|(w, _)| *w)
            .collect()
    }

    /// All edges as `(src, dst, label)` with `src < dst`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId, Label)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for v in self.vertices() {
            for &(w, el) in &self.adj[v as usize] {
                if v < w {
                    out.push((v, w, el));
                }
            }
        }
        out
    }

    /// BFS distances from `source`, capped at `limit` hops. `None` marks
    /// unreached vertices.
    pub fn distances_within(&self, source: VertexId, limit: u32) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[source as usize] = Some(0);
        let mut frontier = vec![source];
        let mut d = 0;
        while !frontier.is_empty() && d < limit {
            d += 1;
            let mut next = Vec::new();
            for v in frontier {
                for &(w, _) in &self.adj[v as usize] {
                    if dist[w as usize].is_none() {
                        dist[w as usize] = Some(d);
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        dist
    }
}

/// External (file) id ↔ internal dense id mapping.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VertexMap {
    ext_to_int: HashMap<u64, VertexId>,
    int_to_ext: Vec<u64>,
}

impl VertexMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::new();
        for i in 0..n as u64 {
            m.insert(i).unwrap();
        }
        m
    }

    pub fn insert(&mut self, external: u64) -> Result<VertexId> {
        if self.ext_to_int.contains_key(&external) {
            return Err(Error::DuplicateVertex(external));
        }
        let internal = self.int_to_ext.len() as VertexId;
        self.ext_to_int.insert(external, internal);
        self.int_to_ext.push(external);
        Ok(internal)
    }

    pub fn resolve(&self, external: u64) -> Option<VertexId> {
        self.ext_to_int.get(&external).copied()
    }

    pub fn external(&self, internal: VertexId) -> u64 {
        self.int_to_ext[internal as usize]
    }

    pub fn len(&self) -> usize {
        self.int_to_ext.len()
    }

    pub fn is_empty(&self) -> bool {
        self.int_to_ext.is_empty()
    }

    /// One `external internal` pair per line.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for (internal, external) in self.int_to_ext.iter().enumerate() {
            writeln!(out, "{external} {internal}").unwrap();
        }
        write_file(path, &out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        let mut map = Self::new();
        for (ln, line) in text.lines().enumerate() {
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let ext: u64 = parse_field(it.next(), path, ln + 1, "external id")?;
            let int: u64 = parse_field(it.next(), path, ln + 1, "internal id")?;
            let got = map.insert(ext).map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: ln + 1,
                msg: e.to_string(),
            })?;
            if got as u64 != int {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: ln + 1,
                    msg: format!("non-dense internal id {int}"),
                });
            }
        }
        Ok(map)
    }
}

/// A single edge-level update as written in a stream file (external ids).
/// Vertex updates desugar to these: a vertex insertion is its incident edge
/// insertions carrying endpoint labels, a vertex deletion is the deletion of
/// all incident edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOp {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeUpdate {
    pub op: UpdateOp,
    pub src: u64,
    pub dst: u64,
    pub elabel: Label,
    pub src_label: Option<Label>,
    pub dst_label: Option<Label>,
}

pub type UpdateBatch = Vec<EdgeUpdate>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateStream {
    pub batches: Vec<UpdateBatch>,
}

impl UpdateStream {
    pub fn update_count(&self) -> usize {
        self.batches.iter().map(Vec::len).sum()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(p) => line[..p].trim(),
        None => line.trim(),
    }
}

fn parse_field<T: std::str::FromStr>(
    field: Option<&str>,
    path: &Path,
    line: usize,
    what: &str,
) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        path: path.display().to_string(),
        line,
        msg: format!("bad {what}: {raw:?}"),
    })
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a graph file. `v` lines must precede the `e` lines that use them
/// (an edge naming an undeclared vertex is an error).
pub fn load_graph(path: &Path) -> Result<(LabeledGraph, VertexMap)> {
    parse_graph_text(&read_file(path)?, path)
}

pub fn parse_graph_text(text: &str, path: &Path) -> Result<(LabeledGraph, VertexMap)> {
    let mut g = LabeledGraph::new();
    let mut map = VertexMap::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap();
        let fail = |msg: String| Error::Parse {
            path: path.display().to_string(),
            line: ln + 1,
            msg,
        };
        match tag {
            "v" => {
                let id: u64 = parse_field(it.next(), path, ln + 1, "vertex id")?;
                let label: Label = match it.next() {
                    Some(raw) => raw
                        .parse()
                        .map_err(|_| fail(format!("bad vertex label: {raw:?}")))?,
                    None => 0,
                };
                map.insert(id).map_err(|e| fail(e.to_string()))?;
                g.add_vertex(label);
            }
            "e" => {
                let src: u64 = parse_field(it.next(), path, ln + 1, "edge source")?;
                let dst: u64 = parse_field(it.next(), path, ln + 1, "edge target")?;
                let elabel: Label = match it.next() {
                    Some(raw) => raw
                        .parse()
                        .map_err(|_| fail(format!("bad edge label: {raw:?}")))?,
                    None => 0,
                };
                let a = map.resolve(src).ok_or_else(|| fail(format!("unknown vertex {src}")))?;
                let b = map.resolve(dst).ok_or_else(|| fail(format!("unknown vertex {dst}")))?;
                g.insert_edge(a, b, elabel).map_err(|e| fail(e.to_string()))?;
            }
            other => return Err(fail(format!("unknown record {other:?}"))),
        }
    }
    Ok((g, map))
}

/// Writes a graph using the external ids in `map`. `serialize` then
/// `load_graph` reproduces the graph exactly.
pub fn serialize(g: &LabeledGraph, map: &VertexMap, path: &Path) -> Result<()> {
    write_file(path, &graph_to_text(g, map))
}

pub fn graph_to_text(g: &LabeledGraph, map: &VertexMap) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        writeln!(out, "v {} {}", map.external(v), g.label(v)).unwrap();
    }
    for (a, b, el) in g.edges() {
        writeln!(out, "e {} {} {}", map.external(a), map.external(b), el).unwrap();
    }
    out
}

/// Parses an update stream. Lines are `+ src dst elabel [srclabel dstlabel]`
/// or `- src dst elabel`. When the file contains `--` separator lines, the op
/// groups between separators form batches; otherwise each line is a batch of
/// one.
pub fn parse_stream(path: &Path) -> Result<UpdateStream> {
    parse_stream_text(&read_file(path)?, path)
}

pub fn parse_stream_text(text: &str, path: &Path) -> Result<UpdateStream> {
    let grouped = text
        .lines()
        .any(|l| strip_comment(l) == "--");
    let mut stream = UpdateStream::default();
    let mut current: UpdateBatch = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if line == "--" {
            if !current.is_empty() {
                stream.batches.push(std::mem::take(&mut current));
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let tag = it.next().unwrap();
        let op = match tag {
            "+" => UpdateOp::Insert,
            "-" => UpdateOp::Delete,
            other => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: ln + 1,
                    msg: format!("unknown op {other:?}"),
                })
            }
        };
        let src: u64 = parse_field(it.next(), path, ln + 1, "source id")?;
        let dst: u64 = parse_field(it.next(), path, ln + 1, "target id")?;
        let elabel: Label = match it.next() {
            Some(raw) => raw.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: ln + 1,
                msg: format!("bad edge label: {raw:?}"),
            })?,
            None => 0,
        };
        let (src_label, dst_label) = match op {
            UpdateOp::Insert => {
                let sl = it.next().map(|r| r.parse::<Label>());
                let dl = it.next().map(|r| r.parse::<Label>());
                match (sl, dl) {
                    (None, _) => (None, None),
                    (Some(Ok(s)), Some(Ok(d))) => (Some(s), Some(d)),
                    _ => {
                        return Err(Error::Parse {
                            path: path.display().to_string(),
                            line: ln + 1,
                            msg: "endpoint labels must be two valid integers".into(),
                        })
                    }
                }
            }
            UpdateOp::Delete => (None, None),
        };
        if src == dst {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: ln + 1,
                msg: format!("self-loop on vertex {src} rejected"),
            });
        }
        let update = EdgeUpdate {
            op,
            src,
            dst,
            elabel,
            src_label,
            dst_label,
        };
        if grouped {
            current.push(update);
        } else {
            stream.batches.push(vec![update]);
        }
    }
    if !current.is_empty() {
        stream.batches.push(current);
    }
    Ok(stream)
}

pub fn stream_to_text(stream: &UpdateStream) -> String {
    let mut out = String::new();
    let grouped = stream.batches.iter().any(|b| b.len() > 1);
    for batch in &stream.batches {
        for u in batch {
            match u.op {
                UpdateOp::Insert => {
                    write!(out, "+ {} {} {}", u.src, u.dst, u.elabel).unwrap();
                    if let (Some(s), Some(d)) = (u.src_label, u.dst_label) {
                        write!(out, " {s} {d}").unwrap();
                    }
                    out.push('\n');
                }
                UpdateOp::Delete => {
                    writeln!(out, "- {} {} {}", u.src, u.dst, u.elabel).unwrap();
                }
            }
        }
        if grouped {
            out.push_str("--\n");
        }
    }
    out
}

pub fn write_stream(stream: &UpdateStream, path: &Path) -> Result<()> {
    write_file(path, &stream_to_text(stream))
}
