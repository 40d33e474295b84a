//! SJ-Tree: a left-deep join tree caching every partial result.
//!
//! Leaves hold one relation per query edge in a selectivity-greedy order;
//! internal node `j` caches the join of the first `j + 1` leaf relations,
//! keyed on the vertices shared with the next leaf. An inserted edge lands
//! in its leaf and the delta is joined upward level by level, with every
//! intermediate tuple cached — new root tuples are the positive matches.
//! Deletions are not supported, and the cache is guarded by a tuple cap so
//! that exhausting memory surfaces as a result code instead of an abort.
//!
//! Because partial results depend on the match semantics (isomorphism drops
//! tuples with repeated data vertices before caching), the semantics is
//! fixed at construction time.

use std::collections::HashMap;
use std::time::Instant;

use crate::enumerate::{Counters, EnumerationConfig, Outcome, Semantics};
use crate::error::{Error, Result};
use crate::graph::{LabeledGraph, VertexId};
use crate::ivm::{AppliedEdge, Capabilities, CsmStrategy, DeltaPlan, Sign};
use crate::join::{has_repeat, Relation};
use crate::query::{edge_frequency, QueryGraph};

pub const DEFAULT_TUPLE_CAP: usize = 10_000_000;

/// Tuples over a sorted query-vertex schema, hashed on the key used by the
/// join one level up (empty at the root).
struct Table {
    attrs: Vec<VertexId>,
    key_pos: Vec<usize>,
    by_key: HashMap<Vec<VertexId>, Vec<Vec<VertexId>>>,
    len: usize,
}

impl Table {
    fn new(attrs: Vec<VertexId>, key: &[VertexId]) -> Self {
        let key_pos = key
            .iter()
            .map(|u| attrs.binary_search(u).expect("key within schema"))
            .collect();
        Self {
            attrs,
            key_pos,
            by_key: HashMap::new(),
            len: 0,
        }
    }

    fn push(&mut self, tuple: Vec<VertexId>) {
        let key: Vec<VertexId> = self.key_pos.iter().map(|&p| tuple[p]).collect();
        self.by_key.entry(key).or_default().push(tuple);
        self.len += 1;
    }

    fn probe(&self, key: &[VertexId]) -> &[Vec<VertexId>] {
        self.by_key.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    fn tuples(&self) -> impl Iterator<Item = &Vec<VertexId>> {
        self.by_key.values().flatten()
    }

    fn as_relation(&self) -> Relation {
        let mut r = Relation::new(self.attrs.clone());
        for t in self.tuples() {
            r.insert(t.clone());
        }
        r
    }
}

/// How level `j` combines a prefix tuple with a leaf tuple.
struct LevelPlan {
    left_key_pos: Vec<usize>,
    right_key_pos: Vec<usize>,
    /// Per output attribute: take from the prefix side (`true`) or the leaf
    /// side, at the stored position.
    merge: Vec<(bool, usize)>,
}

impl LevelPlan {
    fn merged(&self, left: &[VertexId], right: &[VertexId]) -> Vec<VertexId> {
        self.merge
            .iter()
            .map(|&(from_left, p)| if from_left { left[p] } else { right[p] })
            .collect()
    }
}

pub struct SjTree {
    semantics: Semantics,
    cap: usize,
    phi: Vec<usize>,
    leaf_of_edge: Vec<usize>,
    leaves: Vec<Table>,
    internals: Vec<Table>,
    levels: Vec<LevelPlan>,
    cached: usize,
}

impl SjTree {
    pub fn new(semantics: Semantics) -> Self {
        Self::with_cap(semantics, DEFAULT_TUPLE_CAP)
    }

    pub fn with_cap(semantics: Semantics, cap: usize) -> Self {
        Self {
            semantics,
            cap,
            phi: Vec::new(),
            leaf_of_edge: Vec::new(),
            leaves: Vec::new(),
            internals: Vec::new(),
            levels: Vec::new(),
            cached: 0,
        }
    }

    /// Canonical edge indices in leaf order.
    pub fn edge_order(&self) -> &[usize] {
        &self.phi
    }

    pub fn leaf_relation(&self, pos: usize) -> Relation {
        self.leaves[pos].as_relation()
    }

    /// Cached table of internal node `j` (the join of the first `j + 1`
    /// leaf relations); node count is `edge_count - 1`.
    pub fn internal_relation(&self, node: usize) -> Relation {
        self.internals[node - 1].as_relation()
    }

    fn guard(&self) -> Result<()> {
        if self.cached > self.cap {
            return Err(Error::OutOfMemoryIndex { cap: self.cap });
        }
        Ok(())
    }

    fn push_counted(table: &mut Table, cached: &mut usize, tuple: Vec<VertexId>) {
        table.push(tuple);
        *cached += 1;
    }

    /// Feeds one new leaf tuple in, joining the delta upward; root-level
    /// tuples reach `emit`. All intermediate tuples enter the cache.
    fn insert_tuple(
        &mut self,
        pos: usize,
        tuple: Vec<VertexId>,
        deadline: Option<Instant>,
        emit: &mut dyn FnMut(&[VertexId]),
    ) -> Result<Outcome> {
        let levels = self.internals.len();
        let mut delta: Vec<Vec<VertexId>> = if pos == 0 {
            vec![tuple.clone()]
        } else {
            let plan = &self.levels[pos - 1];
            let key: Vec<VertexId> = plan.right_key_pos.iter().map(|&p| tuple[p]).collect();
            let prefix = if pos == 1 {
                &self.leaves[0]
            } else {
                &self.internals[pos - 2]
            };
            prefix
                .probe(&key)
                .iter()
                .map(|lt| plan.merged(lt, &tuple))
                .filter(|t| self.semantics == Semantics::Homomorphism || !has_repeat(t))
                .collect()
        };
        Self::push_counted(&mut self.leaves[pos], &mut self.cached, tuple);
        self.guard()?;
        if pos >= 1 {
            for t in &delta {
                Self::push_counted(&mut self.internals[pos - 1], &mut self.cached, t.clone());
            }
            self.guard()?;
        }
        let first_level = if pos == 0 { 1 } else { pos + 1 };
        for lv in first_level..=levels {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    return Ok(Outcome::TimedOut);
                }
            }
            let plan = &self.levels[lv - 1];
            let mut next = Vec::new();
            for lt in &delta {
                let key: Vec<VertexId> = plan.left_key_pos.iter().map(|&p| lt[p]).collect();
                for rt in self.leaves[lv].probe(&key) {
                    let merged = plan.merged(lt, rt);
                    if self.semantics == Semantics::Isomorphism && has_repeat(&merged) {
                        continue;
                    }
                    next.push(merged);
                }
            }
            for t in &next {
                Self::push_counted(&mut self.internals[lv - 1], &mut self.cached, t.clone());
            }
            self.guard()?;
            delta = next;
            if delta.is_empty() {
                return Ok(Outcome::Complete);
            }
        }
        for t in &delta {
            emit(t);
        }
        Ok(Outcome::Complete)
    }
}

impl CsmStrategy for SjTree {
    fn name(&self) -> &'static str {
        "sj"
    }

    fn cached_tuples(&self) -> Option<usize> {
        Some(self.cached)
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            edge_insert: true,
            edge_delete: false,
            batch: false,
            early_termination: false,
            trees_only: false,
        }
    }

    fn initialize(&mut self, q: &QueryGraph, g: &LabeledGraph) -> Result<()> {
        let m = q.edge_count();
        let freq: Vec<usize> = q.edges().iter().map(|e| edge_frequency(g, q, e)).collect();
        let mut phi = Vec::with_capacity(m);
        let mut used = vec![false; m];
        let mut covered = vec![false; q.vertex_count()];
        for step in 0..m {
            let pick = (0..m)
                .filter(|&i| !used[i])
                .filter(|&i| {
                    let e = q.edge(i);
                    step == 0 || covered[e.src as usize] || covered[e.dst as usize]
                })
                .min_by_key(|&i| (freq[i], i))
                .expect("connected query");
            used[pick] = true;
            covered[q.edge(pick).src as usize] = true;
            covered[q.edge(pick).dst as usize] = true;
            phi.push(pick);
        }
        let mut leaf_of_edge = vec![0usize; m];
        for (pos, &k) in phi.iter().enumerate() {
            leaf_of_edge[k] = pos;
        }

        let leaf_attrs: Vec<Vec<VertexId>> = phi
            .iter()
            .map(|&k| {
                let e = q.edge(k);
                let mut a = vec![e.src, e.dst];
                a.sort_unstable();
                a
            })
            .collect();
        let mut prefix_attrs: Vec<Vec<VertexId>> = vec![leaf_attrs[0].clone()];
        for attrs in leaf_attrs.iter().skip(1) {
            let mut u = prefix_attrs.last().unwrap().clone();
            u.extend(attrs.iter().copied());
            u.sort_unstable();
            u.dedup();
            prefix_attrs.push(u);
        }
        // keys[j - 1] is what level j joins on; a table is hashed on the
        // key of the level that probes it.
        let keys: Vec<Vec<VertexId>> = (1..m)
            .map(|j| {
                prefix_attrs[j - 1]
                    .iter()
                    .copied()
                    .filter(|u| leaf_attrs[j].binary_search(u).is_ok())
                    .collect()
            })
            .collect();
        self.levels = (1..m)
            .map(|j| LevelPlan {
                left_key_pos: keys[j - 1]
                    .iter()
                    .map(|u| prefix_attrs[j - 1].binary_search(u).unwrap())
                    .collect(),
                right_key_pos: keys[j - 1]
                    .iter()
                    .map(|u| leaf_attrs[j].binary_search(u).unwrap())
                    .collect(),
                merge: prefix_attrs[j]
                    .iter()
                    .map(|u| match prefix_attrs[j - 1].binary_search(u) {
                        Ok(p) => (true, p),
                        Err(_) => (false, leaf_attrs[j].binary_search(u).unwrap()),
                    })
                    .collect(),
            })
            .collect();
        let empty: [VertexId; 0] = [];
        self.leaves = (0..m)
            .map(|j| {
                let key: &[VertexId] = if j == 0 {
                    keys.first().map(Vec::as_slice).unwrap_or(&empty)
                } else {
                    &keys[j - 1]
                };
                Table::new(leaf_attrs[j].clone(), key)
            })
            .collect();
        self.internals = (1..m)
            .map(|j| {
                let key: &[VertexId] = keys.get(j).map(Vec::as_slice).unwrap_or(&empty);
                Table::new(prefix_attrs[j].clone(), key)
            })
            .collect();
        self.cached = 0;

        for (pos, &k) in phi.iter().enumerate() {
            let e = q.edge(k);
            for v in g.vertices().filter(|&v| g.label(v) == q.label(e.src)) {
                for w in g.neighbors(v, Some(e.label), Some(q.label(e.dst))) {
                    let t = if e.src < e.dst { vec![v, w] } else { vec![w, v] };
                    Self::push_counted(&mut self.leaves[pos], &mut self.cached, t);
                }
            }
            self.guard()?;
        }
        for lv in 1..m {
            let plan = &self.levels[lv - 1];
            let mut out = Vec::new();
            {
                let prefix = if lv == 1 {
                    &self.leaves[0]
                } else {
                    &self.internals[lv - 2]
                };
                for lt in prefix.tuples() {
                    let key: Vec<VertexId> =
                        plan.left_key_pos.iter().map(|&p| lt[p]).collect();
                    for rt in self.leaves[lv].probe(&key) {
                        let merged = plan.merged(lt, rt);
                        if self.semantics == Semantics::Isomorphism && has_repeat(&merged) {
                            continue;
                        }
                        out.push(merged);
                    }
                }
            }
            for t in out {
                Self::push_counted(&mut self.internals[lv - 1], &mut self.cached, t);
            }
            self.guard()?;
        }
        self.phi = phi;
        self.leaf_of_edge = leaf_of_edge;
        Ok(())
    }

    fn update_index_insert(
        &mut self,
        _q: &QueryGraph,
        _g: &LabeledGraph,
        _edges: &[AppliedEdge],
    ) -> Result<()> {
        // The leaf insertion happens during delta processing so that the
        // cached tables still describe the pre-update state there.
        Ok(())
    }

    fn update_index_delete(
        &mut self,
        _q: &QueryGraph,
        _g: &LabeledGraph,
        _edges: &[AppliedEdge],
    ) -> Result<()> {
        Err(Error::Capability {
            algo: "sj",
            op: "edge deletion",
        })
    }

    fn enumerate_delta(
        &mut self,
        q: &QueryGraph,
        _g: &LabeledGraph,
        plan: &DeltaPlan,
        sign: Sign,
        cfg: &EnumerationConfig,
        counters: &mut Counters,
        sink: &mut dyn FnMut(&[VertexId]),
    ) -> Result<Outcome> {
        debug_assert_eq!(sign, Sign::Positive);
        for k in 0..plan.edge_count() {
            let e = q.edge(k);
            let pos = self.leaf_of_edge[k];
            for &(a, b) in plan.tuples(k) {
                let t = if e.src < e.dst { vec![a, b] } else { vec![b, a] };
                let mut emit = |t: &[VertexId]| {
                    counters.results += 1;
                    sink(t);
                };
                match self.insert_tuple(pos, t, cfg.deadline, &mut emit)? {
                    Outcome::Complete => {}
                    stop => return Ok(stop),
                }
            }
        }
        Ok(Outcome::Complete)
    }
}
