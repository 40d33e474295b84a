//! Relations over query-vertex schemas and the binary hash join used by the
//! left-deep join tree strategy.

use std::collections::{HashMap, HashSet};

use crate::enumerate::Semantics;
use crate::graph::VertexId;

/// A set of tuples over a fixed schema of query vertices. Attributes are
/// kept sorted by query-vertex id; each tuple stores the data vertices in
/// attribute order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    attrs: Vec<VertexId>,
    tuples: HashSet<Vec<VertexId>>,
}

impl Relation {
    pub fn new(mut attrs: Vec<VertexId>) -> Self {
        attrs.sort_unstable();
        attrs.dedup();
        Self {
            attrs,
            tuples: HashSet::new(),
        }
    }

    pub fn attrs(&self) -> &[VertexId] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Inserts a tuple (data vertices in attribute order); returns whether
    /// it was new.
    pub fn insert(&mut self, tuple: Vec<VertexId>) -> bool {
        debug_assert_eq!(tuple.len(), self.attrs.len());
        self.tuples.insert(tuple)
    }

    pub fn contains(&self, tuple: &[VertexId]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<VertexId>> {
        self.tuples.iter()
    }

    /// Value bound to query vertex `u` in `tuple`.
    pub fn value_of(&self, tuple: &[VertexId], u: VertexId) -> Option<VertexId> {
        self.attrs
            .binary_search(&u)
            .ok()
            .map(|p| tuple[p])
    }

    fn positions_of(&self, key: &[VertexId]) -> Vec<usize> {
        key.iter()
            .map(|u| self.attrs.binary_search(u).expect("key attr missing"))
            .collect()
    }
}

/// Natural join of two relations on their shared attributes. Under
/// isomorphism, combined tuples binding one data vertex to two different
/// query vertices are dropped.
pub fn hash_join(left: &Relation, right: &Relation, semantics: Semantics) -> Relation {
    let key: Vec<VertexId> = left
        .attrs
        .iter()
        .copied()
        .filter(|u| right.attrs.binary_search(u).is_ok())
        .collect();
    let out_attrs: Vec<VertexId> = {
        let mut v = left.attrs.clone();
        v.extend(right.attrs.iter().copied());
        v.sort_unstable();
        v.dedup();
        v
    };
    let left_key = left.positions_of(&key);
    let right_key = right.positions_of(&key);

    let mut table: HashMap<Vec<VertexId>, Vec<&Vec<VertexId>>> = HashMap::new();
    for t in right.iter() {
        let k: Vec<VertexId> = right_key.iter().map(|&p| t[p]).collect();
        table.entry(k).or_default().push(t);
    }

    let mut out = Relation::new(out_attrs);
    for lt in left.iter() {
        let k: Vec<VertexId> = left_key.iter().map(|&p| lt[p]).collect();
        let Some(partners) = table.get(&k) else {
            continue;
        };
        for rt in partners {
            let merged: Vec<VertexId> = out
                .attrs
                .iter()
                .map(|&u| {
                    left.value_of(lt, u)
                        .or_else(|| right.value_of(rt, u))
                        .unwrap()
                })
                .collect();
            if semantics == Semantics::Isomorphism && has_repeat(&merged) {
                continue;
            }
            out.insert(merged);
        }
    }
    out
}

pub(crate) fn has_repeat(tuple: &[VertexId]) -> bool {
    for (i, v) in tuple.iter().enumerate() {
        if tuple[i + 1..].contains(v) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(attrs: &[VertexId], tuples: &[&[VertexId]]) -> Relation {
        let mut r = Relation::new(attrs.to_vec());
        for t in tuples {
            r.insert(t.to_vec());
        }
        r
    }

    #[test]
    fn joins_on_shared_vertex() {
        // Partial results over (u0,u1) joined with the edge relation over
        // (u1,u3): the shared attribute is u1.
        let left = rel(&[0, 1], &[&[2, 6]]);
        let right = rel(&[1, 3], &[&[6, 10]]);
        let out = hash_join(&left, &right, Semantics::Homomorphism);
        assert_eq!(out.attrs(), &[0, 1, 3]);
        assert!(out.contains(&[2, 6, 10]));
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn empty_side_yields_empty() {
        let left = rel(&[0, 1], &[]);
        let right = rel(&[1, 2], &[&[1, 2]]);
        assert!(hash_join(&left, &right, Semantics::Homomorphism).is_empty());
        assert!(hash_join(&right, &left, Semantics::Homomorphism).is_empty());
    }

    #[test]
    fn isomorphism_drops_repeats() {
        let left = rel(&[0, 1], &[&[1, 2]]);
        let right = rel(&[1, 2], &[&[2, 1], &[2, 3]]);
        let homo = hash_join(&left, &right, Semantics::Homomorphism);
        assert_eq!(homo.len(), 2);
        let iso = hash_join(&left, &right, Semantics::Isomorphism);
        assert_eq!(iso.len(), 1);
        assert!(iso.contains(&[1, 2, 3]));
    }

    #[test]
    fn matches_nested_loop_join() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let left_attrs = vec![0, 1, 3];
            let right_attrs = vec![1, 2];
            let mut left = Relation::new(left_attrs.clone());
            let mut right = Relation::new(right_attrs.clone());
            for _ in 0..rng.gen_range(0..20) {
                left.insert((0..3).map(|_| rng.gen_range(0..5)).collect());
            }
            for _ in 0..rng.gen_range(0..20) {
                right.insert((0..2).map(|_| rng.gen_range(0..5)).collect());
            }
            for sem in [Semantics::Homomorphism, Semantics::Isomorphism] {
                let fast = hash_join(&left, &right, sem);
                // Nested-loop reference: try every pair, match on u1.
                let mut slow = Relation::new(vec![0, 1, 2, 3]);
                for lt in left.iter() {
                    for rt in right.iter() {
                        if lt[1] == rt[0] {
                            let merged = vec![lt[0], lt[1], rt[1], lt[2]];
                            if sem == Semantics::Isomorphism && has_repeat(&merged) {
                                continue;
                            }
                            slow.insert(merged);
                        }
                    }
                }
                assert_eq!(fast, slow);
            }
        }
    }
}
