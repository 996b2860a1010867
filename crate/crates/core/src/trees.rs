//! Labeled-tree census via Prüfer sequences.
//!
//! Every labeled tree on `m` vertices is decoded from its Prüfer sequence,
//! rooted at vertex 0, and classified by its BFS level profile
//! `(|V_1|, ..., |V_r|)`. The census is an oracle for the composition
//! identity in [`crate::combinatorics`]: the number of trees with profile `c`
//! must be `multinomial(n, c) * cascade_weight(c)`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::combinatorics::Composition;
use crate::error::{Error, Result};
use crate::exact::{int, ExactInteger};
use crate::Limits;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledTree {
    vertex_count: usize,
    /// Normalized `(min, max)` pairs.
    edges: BTreeSet<(usize, usize)>,
    root: usize,
}

impl LabeledTree {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn with_root(mut self, root: usize) -> Self {
        assert!(root < self.vertex_count);
        self.root = root;
        self
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Vertex counts at distance 1, 2, ... from the root. Empty for a single
    /// vertex; `None` if some vertex is unreachable.
    pub fn level_profile(&self) -> Option<Vec<u64>> {
        let adj = self.adjacency();
        let mut depth = vec![usize::MAX; self.vertex_count];
        depth[self.root] = 0;
        let mut queue = VecDeque::from([self.root]);
        let mut levels: Vec<u64> = Vec::new();
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if depth[u] == usize::MAX {
                    depth[u] = depth[v] + 1;
                    if levels.len() < depth[u] {
                        levels.push(0);
                    }
                    levels[depth[u] - 1] += 1;
                    queue.push_back(u);
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return None;
        }
        Some(levels)
    }

    /// Connected with exactly `m - 1` edges.
    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.vertex_count && self.level_profile().is_some()
    }
}

/// Decodes a Prüfer sequence of length `m - 2` over `{0..m-1}`; the vertex
/// count is `seq.len() + 2`. Rooted at 0.
pub fn prufer_decode(seq: &[usize]) -> Result<LabeledTree> {
    let m = seq.len() + 2;
    if let Some(&bad) = seq.iter().find(|&&v| v >= m) {
        return Err(Error::domain(format!(
            "vertex id {bad} out of range for {m} vertices"
        )));
    }
    let mut degree = vec![1usize; m];
    for &v in seq {
        degree[v] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..m).filter(|&v| degree[v] == 1).collect();
    let mut edges = BTreeSet::new();
    for &v in seq {
        let leaf = leaves.pop_first().expect("a tree always has a leaf");
        edges.insert((leaf.min(v), leaf.max(v)));
        degree[v] -= 1;
        if degree[v] == 1 {
            leaves.insert(v);
        }
    }
    let a = leaves.pop_first().expect("two leaves remain");
    let b = leaves.pop_first().expect("two leaves remain");
    edges.insert((a.min(b), a.max(b)));
    Ok(LabeledTree {
        vertex_count: m,
        edges,
        root: 0,
    })
}

/// All sequences of length `len` over `{0..base-1}` in lexicographic order.
fn sequences(base: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = base.checked_pow(len as u32).unwrap_or(usize::MAX);
    (0..total).map(move |mut idx| {
        let mut seq = vec![0; len];
        for slot in seq.iter_mut().rev() {
            *slot = idx % base;
            idx /= base;
        }
        seq
    })
}

/// Trees on `n + 1` labeled vertices rooted at vertex 0, tallied by level
/// profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCensus {
    pub n: u64,
    pub total_rooted_trees: ExactInteger,
    pub profile_counts: BTreeMap<Composition, ExactInteger>,
}

pub fn tree_census(n: u64, limits: &Limits) -> Result<TreeCensus> {
    if n < 1 {
        return Err(Error::domain("tree census requires n >= 1"));
    }
    let m = n as usize + 1;
    if m > limits.tree_vertices {
        return Err(Error::resource(format!(
            "tree census on {m} vertices exceeds the cap of {} vertices",
            limits.tree_vertices
        )));
    }
    let mut total = 0u64;
    let mut counts: BTreeMap<Composition, u64> = BTreeMap::new();
    for seq in sequences(m, m - 2) {
        let tree = prufer_decode(&seq)?;
        let profile = tree
            .level_profile()
            .expect("Prüfer decoding yields a connected tree");
        let c = Composition::new(profile).expect("n >= 1 gives a nonempty profile");
        *counts.entry(c).or_default() += 1;
        total += 1;
    }
    Ok(TreeCensus {
        n,
        total_rooted_trees: int(total),
        profile_counts: counts.into_iter().map(|(c, k)| (c, int(k))).collect(),
    })
}

#[derive(Serialize, Deserialize)]
struct CensusJson {
    n: u64,
    total: String,
    profiles: Vec<ProfileJson>,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    parts: Composition,
    count: String,
}

impl TreeCensus {
    pub fn count(&self, c: &Composition) -> ExactInteger {
        self.profile_counts
            .get(c)
            .cloned()
            .unwrap_or_else(ExactInteger::zero)
    }

    /// `{"n": int, "total": "decimal", "profiles": [{"parts": [..], "count": "decimal"}]}`
    pub fn to_json(&self) -> serde_json::Value {
        let doc = CensusJson {
            n: self.n,
            total: self.total_rooted_trees.to_string(),
            profiles: self
                .profile_counts
                .iter()
                .map(|(c, k)| ProfileJson {
                    parts: c.clone(),
                    count: k.to_string(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("census serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: CensusJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::domain(format!("bad census JSON: {e}")))?;
        let parse = |s: &str| {
            s.parse::<ExactInteger>()
                .map_err(|_| Error::domain(format!("bad count `{s}`")))
        };
        let mut profile_counts = BTreeMap::new();
        for p in doc.profiles {
            profile_counts.insert(p.parts, parse(&p.count)?);
        }
        Ok(TreeCensus {
            n: doc.n,
            total_rooted_trees: parse(&doc.total)?,
            profile_counts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::{compositions, profile_weight};
    use std::collections::HashSet;

    fn edge_set(pairs: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn decode_star_and_single_edge() {
        let star = prufer_decode(&[0]).unwrap();
        assert_eq!(star.edges(), &edge_set(&[(0, 1), (0, 2)]));
        let edge = prufer_decode(&[]).unwrap();
        assert_eq!(edge.vertex_count(), 2);
        assert_eq!(edge.edges(), &edge_set(&[(0, 1)]));
    }

    #[test]
    fn decode_known_sequence() {
        // Leaves 0 and 1 attach to 3, leaf 2 attaches to 4, then 3-4 closes it.
        let t = prufer_decode(&[3, 3, 4]).unwrap();
        assert_eq!(t.edges(), &edge_set(&[(0, 3), (1, 3), (2, 4), (3, 4)]));
        assert!(t.is_tree());
        assert_eq!(t.level_profile().unwrap(), vec![1, 2, 1]);
    }

    #[test]
    fn decode_rejects_out_of_range() {
        assert!(prufer_decode(&[3]).is_err());
    }

    #[test]
    fn three_vertex_trees_are_all_distinct() {
        let trees: HashSet<_> = sequences(3, 1)
            .map(|s| prufer_decode(&s).unwrap().edges().clone())
            .collect();
        assert_eq!(trees.len(), 3);
    }

    #[test]
    fn decode_is_injective_up_to_seven_vertices() {
        for m in 2..=7 {
            let mut seen = HashSet::new();
            for seq in sequences(m, m - 2) {
                let t = prufer_decode(&seq).unwrap();
                assert!(t.is_tree());
                assert!(seen.insert(t.edges().clone()), "duplicate tree for {seq:?}");
            }
            assert_eq!(seen.len(), m.pow(m as u32 - 2));
        }
    }

    #[test]
    fn census_small_cases() {
        let limits = Limits::default();
        let c1 = tree_census(1, &limits).unwrap();
        assert_eq!(c1.total_rooted_trees, int(1));
        assert_eq!(c1.count(&Composition::new(vec![1]).unwrap()), int(1));

        let c2 = tree_census(2, &limits).unwrap();
        assert_eq!(c2.total_rooted_trees, int(3));
        assert_eq!(c2.count(&Composition::new(vec![2]).unwrap()), int(1));
        assert_eq!(c2.count(&Composition::new(vec![1, 1]).unwrap()), int(2));

        assert_eq!(
            tree_census(5, &limits).unwrap().total_rooted_trees,
            int(1296)
        );
    }

    #[test]
    fn census_matches_profile_weights() {
        let limits = Limits::default();
        for n in 1..=5 {
            let census = tree_census(n, &limits).unwrap();
            let sum: ExactInteger = census.profile_counts.values().sum();
            assert_eq!(sum, census.total_rooted_trees);
            for c in compositions(n).unwrap() {
                assert_eq!(census.count(&c), profile_weight(&c), "n={n} c={c}");
            }
        }
    }

    #[test]
    fn census_respects_vertex_cap() {
        let limits = Limits {
            tree_vertices: 5,
            ..Limits::default()
        };
        assert!(tree_census(4, &limits).is_ok());
        assert!(matches!(tree_census(5, &limits), Err(Error::Resource(_))));
        assert!(matches!(
            tree_census(8, &Limits::default()),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn census_json_shape() {
        let census = tree_census(2, &Limits::default()).unwrap();
        let json = census.to_json();
        assert_eq!(
            json,
            serde_json::json!({
                "n": 2,
                "total": "3",
                "profiles": [
                    {"parts": [1, 1], "count": "2"},
                    {"parts": [2], "count": "1"},
                ]
            })
        );
        assert_eq!(TreeCensus::from_json(&json).unwrap(), census);
    }
}
