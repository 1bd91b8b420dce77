use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::Graph;

/// dK-2 series: number of edges joining a degree-`a` node to a degree-`b`
/// node, keyed by `(a, b)` with `a ≤ b`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JointDegreeMatrix {
    pub counts: BTreeMap<(usize, usize), u64>,
}

impl JointDegreeMatrix {
    pub fn from_graph(g: &Graph) -> Self {
        let mut counts = BTreeMap::new();
        for &(u, v) in g.edges() {
            let (a, b) = (g.degree(u), g.degree(v));
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        JointDegreeMatrix { counts }
    }

    pub fn edge_count(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Stub count per degree class: `s_k = Σ_l m(k,l)·(1 + [k = l])`.
    pub fn stubs(&self) -> BTreeMap<usize, u64> {
        let mut s = BTreeMap::new();
        for (&(a, b), &c) in &self.counts {
            *s.entry(a).or_insert(0) += c;
            *s.entry(b).or_insert(0) += c;
        }
        s
    }

    /// Nodes needed to host every stub: `Σ_k ⌈s_k / k⌉`.
    pub fn implied_node_count(&self) -> u64 {
        self.stubs()
            .iter()
            .filter(|(&k, _)| k > 0)
            .map(|(&k, &s)| s.div_ceil(k as u64))
            .sum()
    }

    pub fn l1_distance(&self, other: &Self) -> u64 {
        let keys: std::collections::BTreeSet<_> = self.counts.keys().chain(other.counts.keys()).collect();
        keys.into_iter()
            .map(|k| {
                let a = self.counts.get(k).copied().unwrap_or(0);
                let b = other.counts.get(k).copied().unwrap_or(0);
                a.abs_diff(b)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Dk2Report {
    /// Edges requested by the matrix.
    pub requested_edges: u64,
    /// Edges that could not be placed without self-loops or multi-edges.
    pub dropped_edges: u64,
    pub swap_attempts: u64,
    /// Nodes whose stub count differs from their class degree.
    pub degree_mismatch_nodes: u64,
}

impl Dk2Report {
    pub fn feasible(&self) -> bool {
        self.dropped_edges == 0 && self.degree_mismatch_nodes == 0
    }
}

#[derive(Debug, Clone)]
pub struct Dk2Outcome {
    pub graph: Graph,
    pub report: Dk2Report,
}

/// Nodes bucketed by remaining capacity, for greedy max-capacity picks.
struct CapacityPool {
    buckets: Vec<Vec<usize>>,
    /// (capacity, position in bucket), indexed by node.
    slot: HashMap<usize, (usize, usize)>,
}

impl CapacityPool {
    fn new(nodes: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pool = CapacityPool {
            buckets: Vec::new(),
            slot: HashMap::new(),
        };
        for (u, cap) in nodes {
            if cap > 0 {
                pool.insert(u, cap);
            }
        }
        pool
    }

    fn insert(&mut self, u: usize, cap: usize) {
        if self.buckets.len() <= cap {
            self.buckets.resize(cap + 1, Vec::new());
        }
        self.slot.insert(u, (cap, self.buckets[cap].len()));
        self.buckets[cap].push(u);
    }

    fn remove(&mut self, u: usize) -> usize {
        let (cap, pos) = self.slot.remove(&u).expect("node in pool");
        let bucket = &mut self.buckets[cap];
        bucket.swap_remove(pos);
        if pos < bucket.len() {
            let moved = bucket[pos];
            self.slot.insert(moved, (cap, pos));
        }
        cap
    }

    fn consume(&mut self, u: usize) {
        let cap = self.remove(u);
        if cap > 1 {
            self.insert(u, cap - 1);
        }
    }

    fn top(&self) -> Option<usize> {
        self.buckets.iter().rev().find_map(|b| b.last().copied())
    }

    /// Up to `k` distinct nodes of largest capacity, excluding `skip`.
    fn top_k(&self, k: usize, skip: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(k);
        for bucket in self.buckets.iter().skip(1).rev() {
            for &u in bucket.iter().rev() {
                if out.len() == k {
                    return out;
                }
                if u != skip {
                    out.push(u);
                }
            }
        }
        out
    }
}

/// Spreads each cell's stubs over a class as evenly as possible. Returns,
/// per cell key, the stub count of every node in the class.
fn balanced_allocation(nodes: usize, cells: &[(usize, u64)]) -> Vec<Vec<usize>> {
    let mut cursor = 0usize;
    cells
        .iter()
        .map(|&(_, s)| {
            let s = s as usize;
            let mut alloc = vec![s / nodes; nodes];
            for j in 0..s % nodes {
                alloc[(cursor + j) % nodes] += 1;
            }
            cursor = (cursor + s % nodes) % nodes;
            alloc
        })
        .collect()
}

/// Builds a graph whose joint degree matrix matches `jdm` where feasible.
///
/// Each degree class `k` gets `⌈s_k / k⌉` nodes. The stubs a cell needs
/// from a class are spread over its nodes so per-node counts differ by at
/// most one; every node then totals `k` (or one less where `s_k` is not a
/// multiple of `k`). Cells never share a node pair, so each one is realized
/// on its own: a greedy bipartite fill between two classes, or
/// Havel-Hakimi inside a class. Near-regular targets make both greedy
/// steps exact whenever the cell fits in its classes; pairs that cannot be
/// placed are dropped and reported. The realization is then randomized by
/// `10·m` attempted swaps `(a, b), (c, d) -> (a, d), (c, b)` with
/// `deg(b) = deg(d)`, which keep every cell count. The output has at least
/// `min_nodes` nodes (padding with isolated nodes).
pub fn construct_dk2<R: Rng + ?Sized>(jdm: &JointDegreeMatrix, min_nodes: usize, rng: &mut R) -> Dk2Outcome {
    let mut report = Dk2Report {
        requested_edges: jdm.edge_count(),
        ..Default::default()
    };
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (&(a, b), &c) in &jdm.counts {
        if a == 0 || b == 0 {
            report.dropped_edges += c;
        } else if c > 0 {
            *counts.entry((a.min(b), a.max(b))).or_insert(0) += c;
        }
    }

    // Per class: the cells it takes part in and the stubs each needs.
    let mut class_cells: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for (&(a, b), &c) in &counts {
        if a == b {
            class_cells.entry(a).or_default().push((b, 2 * c));
        } else {
            class_cells.entry(a).or_default().push((b, c));
            class_cells.entry(b).or_default().push((a, c));
        }
    }

    let mut class_of: Vec<usize> = Vec::new();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    // (class, partner class) -> capacity of each member of `class`.
    let mut targets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (&k, cells) in &class_cells {
        let s: u64 = cells.iter().map(|&(_, c)| c).sum();
        let size = (s as usize).div_ceil(k);
        if !(s as usize).is_multiple_of(k) {
            report.degree_mismatch_nodes += 1;
        }
        let first = class_of.len();
        let mut ids: Vec<usize> = (first..first + size).collect();
        ids.shuffle(rng);
        class_of.extend(std::iter::repeat_n(k, size));
        for (&(l, _), alloc) in cells.iter().zip(balanced_allocation(size, cells)) {
            targets.insert((k, l), alloc);
        }
        members.insert(k, ids);
    }
    let n = class_of.len().max(min_nodes);

    let mut present: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(report.requested_edges as usize);
    let mut add = |x: usize, y: usize, edges: &mut Vec<(usize, usize)>| {
        present.insert((x.min(y), x.max(y)));
        edges.push((x, y));
    };
    for (&(a, b), &c) in &counts {
        let pool_of = |k: usize, l: usize| {
            CapacityPool::new(members[&k].iter().copied().zip(targets[&(k, l)].iter().copied()))
        };
        let mut placed = 0u64;
        if a == b {
            let mut pool = pool_of(a, a);
            while let Some(x) = pool.top() {
                let cap = pool.remove(x);
                let partners = pool.top_k(cap, x);
                for &y in &partners {
                    pool.consume(y);
                    add(x, y, &mut edges);
                }
                placed += partners.len() as u64;
            }
        } else {
            let mut left = pool_of(a, b);
            let mut right = pool_of(b, a);
            while let Some(x) = left.top() {
                let cap = left.remove(x);
                let partners = right.top_k(cap, usize::MAX);
                for &y in &partners {
                    right.consume(y);
                    add(x, y, &mut edges);
                }
                placed += partners.len() as u64;
            }
        }
        report.dropped_edges += c - placed.min(c);
    }

    if edges.len() >= 2 {
        let attempts = 10 * edges.len() as u64;
        for _ in 0..attempts {
            report.swap_attempts += 1;
            let i = rng.random_range(0..edges.len());
            let j = rng.random_range(0..edges.len());
            if i == j {
                continue;
            }
            // Orient each edge at random, then exchange the second endpoints.
            let (mut a, mut b) = edges[i];
            let (mut c, mut d) = edges[j];
            if rng.random::<bool>() {
                std::mem::swap(&mut a, &mut b);
            }
            if rng.random::<bool>() {
                std::mem::swap(&mut c, &mut d);
            }
            if class_of[b] != class_of[d] || a == d || c == b {
                continue;
            }
            let (e1, e2) = ((a.min(d), a.max(d)), (c.min(b), c.max(b)));
            if e1 == e2 || present.contains(&e1) || present.contains(&e2) {
                continue;
            }
            present.remove(&(a.min(b), a.max(b)));
            present.remove(&(c.min(d), c.max(d)));
            present.insert(e1);
            present.insert(e2);
            edges[i] = e1;
            edges[j] = e2;
        }
    }

    let edges: Vec<(usize, usize)> = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
    Dk2Outcome {
        graph: Graph::from_normalized(n, edges),
        report,
    }
}
