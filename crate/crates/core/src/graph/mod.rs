//! Simple undirected graphs with contiguous node IDs.

mod datasets;
mod generators;
mod io;

pub use datasets::{builtin_graph, DatasetDescriptor, DatasetManifest, DatasetSource, GraphType, BUILTIN_TAGS};
pub use generators::{generate_ba, generate_er, planted_cliques, planted_labels};
pub use io::{load_edge_list, load_edge_list_with_labels, write_edge_list, write_label_map, LoadedGraph};

use crate::{Error, Result};

/// An undirected simple graph on nodes `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted lexicographically.
/// Adjacency lists are kept sorted and always agree with the edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from arbitrary pairs. Self-loops and duplicates
    /// (in either orientation) are dropped; IDs must be below `n`.
    pub fn from_edges<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = Vec::new();
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u != v {
                edges.push((u.min(v), u.max(v)));
            }
        }
        Ok(Self::from_normalized(n, edges))
    }

    /// `edges` must already satisfy `u < v < n`; duplicates are removed.
    pub(crate) fn from_normalized(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.iter().all(|&(u, v)| u < v && v < n));
        edges.sort_unstable();
        edges.dedup();
        let mut deg = vec![0usize; n];
        for &(u, v) in &edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut adj: Vec<Vec<usize>> = deg.iter().map(|&d| Vec::with_capacity(d)).collect();
        // Sorted edge order yields sorted adjacency lists.
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        Graph { n, edges, adj }
    }

    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_normalized(n, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u >= self.n || v >= self.n {
            return false;
        }
        let (a, b) = if self.adj[u].len() <= self.adj[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(self.adj.iter().map(Vec::len).collect())
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `2m / n²`; zero for the null graph.
    pub fn density(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        2.0 * self.m() as f64 / (self.n as f64 * self.n as f64)
    }

    /// Number of unordered node pairs, `n(n-1)/2`.
    pub fn pair_count(&self) -> u64 {
        let n = self.n as u64;
        n * n.saturating_sub(1) / 2
    }

    /// Returns a copy with extra isolated nodes appended.
    pub fn with_node_count(&self, n: usize) -> Self {
        assert!(n >= self.n);
        let mut g = self.clone();
        g.adj.resize(n, Vec::new());
        g.n = n;
        g
    }

    /// Connected components as lists of nodes, each sorted, ordered by
    /// their smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Nodes of the largest connected component; ties go to the component
    /// with the smallest node ID.
    pub fn largest_component(&self) -> Vec<usize> {
        let mut best: Vec<usize> = Vec::new();
        for c in self.components() {
            if c.len() > best.len() {
                best = c;
            }
        }
        best
    }

    /// Induced subgraph on `nodes`, relabelled to `0..nodes.len()` in the
    /// given order.
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, &u) in nodes.iter().enumerate() {
            index[u] = i;
        }
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            let (a, b) = (index[u], index[v]);
            if a != usize::MAX && b != usize::MAX {
                edges.push((a.min(b), a.max(b)));
            }
        }
        Graph::from_normalized(nodes.len(), edges)
    }
}

/// Node degrees indexed by node ID.
#[derive(Debug, Clone, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct DegreeSequence(pub Vec<usize>);

impl DegreeSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `hist[k]` = number of nodes with degree `k`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut hist = vec![0usize; self.max() + 1];
        for &d in &self.0 {
            hist[d] += 1;
        }
        hist
    }

    pub fn sorted_desc(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v
    }
}

impl std::ops::Index<usize> for DegreeSequence {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}

pub fn degree_sequence(g: &Graph) -> DegreeSequence {
    g.degree_sequence()
}

pub fn density(g: &Graph) -> f64 {
    g.density()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn from_edges_normalizes() {
        let g = Graph::from_edges(3, [(1, 0), (0, 1), (2, 2), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn degrees_and_density() {
        let k4 = Graph::complete(4);
        assert_eq!(k4.degree_sequence().0, vec![3, 3, 3, 3]);
        assert_eq!(k4.density(), 0.75);
        assert_eq!(path3().degree_sequence().0, vec![1, 2, 1]);
        assert_eq!(Graph::empty(10).density(), 0.0);
        let g = path3();
        assert_eq!(g.degree_sequence().total(), 2 * g.m());
    }

    #[test]
    fn components_pick_largest() {
        let g = Graph::from_edges(6, [(0, 1), (2, 3), (3, 4)]).unwrap();
        assert_eq!(g.components().len(), 3);
        assert_eq!(g.largest_component(), vec![2, 3, 4]);
        let sub = g.induced(&[2, 3, 4]);
        assert_eq!(sub.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn has_edge_both_orientations() {
        let g = path3();
        assert!(g.has_edge(1, 0) && g.has_edge(0, 1));
        assert!(!g.has_edge(0, 2));
        assert!(!g.has_edge(0, 7));
    }
}
