//! Louvain modularity maximization and partition helpers.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Graph, Result};

/// Weighted undirected graph used across Louvain levels. `loops[i]` is the
/// weight of edges internal to aggregated node `i`.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
}

impl WeightedGraph {
    pub fn from_graph(g: &Graph) -> Self {
        let adj = (0..g.n())
            .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
            .collect();
        WeightedGraph {
            adj,
            loops: vec![0.0; g.n()],
        }
    }

    /// Builds from `(u, v, w)` triples; parallel entries add up and `u == v`
    /// adds to the loop weight of `u`.
    pub fn from_weighted_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut loops = vec![0.0; n];
        for (u, v, w) in edges {
            if w <= 0.0 {
                continue;
            }
            if u == v {
                loops[u] += w;
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(v, _)| v);
            list.dedup_by(|a, b| {
                if a.0 == b.0 {
                    b.1 += a.1;
                    true
                } else {
                    false
                }
            });
        }
        WeightedGraph { adj, loops }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    fn strength(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[u]
    }

    fn total_strength(&self) -> f64 {
        (0..self.n()).map(|u| self.strength(u)).sum()
    }

    /// One local-moving phase starting from `comm`. Returns whether any node
    /// changed community.
    fn local_moving(&self, comm: &mut [usize], rng: &mut ChaCha8Rng) -> bool {
        let n = self.n();
        let m2 = self.total_strength();
        if m2 <= 0.0 {
            return false;
        }
        let strength: Vec<f64> = (0..n).map(|u| self.strength(u)).collect();
        let mut tot = vec![0.0; n];
        for u in 0..n {
            tot[comm[u]] += strength[u];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut weight_to = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any = false;
        for _pass in 0..100 {
            let mut moved = false;
            for &u in &order {
                let own = comm[u];
                touched.clear();
                for &(v, w) in &self.adj[u] {
                    let c = comm[v];
                    if weight_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[own] -= strength[u];
                let gain = |c: usize, w: f64| w - strength[u] * tot[c] / m2;
                let mut best = (own, gain(own, weight_to[own]));
                for &c in &touched {
                    let g = gain(c, weight_to[c]);
                    if g > best.1 + 1e-12 {
                        best = (c, g);
                    }
                }
                tot[best.0] += strength[u];
                if best.0 != own {
                    comm[u] = best.0;
                    moved = true;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                }
                weight_to[own] = 0.0;
            }
            if !moved {
                break;
            }
            any = true;
        }
        any
    }

    fn aggregate(&self, comm: &[usize], k: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut loops = vec![0.0; k];
        for u in 0..self.n() {
            loops[comm[u]] += self.loops[u];
            for &(v, w) in &self.adj[u] {
                if u < v {
                    edges.push((comm[u], comm[v], w));
                }
            }
        }
        let mut g = WeightedGraph::from_weighted_edges(k, edges);
        for (c, l) in loops.into_iter().enumerate() {
            g.loops[c] += l;
        }
        g
    }
}

/// Relabels so labels are contiguous from 0 in order of first appearance.
pub fn normalize_labels(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

pub fn community_count(labels: &[usize]) -> usize {
    labels.iter().copied().max().map_or(0, |m| m + 1)
}

/// Louvain on a weighted graph (resolution 1). Node visiting order is
/// shuffled from `seed`; after the multilevel phase a final node-level
/// sweep runs on the original graph, so no single-node move improves
/// modularity at the end.
pub fn louvain_weighted(g: &WeightedGraph, seed: u64) -> Vec<usize> {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    let mut level = g.clone();
    loop {
        let mut comm: Vec<usize> = (0..level.n()).collect();
        if !level.local_moving(&mut comm, &mut rng) {
            break;
        }
        let comm = normalize_labels(&comm);
        let k = community_count(&comm);
        for l in labels.iter_mut() {
            *l = comm[*l];
        }
        if k == level.n() {
            break;
        }
        level = level.aggregate(&comm, k);
    }
    g.local_moving(&mut labels, &mut rng);
    normalize_labels(&labels)
}

pub fn louvain(g: &Graph, seed: u64) -> Vec<usize> {
    louvain_weighted(&WeightedGraph::from_graph(g), seed)
}

/// `Q = Σ_c [ e_c / m − (deg_c / 2m)² ]`.
pub fn modularity(g: &Graph, labels: &[usize]) -> Result<f64> {
    if labels.len() != g.n() {
        return Err(Error::LengthMismatch(labels.len(), g.n()));
    }
    let m = g.m() as f64;
    if m == 0.0 {
        return Err(Error::QueryUndefined {
            query: "modularity",
            reason: "graph has no edges".into(),
        });
    }
    let k = community_count(labels);
    let mut intra = vec![0.0; k];
    let mut deg = vec![0.0; k];
    for &(u, v) in g.edges() {
        if labels[u] == labels[v] {
            intra[labels[u]] += 1.0;
        }
    }
    for u in 0..g.n() {
        deg[labels[u]] += g.degree(u) as f64;
    }
    Ok((0..k).map(|c| intra[c] / m - (deg[c] / (2.0 * m)).powi(2)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::planted_cliques;

    #[test]
    fn two_cliques_split() {
        let g = planted_cliques(2, 10, 0);
        let labels = louvain(&g, 3);
        assert_eq!(community_count(&labels), 2);
        assert!(labels[..10].iter().all(|&l| l == labels[0]));
        assert!(labels[10..].iter().all(|&l| l == labels[10]));
        assert_ne!(labels[0], labels[10]);
    }

    #[test]
    fn clique_is_one_community() {
        assert_eq!(louvain(&Graph::complete(4), 0), vec![0; 4]);
    }

    #[test]
    fn edgeless_gives_singletons() {
        assert_eq!(louvain(&Graph::empty(3), 0), vec![0, 1, 2]);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = planted_cliques(4, 6, 2);
        assert_eq!(louvain(&g, 11), louvain(&g, 11));
    }

    #[test]
    fn modularity_values() {
        let g = planted_cliques(2, 5, 0);
        assert_eq!(modularity(&g, &[0; 10]).unwrap(), 0.0);
        let split: Vec<usize> = (0..10).map(|i| i / 5).collect();
        assert!((modularity(&g, &split).unwrap() - 0.5).abs() < 1e-12);
        assert!(modularity(&Graph::empty(3), &[0, 0, 0]).is_err());
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_labels(&[7, 3, 7, 9]), vec![0, 1, 0, 2]);
    }
}
