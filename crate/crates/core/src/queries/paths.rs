use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Graph, Result};

/// Largest connected component size for which every node is a BFS source.
pub const EXACT_PATH_LIMIT: usize = 3000;
/// Number of BFS sources used above [`EXACT_PATH_LIMIT`].
pub const SAMPLED_SOURCES: usize = 500;
const SAMPLING_SEED: u64 = 0x0005_eed0_fbf5;

/// Shortest-path statistics over the largest connected component.
#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    pub diameter: usize,
    pub avg_path: f64,
    /// Fraction of (source, target) pairs at each distance; entry 0 is zero.
    pub distribution: Vec<f64>,
    pub exact: bool,
    pub sources: usize,
}

fn bfs(g: &Graph, s: usize, dist: &mut [usize], queue: &mut VecDeque<usize>, counts: &mut Vec<u64>) {
    dist.fill(usize::MAX);
    dist[s] = 0;
    queue.clear();
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        if du > 0 {
            if counts.len() <= du {
                counts.resize(du + 1, 0);
            }
            counts[du] += 1;
        }
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = du + 1;
                queue.push_back(v);
            }
        }
    }
}

/// Diameter, mean distance and distance distribution of the largest
/// connected component. Exact when the component has at most
/// [`EXACT_PATH_LIMIT`] nodes; otherwise estimated from
/// [`SAMPLED_SOURCES`] sources drawn with a fixed seed, in which case the
/// diameter is a lower bound.
pub fn path_statistics(g: &Graph) -> Result<PathStats> {
    let lcc = g.largest_component();
    if lcc.len() < 2 {
        return Err(Error::QueryUndefined {
            query: "path",
            reason: "largest component has fewer than two nodes".into(),
        });
    }
    let h = g.induced(&lcc);
    let n = h.n();
    let sources: Vec<usize> = if n <= EXACT_PATH_LIMIT {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
        let mut s = sample(&mut rng, n, SAMPLED_SOURCES).into_vec();
        s.sort_unstable();
        s
    };
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut counts: Vec<u64> = vec![0];
    for &s in &sources {
        bfs(&h, s, &mut dist, &mut queue, &mut counts);
    }
    let pairs: u64 = counts.iter().sum();
    let weighted: f64 = counts.iter().enumerate().map(|(d, &c)| d as f64 * c as f64).sum();
    Ok(PathStats {
        diameter: counts.len() - 1,
        avg_path: weighted / pairs as f64,
        distribution: counts.iter().map(|&c| c as f64 / pairs as f64).collect(),
        exact: n <= EXACT_PATH_LIMIT,
        sources: sources.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Floyd-Warshall over the whole graph, restricted to `nodes`.
    fn floyd(g: &Graph, nodes: &[usize]) -> Vec<usize> {
        let n = g.n();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for u in 0..n {
            d[u][u] = 0;
            for &v in g.neighbors(u) {
                d[u][v] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        let mut out = Vec::new();
        for &a in nodes {
            for &b in nodes {
                if a != b {
                    out.push(d[a][b]);
                }
            }
        }
        out
    }

    #[test]
    fn matches_floyd_warshall() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = crate::graph::generate_er(30, 40, &mut rng).unwrap();
            let stats = match path_statistics(&g) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let d = floyd(&g, &g.largest_component());
            let max = *d.iter().max().unwrap();
            assert_eq!(stats.diameter, max);
            let mean = d.iter().sum::<usize>() as f64 / d.len() as f64;
            assert!((stats.avg_path - mean).abs() < 1e-12);
            for (k, p) in stats.distribution.iter().enumerate() {
                let frac = d.iter().filter(|&&x| x == k).count() as f64 / d.len() as f64;
                assert!((p - frac).abs() < 1e-12);
            }
            assert!(stats.exact);
        }
    }

    #[test]
    fn path_graph() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let s = path_statistics(&g).unwrap();
        assert_eq!(s.diameter, 4);
        // ordered pairs: distance 1 x8, 2 x6, 3 x4, 4 x2 = 40 / 20
        assert!((s.avg_path - 2.0).abs() < 1e-12);
        assert_eq!(s.distribution[0], 0.0);
        assert!((s.distribution[1] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn isolated_nodes_undefined() {
        assert!(path_statistics(&Graph::empty(4)).is_err());
    }

    #[test]
    fn large_component_is_sampled() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = crate::graph::generate_ba(3500, 2, &mut rng).unwrap();
        let s = path_statistics(&g).unwrap();
        assert!(!s.exact);
        assert_eq!(s.sources, SAMPLED_SOURCES);
        assert_eq!(path_statistics(&g).unwrap(), s);
    }
}
