use crate::{Error, Graph, Result};

/// Triangles through each node, and the total triangle count.
///
/// Uses degree ordering so each triangle is found once from its
/// lowest-ranked vertex; runs in O(m^{3/2}).
pub fn triangle_counts(g: &Graph) -> (Vec<u64>, u64) {
    let n = g.n();
    let rank = |u: usize| (g.degree(u), u);
    let forward: Vec<Vec<usize>> = (0..n)
        .map(|u| g.neighbors(u).iter().copied().filter(|&v| rank(v) > rank(u)).collect())
        .collect();
    let mut per_node = vec![0u64; n];
    let mut total = 0u64;
    let mut mark = vec![false; n];
    for u in 0..n {
        for &v in &forward[u] {
            mark[v] = true;
        }
        for &v in &forward[u] {
            for &w in &forward[v] {
                if mark[w] {
                    per_node[u] += 1;
                    per_node[v] += 1;
                    per_node[w] += 1;
                    total += 1;
                }
            }
        }
        for &v in &forward[u] {
            mark[v] = false;
        }
    }
    (per_node, total)
}

/// Local clustering coefficient per node; zero for degree below two.
pub fn local_clustering(g: &Graph) -> Vec<f64> {
    let (tri, _) = triangle_counts(g);
    (0..g.n())
        .map(|u| {
            let d = g.degree(u) as f64;
            if d < 2.0 {
                0.0
            } else {
                2.0 * tri[u] as f64 / (d * (d - 1.0))
            }
        })
        .collect()
}

/// Mean local clustering over all nodes (zero for an empty graph).
pub fn average_clustering(g: &Graph) -> f64 {
    if g.n() == 0 {
        return 0.0;
    }
    local_clustering(g).iter().sum::<f64>() / g.n() as f64
}

/// Transitivity: three times the triangle count over the number of
/// connected triples.
pub fn global_clustering(g: &Graph) -> Result<f64> {
    let wedges: u64 = (0..g.n())
        .map(|u| {
            let d = g.degree(u) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if wedges == 0 {
        return Err(Error::QueryUndefined {
            query: "gcc",
            reason: "graph has no connected triples".into(),
        });
    }
    Ok(3.0 * triangle_counts(g).1 as f64 / wedges as f64)
}

/// Degree assortativity: Pearson correlation of endpoint degrees over
/// both orientations of every edge.
pub fn assortativity(g: &Graph) -> Result<f64> {
    let undefined = |reason: &str| Error::QueryUndefined {
        query: "assortativity",
        reason: reason.into(),
    };
    if g.m() == 0 {
        return Err(undefined("graph has no edges"));
    }
    let (mut s1, mut s2, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for &(u, v) in g.edges() {
        let (a, b) = (g.degree(u) as f64, g.degree(v) as f64);
        s1 += a + b;
        s2 += a * a + b * b;
        sxy += 2.0 * a * b;
    }
    let count = 2.0 * g.m() as f64;
    let mean = s1 / count;
    let var = s2 / count - mean * mean;
    if var <= 1e-12 * mean.max(1.0).powi(2) {
        return Err(undefined("all edge endpoints have equal degree"));
    }
    Ok((sxy / count - mean * mean) / var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_triangles(g: &Graph) -> Vec<u64> {
        let n = g.n();
        let mut t = vec![0u64; n];
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if g.has_edge(a, b) && g.has_edge(b, c) && g.has_edge(a, c) {
                        t[a] += 1;
                        t[b] += 1;
                        t[c] += 1;
                    }
                }
            }
        }
        t
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..14).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 0..40).prop_map(move |pairs| {
                Graph::from_edges(n, pairs.into_iter().filter(|(a, b)| a != b)).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn triangles_match_brute_force(g in arb_graph()) {
            let (per, total) = triangle_counts(&g);
            let brute = brute_triangles(&g);
            prop_assert_eq!(&per, &brute);
            prop_assert_eq!(total * 3, brute.iter().sum::<u64>());
        }

        #[test]
        fn clustering_in_unit_interval(g in arb_graph()) {
            for c in local_clustering(&g) {
                prop_assert!((0.0..=1.0).contains(&c));
            }
            if let Ok(x) = global_clustering(&g) {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&x));
            }
            if let Ok(r) = assortativity(&g) {
                prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&r));
            }
        }
    }

    #[test]
    fn triangle_with_pendant() {
        // triangle 0-1-2 plus pendant 2-3
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let c = local_clustering(&g);
        assert_eq!(c[0], 1.0);
        assert!((c[2] - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(c[3], 0.0);
        assert!((average_clustering(&g) - (1.0 + 1.0 + 1.0 / 3.0) / 4.0).abs() < 1e-12);
        // wedges: 1 + 1 + 3 = 5, triangles 1
        assert!((global_clustering(&g).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn star_is_disassortative() {
        let g = Graph::from_edges(5, [(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!((assortativity(&g).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_assortativity_oracle() {
        // Path 0-1-2-3: ordered endpoint pairs (1,2),(2,1),(2,2),(2,2),(2,1),(1,2).
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let xs = [1.0, 2.0, 2.0, 2.0, 2.0, 1.0];
        let ys = [2.0, 1.0, 2.0, 2.0, 1.0, 2.0];
        let mx = xs.iter().sum::<f64>() / 6.0;
        let my = ys.iter().sum::<f64>() / 6.0;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        let r = cov / (vx * vy).sqrt();
        assert!((assortativity(&g).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn regular_graph_assortativity_undefined() {
        assert!(assortativity(&Graph::complete(5)).is_err());
        assert!(global_clustering(&Graph::empty(3)).is_err());
    }
}
