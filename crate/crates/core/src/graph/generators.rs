//! Random graph models used as synthetic datasets.

use rand::Rng;

use super::Graph;
use crate::{Error, Result};

/// Erdős–Rényi `G(n, p)` with `p = 2 m_target / (n (n - 1))`.
///
/// Uses geometric edge skipping, so the cost is linear in the output size.
pub fn generate_er<R: Rng + ?Sized>(n: usize, m_target: u64, rng: &mut R) -> Result<Graph> {
    let pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    if m_target > pairs {
        return Err(Error::InvalidArgument(format!(
            "m_target = {m_target} exceeds n(n-1)/2 = {pairs}"
        )));
    }
    if m_target == 0 {
        return Ok(Graph::empty(n));
    }
    if m_target == pairs {
        return Ok(Graph::complete(n));
    }
    let p = m_target as f64 / pairs as f64;
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::with_capacity(m_target as usize + m_target as usize / 8);
    let (mut v, mut w): (usize, i64) = (1, -1);
    while v < n {
        let r: f64 = rng.random();
        w += 1 + ((1.0 - r).ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    Ok(Graph::from_normalized(n, edges))
}

/// Barabási–Albert preferential attachment.
///
/// Node `m_per_node` attaches to nodes `0..m_per_node`; every later node
/// attaches to `m_per_node` distinct targets drawn from an urn holding each
/// node once per incident edge endpoint. The result has exactly
/// `m_per_node * (n - m_per_node)` edges.
pub fn generate_ba<R: Rng + ?Sized>(n: usize, m_per_node: usize, rng: &mut R) -> Result<Graph> {
    if m_per_node == 0 || m_per_node >= n {
        return Err(Error::InvalidArgument(format!(
            "m_per_node must satisfy 1 <= m < n (got m = {m_per_node}, n = {n})"
        )));
    }
    let mut edges = Vec::with_capacity(m_per_node * (n - m_per_node));
    let mut urn: Vec<usize> = Vec::with_capacity(2 * m_per_node * n);
    let mut targets: Vec<usize> = (0..m_per_node).collect();
    for source in m_per_node..n {
        for &t in &targets {
            edges.push((t, source));
        }
        urn.extend_from_slice(&targets);
        urn.extend(std::iter::repeat_n(source, m_per_node));
        targets.clear();
        while targets.len() < m_per_node {
            let pick = urn[rng.random_range(0..urn.len())];
            if !targets.contains(&pick) {
                targets.push(pick);
            }
        }
    }
    Ok(Graph::from_normalized(n, edges))
}

/// `k` disjoint cliques of `size` nodes, consecutive cliques joined by
/// `bridges` edges between their first members.
pub fn planted_cliques(k: usize, size: usize, bridges: usize) -> Graph {
    let n = k * size;
    let mut edges = Vec::new();
    for c in 0..k {
        let base = c * size;
        for u in 0..size {
            for v in u + 1..size {
                edges.push((base + u, base + v));
            }
        }
        if c + 1 < k {
            for b in 0..bridges.min(size) {
                edges.push((base + b, base + size + b));
            }
        }
    }
    Graph::from_normalized(n, edges)
}

/// Planted community labels matching [`planted_cliques`].
pub fn planted_labels(k: usize, size: usize) -> Vec<usize> {
    (0..k * size).map(|i| i / size).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn er_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(generate_er(4, 6, &mut rng).unwrap(), Graph::complete(4));
        assert_eq!(generate_er(5, 0, &mut rng).unwrap().m(), 0);
        assert!(generate_er(4, 7, &mut rng).is_err());
    }

    #[test]
    fn er_mean_edge_count() {
        let mut total = 0usize;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            total += generate_er(2000, 10_000, &mut rng).unwrap().m();
        }
        let mean = total as f64 / 20.0;
        assert!((mean - 10_000.0).abs() / 10_000.0 < 0.01, "mean {mean}");
    }

    #[test]
    fn ba_small_is_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_ba(3, 1, &mut rng).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.components().len(), 1);
        assert!(generate_ba(3, 3, &mut rng).is_err());
        assert!(generate_ba(3, 0, &mut rng).is_err());
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let a = generate_ba(500, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_ba(500, 3, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let a = generate_er(500, 2000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate_er(500, 2000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn planted_two_cliques() {
        let g = planted_cliques(2, 10, 1);
        assert_eq!(g.m(), 2 * 45 + 1);
        assert_eq!(planted_labels(2, 3), vec![0, 0, 0, 1, 1, 1]);
    }
}
