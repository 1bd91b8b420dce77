use rand::Rng;

use super::construct_chung_lu;
use crate::{DegreeSequence, Graph, Result};

/// Target average clustering used when the caller has no estimate.
pub const DEFAULT_TARGET_ACC: f64 = 0.3;

/// Block Two-level Erdős–Rényi construction.
///
/// Phase 1 sorts nodes of degree ≥ 2 by degree and cuts them into affinity
/// blocks of `d + 1` nodes, `d` being the smallest degree in the block. Each
/// block is wired as `G(b, ρ)` with `ρ = acc^{1/3}`, which gives nodes a
/// local clustering of about `acc`. Phase 2 spends each node's remaining
/// degree `max(0, d_i − ρ(b − 1))` through Chung–Lu.
pub fn construct_bter<R: Rng + ?Sized>(degrees: &DegreeSequence, target_acc: f64, rng: &mut R) -> Result<Graph> {
    let n = degrees.len();
    let rho = target_acc.clamp(0.0, 1.0).cbrt();
    let mut order: Vec<usize> = (0..n).filter(|&i| degrees[i] >= 2).collect();
    order.sort_by_key(|&i| (degrees[i], i));

    let mut edges = Vec::new();
    let mut excess: Vec<f64> = degrees.0.iter().map(|&d| d as f64).collect();
    let mut start = 0;
    while start < order.len() {
        let size = (degrees[order[start]] + 1).min(order.len() - start);
        let block = &order[start..start + size];
        if size >= 2 && rho > 0.0 {
            for a in 0..size {
                for b in a + 1..size {
                    if rho >= 1.0 || rng.random::<f64>() < rho {
                        let (u, v) = (block[a], block[b]);
                        edges.push((u.min(v), u.max(v)));
                    }
                }
            }
            let internal = rho * (size - 1) as f64;
            for &u in block {
                excess[u] = (excess[u] - internal).max(0.0);
            }
        }
        start += size;
    }

    let outer = construct_chung_lu(&excess, rng)?;
    edges.extend_from_slice(outer.edges());
    Ok(Graph::from_normalized(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queries::average_clustering;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_degrees_give_empty_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = construct_bter(&DegreeSequence(vec![0, 0, 0]), 0.5, &mut rng).unwrap();
        assert_eq!((g.n(), g.m()), (3, 0));
    }

    #[test]
    fn full_clustering_gives_clique() {
        let mut acc = 0.0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = construct_bter(&DegreeSequence(vec![3; 4]), 1.0, &mut rng).unwrap();
            acc += average_clustering(&g);
        }
        assert!(acc / 100.0 >= 0.9);
    }
}
