use crate::{Error, Graph, Result};

const MAX_ITERATIONS: usize = 1000;
const TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvectorResult {
    /// One score per node of the input graph; nodes outside the largest
    /// connected component score zero.
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Eigenvector centrality on the largest connected component, unit L2
/// norm. Iterates `x <- (x + Ax) / 2`, which shares the leading
/// eigenvector of `A` but does not oscillate on bipartite graphs.
pub fn eigenvector_centrality(g: &Graph) -> Result<EigenvectorResult> {
    let lcc = g.largest_component();
    if lcc.len() < 2 {
        return Err(Error::QueryUndefined {
            query: "evc",
            reason: "graph has no edges".into(),
        });
    }
    let h = g.induced(&lcc);
    let n = h.n();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        for u in 0..n {
            let s: f64 = h.neighbors(u).iter().map(|&v| x[v]).sum();
            next[u] = 0.5 * (x[u] + s);
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        next.iter_mut().for_each(|v| *v /= norm);
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if delta < TOLERANCE * n as f64 {
            converged = true;
            break;
        }
    }
    let mut scores = vec![0.0; g.n()];
    for (i, &u) in lcc.iter().enumerate() {
        scores[u] = x[i];
    }
    Ok(EigenvectorResult {
        scores,
        iterations,
        converged,
    })
}
