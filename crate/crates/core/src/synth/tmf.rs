use std::collections::HashSet;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::{ledger_for, round_clamp, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::dp::{laplace_sample, laplace_band_sample, laplace_survival, stage_rng, PrivacyBudget};
use crate::{Error, Graph, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TmfConfig {
    /// Share of ε spent on the noisy edge count; the rest goes to the cells.
    pub edge_count_fraction: f64,
}

impl Default for TmfConfig {
    fn default() -> Self {
        TmfConfig {
            edge_count_fraction: 0.1,
        }
    }
}

/// Threshold `θ` at which the expected number of noisy cells above `θ` is
/// `target`: `m·P[1 + X > θ] + (N − m)·P[X > θ] = target`.
fn threshold(m: u64, pairs: u64, target: u64, scale: f64) -> f64 {
    let expected = |t: f64| {
        m as f64 * laplace_survival(t - 1.0, scale) + (pairs - m) as f64 * laplace_survival(t, scale)
    };
    let (mut lo, mut hi) = (-1.0 - 60.0 * scale, 2.0 + 60.0 * scale);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) > target as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Picks the `m_tilde` largest cells of the adjacency matrix after adding
/// `Lap(1/ε)` to each upper-triangular cell, without materializing the
/// matrix. 1-cells get explicit noise. 0-cells are revealed in bands from
/// the top: the threshold is set so somewhat more than `m_tilde` cells pass
/// in expectation, and if too few pass the next band below is drawn, so the
/// result is the exact top `m_tilde`.
pub fn tmf_select<R: Rng + ?Sized>(g: &Graph, m_tilde: u64, epsilon: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    let n = g.n();
    let pairs = g.pair_count();
    let m = g.m() as u64;
    if m_tilde == 0 {
        return Ok(Vec::new());
    }
    if m_tilde >= pairs {
        return Ok(Graph::complete(n).edges().to_vec());
    }
    let scale = 1.0 / epsilon;
    let ones: Vec<(f64, (usize, usize))> = g
        .edges()
        .iter()
        .map(|&e| (1.0 + laplace_sample(scale, rng), e))
        .collect();

    let zeros = pairs - m;
    let mut revealed: Vec<(f64, (usize, usize))> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut upper = f64::INFINITY;
    let mut target = (m_tilde + 3 * (m_tilde as f64).sqrt().ceil() as u64 + 8).min(pairs);
    loop {
        let last = target >= pairs;
        let theta = if last { f64::NEG_INFINITY } else { threshold(m, pairs, target, scale) };
        // Each unrevealed 0-cell lies in (θ, upper] with this probability,
        // given that it lies below `upper`.
        let remaining = zeros - revealed.len() as u64;
        let s_upper = laplace_survival(upper, scale);
        let p = if last {
            1.0
        } else {
            ((laplace_survival(theta, scale) - s_upper) / (1.0 - s_upper)).clamp(0.0, 1.0)
        };
        let k = Binomial::new(remaining, p)
            .map_err(|e| Error::InvalidArgument(format!("binomial({remaining}, {p}): {e}")))?
            .sample(rng);
        for e in unrevealed_non_edges(g, &mut seen, k, rng) {
            revealed.push((laplace_band_sample(scale, theta, upper, rng), e));
        }
        let passing = ones.iter().filter(|c| c.0 > theta).count() + revealed.len();
        if passing as u64 >= m_tilde || last {
            break;
        }
        upper = theta;
        target = (target * 2).min(pairs);
    }

    let mut candidates = revealed;
    candidates.extend(ones);
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    candidates.truncate(m_tilde as usize);
    Ok(candidates.into_iter().map(|(_, e)| e).collect())
}

/// `k` uniformly chosen non-edges not yet in `seen`, which they are added to.
fn unrevealed_non_edges<R: Rng + ?Sized>(
    g: &Graph,
    seen: &mut HashSet<(usize, usize)>,
    k: u64,
    rng: &mut R,
) -> Vec<(usize, usize)> {
    let n = g.n();
    let free = g.pair_count() - g.m() as u64 - seen.len() as u64;
    let out: Vec<(usize, usize)> = if k > free / 2 {
        let mut pool = Vec::with_capacity(free as usize);
        for u in 0..n {
            for v in u + 1..n {
                if !g.has_edge(u, v) && !seen.contains(&(u, v)) {
                    pool.push((u, v));
                }
            }
        }
        sample(rng, pool.len(), k as usize).into_iter().map(|i| pool[i]).collect()
    } else {
        let mut out = Vec::with_capacity(k as usize);
        while (out.len() as u64) < k {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a == b {
                continue;
            }
            let e = (a.min(b), a.max(b));
            if !g.has_edge(e.0, e.1) && !seen.contains(&e) {
                seen.insert(e);
                out.push(e);
            }
        }
        return out;
    };
    seen.extend(out.iter().copied());
    out
}

/// Noisy edge count `m̃ = m + Lap(1/ε₁)` followed by top-`m̃` selection of
/// noisy adjacency cells at `ε₂`. The node count is preserved.
pub fn tmf_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    let mut ledger = ledger_for(cfg, Algorithm::TmF, budget)?;
    let mut log = RunLog::new();
    let pairs = g.pair_count();
    log.stage("representation");

    let e1 = ledger.charge("edge_count", "laplace, sensitivity 1")?;
    let mut rng = stage_rng(seed, "edge_count");
    let m_tilde = round_clamp(g.m() as f64 + laplace_sample(1.0 / e1.epsilon, &mut rng), 0.0, pairs as f64) as u64;
    log.summary("noisy_edges", m_tilde as f64);

    let e2 = ledger.charge("cells", "laplace, sensitivity 1, high-pass filtered top-m")?;
    let edges = tmf_select(g, m_tilde, e2.epsilon, &mut stage_rng(seed, "cells"))?;
    log.stage("perturbation");

    let out = Graph::from_edges(g.n(), edges)?;
    log.stage("construction");
    log.finish(Algorithm::TmF, out, ledger, Intermediates::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::DpRng;
    use crate::graph::generate_er;
    use rand::SeedableRng;

    #[test]
    fn threshold_hits_target() {
        for &(m, pairs, target, scale) in &[(10u64, 190u64, 10u64, 1.0f64), (500, 19900, 520, 0.2), (3, 45, 40, 5.0)] {
            let t = threshold(m, pairs, target, scale);
            let e = m as f64 * laplace_survival(t - 1.0, scale) + (pairs - m) as f64 * laplace_survival(t, scale);
            assert!((e - target as f64).abs() < 1e-6, "{e} vs {target}");
        }
    }

    #[test]
    fn zero_noise_reproduces_edges() {
        let mut rng = DpRng::seed_from_u64(2);
        let g = generate_er(60, 200, &mut rng).unwrap();
        let rec = tmf_generate(&g, PrivacyBudget::pure(1e6).unwrap(), 5, &SynthConfig::default()).unwrap();
        assert_eq!(rec.output, g);
    }

    #[test]
    fn empty_graph_small_output() {
        let g = Graph::empty(100);
        let mut total = 0;
        for seed in 0..10 {
            let rec = tmf_generate(&g, PrivacyBudget::pure(10.0).unwrap(), seed, &SynthConfig::default()).unwrap();
            assert_eq!(rec.output.n(), 100);
            total += rec.output.m();
        }
        // ε₁ = 1, so the mean output size is bounded by 3 / ε₁.
        assert!(total as f64 / 10.0 <= 3.0, "total {total}");
    }

    #[test]
    fn vanishing_epsilon_is_uniform() {
        // With ε₂ → 0 the selected cells are a uniform m̃-subset: every
        // cell is chosen with probability m̃ / N.
        let mut rng = DpRng::seed_from_u64(8);
        let g = generate_er(20, 30, &mut rng).unwrap();
        let pairs = g.pair_count() as usize;
        let runs = 1000;
        let m_tilde = 10u64;
        let mut counts = std::collections::HashMap::new();
        let mut selected = 0usize;
        for _ in 0..runs {
            let sel = tmf_select(&g, m_tilde, 1e-9, &mut rng).unwrap();
            assert_eq!(sel.len(), m_tilde as usize);
            selected += sel.len();
            for e in sel {
                *counts.entry(e).or_insert(0u64) += 1;
            }
        }
        let expected = selected as f64 / pairs as f64;
        let chi2: f64 = (0..20)
            .flat_map(|u| (u + 1..20).map(move |v| (u, v)))
            .map(|e| {
                let o = *counts.get(&e).unwrap_or(&0) as f64;
                (o - expected).powi(2) / expected
            })
            .sum();
        // 189 degrees of freedom; the 0.999 quantile is about 256.
        assert!(chi2 < 256.0, "chi2 {chi2}");
    }
}
