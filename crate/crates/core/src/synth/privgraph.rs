use std::collections::HashSet;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{round_clamp, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::community::{louvain_weighted, normalize_labels, WeightedGraph};
use crate::construct::{calibrate_chung_lu_weights, construct_chung_lu};
use crate::dp::{derive_seed, exponential_select, laplace_sample, split_budget, stage_rng, PrivacyBudget};
use crate::{Error, Graph, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrivGraphConfig {
    /// Budget shares for (coarse partition, refinement, degrees and
    /// cross-community counts).
    pub fractions: [f64; 3],
    /// Upper bound on the number of random supernodes in the coarse step.
    pub max_supernodes: usize,
    /// Skip community detection and treat the graph as one community.
    pub force_single_community: bool,
    /// Communities up to this size get Chung-Lu weight calibration.
    pub calibrate_max_nodes: usize,
}

impl Default for PrivGraphConfig {
    fn default() -> Self {
        PrivGraphConfig {
            fractions: [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            max_supernodes: 500,
            force_single_community: false,
            calibrate_max_nodes: 2000,
        }
    }
}

pub(super) fn stages(cfg: &PrivGraphConfig) -> Vec<(&'static str, f64)> {
    if cfg.force_single_community {
        vec![("degrees_and_cross_counts", 1.0)]
    } else {
        let [a, b, c] = cfg.fractions;
        vec![("partition_coarse", a), ("partition_refine", b), ("degrees_and_cross_counts", c)]
    }
}

/// Nodes are dealt into random supernodes; the noisy supernode graph
/// (`Lap(1/ε)` per cell, one edge touches one cell) is clustered by
/// Louvain, and every node inherits its supernode's community.
fn coarse_partition(g: &Graph, epsilon: f64, max_supernodes: usize, seed: u64) -> Vec<usize> {
    let n = g.n();
    let k = n.min(max_supernodes).max(1);
    let mut rng = stage_rng(seed, "partition_coarse");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut group = vec![0usize; n];
    for (pos, &u) in order.iter().enumerate() {
        group[u] = pos * k / n;
    }
    let mut counts = vec![0u64; k * k];
    for &(u, v) in g.edges() {
        let (a, b) = (group[u].min(group[v]), group[u].max(group[v]));
        counts[a * k + b] += 1;
    }
    let scale = 1.0 / epsilon;
    let mut weighted = Vec::new();
    for a in 0..k {
        for b in a..k {
            let w = round_clamp(counts[a * k + b] as f64 + laplace_sample(scale, &mut rng), 0.0, f64::MAX);
            if w > 0.0 {
                weighted.push((a, b, w));
            }
        }
    }
    let wg = WeightedGraph::from_weighted_edges(k, weighted);
    let labels = louvain_weighted(&wg, derive_seed(seed, &["louvain"]));
    (0..n).map(|u| labels[group[u]]).collect()
}

/// One pass of exponential-mechanism moves. Node `i` joins community `c`
/// with score `k_{i,c} − d_i·|c|/n`, a modularity-gain proxy in which a
/// single edge moves any score by at most 2; each node is one selection at
/// `ε/2` and an edge affects only its two endpoints.
fn refine_partition(g: &Graph, labels: &mut [usize], epsilon: f64, seed: u64) -> Result<()> {
    let n = g.n();
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    if k <= 1 {
        return Ok(());
    }
    let mut rng = stage_rng(seed, "partition_refine");
    let mut sizes = vec![0usize; k];
    for &c in labels.iter() {
        sizes[c] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut links = vec![0.0f64; k];
    let mut scores = vec![0.0f64; k];
    for u in order {
        let own = labels[u];
        sizes[own] -= 1;
        links.iter_mut().for_each(|x| *x = 0.0);
        for &v in g.neighbors(u) {
            links[labels[v]] += 1.0;
        }
        let d = g.degree(u) as f64;
        for c in 0..k {
            scores[c] = links[c] - d * sizes[c] as f64 / n as f64;
        }
        let c = exponential_select(&scores, 2.0, epsilon / 2.0, &mut rng)?;
        labels[u] = c;
        sizes[c] += 1;
    }
    Ok(())
}

/// Samples `count` distinct pairs from `a × b` uniformly.
fn cross_pairs<R: Rng + ?Sized>(a: &[usize], b: &[usize], count: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let total = a.len() * b.len();
    let norm = |x: usize, y: usize| (x.min(y), x.max(y));
    if count * 2 > total {
        return sample(rng, total, count.min(total))
            .into_iter()
            .map(|i| norm(a[i / b.len()], b[i % b.len()]))
            .collect();
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let e = norm(a[rng.random_range(0..a.len())], b[rng.random_range(0..b.len())]);
        if seen.insert(e) {
            out.push(e);
        }
    }
    out
}

/// Private community partition (coarse Louvain on noisy supernodes, then
/// exponential-mechanism refinement), noisy intra-community degrees
/// (`Lap(2/ε₃)`) and noisy cross-community edge counts (`Lap(1/ε₃)`); an
/// edge feeds exactly one of the two, so together they cost `ε₃`. Each
/// community is wired by calibrated Chung-Lu and cross edges are placed
/// uniformly. The node count is preserved.
pub fn privgraph_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidArgument("PrivGraph needs at least two nodes".into()));
    }
    let pc = &cfg.privgraph;
    let mut ledger = split_budget(budget, &stages(pc))?;
    let mut log = RunLog::new();
    log.stage("representation");

    let labels = if pc.force_single_community {
        vec![0; n]
    } else {
        let e1 = ledger.charge("partition_coarse", "laplace on supernode edge counts, sensitivity 1")?;
        let mut labels = coarse_partition(g, e1.epsilon, pc.max_supernodes, seed);
        let e2 = ledger.charge("partition_refine", "exponential mechanism per node, quality sensitivity 2")?;
        refine_partition(g, &mut labels, e2.epsilon, seed)?;
        normalize_labels(&labels)
    };
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    log.summary("communities", k as f64);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (u, &c) in labels.iter().enumerate() {
        members[c].push(u);
    }

    let e3 = ledger.charge(
        "degrees_and_cross_counts",
        "laplace on intra degrees (sensitivity 2) and cross counts (sensitivity 1)",
    )?;
    let mut rng = stage_rng(seed, "degrees_and_cross_counts");
    let mut intra = vec![0usize; n];
    let mut cross = vec![0u64; k * k];
    for &(u, v) in g.edges() {
        let (a, b) = (labels[u], labels[v]);
        if a == b {
            intra[u] += 1;
            intra[v] += 1;
        } else {
            cross[a.min(b) * k + a.max(b)] += 1;
        }
    }
    let noisy_intra: Vec<f64> = intra
        .iter()
        .map(|&d| d as f64 + laplace_sample(2.0 / e3.epsilon, &mut rng))
        .collect();
    let mut noisy_cross = vec![0usize; k * k];
    for a in 0..k {
        for b in a + 1..k {
            let cap = (members[a].len() * members[b].len()) as f64;
            let x = cross[a * k + b] as f64 + laplace_sample(1.0 / e3.epsilon, &mut rng);
            noisy_cross[a * k + b] = round_clamp(x, 0.0, cap) as usize;
        }
    }
    log.stage("perturbation");

    let mut rng = stage_rng(seed, "construction");
    let mut edges = Vec::new();
    for nodes in &members {
        let cap = nodes.len().saturating_sub(1) as f64;
        let target: Vec<f64> = nodes.iter().map(|&u| round_clamp(noisy_intra[u], 0.0, cap)).collect();
        let weights = calibrate_chung_lu_weights(&target, pc.calibrate_max_nodes);
        let local = construct_chung_lu(&weights, &mut rng)?;
        edges.extend(local.edges().iter().map(|&(x, y)| {
            let (a, b) = (nodes[x], nodes[y]);
            (a.min(b), a.max(b))
        }));
    }
    for a in 0..k {
        for b in a + 1..k {
            let count = noisy_cross[a * k + b];
            if count > 0 {
                edges.extend(cross_pairs(&members[a], &members[b], count, &mut rng));
            }
        }
    }
    let out = Graph::from_edges(n, edges)?;
    log.summary("output_edges", out.m() as f64);
    log.stage("construction");
    let intermediates = Intermediates {
        partition: Some(labels),
        ..Default::default()
    };
    log.finish(Algorithm::PrivGraph, out, ledger, intermediates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::community::louvain;
    use crate::dp::DpRng;
    use crate::graph::{generate_er, planted_cliques, planted_labels};
    use crate::metrics::partition_scores;
    use rand::SeedableRng;

    #[test]
    fn two_cliques_recovered() {
        let g = planted_cliques(2, 10, 0);
        let truth = planted_labels(2, 10);
        let b = PrivacyBudget::pure(1e6).unwrap();
        let mut total = 0.0;
        for seed in 0..10 {
            let rec = privgraph_generate(&g, b, seed, &SynthConfig::default()).unwrap();
            let found = rec.intermediates.partition.as_ref().unwrap();
            assert_eq!(partition_scores(&truth, found).nmi, 1.0);
            total += partition_scores(&truth, &louvain(&rec.output, 0)).nmi;
            assert!((rec.output.m() as f64 - g.m() as f64).abs() <= 0.05 * g.m() as f64);
        }
        assert!(total / 10.0 >= 0.95);
    }

    #[test]
    fn single_community_conserves_degree_mass() {
        let g = generate_er(200, 800, &mut DpRng::seed_from_u64(3)).unwrap();
        let mut cfg = SynthConfig::default();
        cfg.privgraph.force_single_community = true;
        let b = PrivacyBudget::pure(10.0).unwrap();
        let mut total = 0usize;
        for seed in 0..10 {
            let rec = privgraph_generate(&g, b, seed, &cfg).unwrap();
            assert_eq!(rec.ledger.stages.len(), 1);
            total += 2 * rec.output.m();
        }
        let mean = total as f64 / 10.0;
        let truth = 2.0 * g.m() as f64;
        assert!((mean - truth).abs() <= 0.1 * truth, "{mean} vs {truth}");
    }

    #[test]
    fn cross_pairs_are_distinct() {
        let mut rng = DpRng::seed_from_u64(1);
        for count in [0, 3, 10, 12] {
            let e = cross_pairs(&[0, 1, 2], &[5, 6, 7, 8], count, &mut rng);
            assert_eq!(e.len(), count);
            assert_eq!(e.iter().collect::<HashSet<_>>().len(), count);
        }
    }
}
