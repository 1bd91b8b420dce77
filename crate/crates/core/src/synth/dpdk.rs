use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ledger_for, round_clamp, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::construct::{construct_dk2, construct_havel_hakimi, havel_hakimi_best_effort, JointDegreeMatrix};
use crate::dp::{
    laplace_noise, smooth_beta, smooth_noise, smooth_sensitivity_upper_bound, stage_rng, PrivacyBudget,
    SensitivityBound,
};
use crate::{DegreeSequence, Error, Graph, Result};

/// Which degree-correlation summary is released.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DpdkMode {
    /// Joint degree matrix, built with [`construct_dk2`].
    #[default]
    Dk2,
    /// Degree histogram, built with Havel-Hakimi.
    Dk1,
}

/// Noise calibration for the dK-2 cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// β-smooth bound on the local sensitivity `4·d_max + 1`; needs δ > 0.
    #[default]
    Smooth,
    /// Laplace at global sensitivity `4·d_max + 1`.
    Global,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpdkConfig {
    pub mode: DpdkMode,
    pub noise: NoiseMode,
}

pub(super) fn stage_label(cfg: &DpdkConfig) -> &'static str {
    match cfg.mode {
        DpdkMode::Dk2 => "joint_degree_matrix",
        DpdkMode::Dk1 => "degree_histogram",
    }
}

/// Scales counts down (rounding down) until `fits` accepts them.
fn shrink_until(counts: &mut [u64], mut excess: impl FnMut(&[u64]) -> Option<f64>) {
    while let Some(f) = excess(counts) {
        for c in counts.iter_mut() {
            *c = (*c as f64 * f).floor() as u64;
        }
    }
}

/// Releases the dK-2 series (or the dK-1 histogram) with noise on every
/// cell up to the maximum degree, then builds a matching graph. The
/// maximum degree is treated as public. Noisy summaries that would need
/// more than `n` nodes are scaled down first, so the output has exactly
/// `n` nodes, some of which may be isolated.
pub fn dpdk_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    let mut ledger = ledger_for(cfg, Algorithm::DpDk, budget)?;
    let mut log = RunLog::new();
    let n = g.n();
    let d_max = g.max_degree();
    let label = stage_label(&cfg.dpdk);
    let mut rng = stage_rng(seed, label);

    let out = match cfg.dpdk.mode {
        DpdkMode::Dk2 => {
            let jdm = JointDegreeMatrix::from_graph(g);
            log.stage("representation");
            let local = |t: u64| 4.0 * (d_max as f64 + t as f64) + 1.0;
            let cap = 4.0 * n.saturating_sub(1) as f64 + 1.0;
            let (bound, mechanism) = match cfg.dpdk.noise {
                NoiseMode::Smooth => {
                    if budget.delta <= 0.0 {
                        return Err(Error::Budget("DP-dK smooth-sensitivity noise needs delta > 0".into()));
                    }
                    let stage = ledger.charge(label, "smooth-sensitivity laplace, local 4*d_max+1")?;
                    let stage_budget = PrivacyBudget::new(stage.epsilon, stage.delta)?;
                    let beta = smooth_beta(&stage_budget)?;
                    let bound = smooth_sensitivity_upper_bound(local, beta, n as u64, Some(cap));
                    (bound, Some(stage_budget))
                }
                NoiseMode::Global => {
                    ledger.charge(label, "laplace, sensitivity 4*d_max+1")?;
                    (SensitivityBound::global(local(0)), None)
                }
            };
            log.summary("sensitivity", bound.value());
            let epsilon = budget.epsilon;

            let mut keys = Vec::new();
            let mut counts = Vec::new();
            for k in 1..=d_max {
                for l in k..=d_max {
                    let c = jdm.counts.get(&(k, l)).copied().unwrap_or(0) as f64;
                    let noise = match &mechanism {
                        Some(b) => smooth_noise(&bound, b, &mut rng)?,
                        None => laplace_noise(&bound, epsilon, &mut rng)?,
                    };
                    keys.push((k, l));
                    counts.push(round_clamp(c + noise, 0.0, f64::MAX) as u64);
                }
            }
            let implied = |counts: &[u64]| {
                let mut noisy = JointDegreeMatrix::default();
                for (&k, &c) in keys.iter().zip(counts) {
                    if c > 0 {
                        noisy.counts.insert(k, c);
                    }
                }
                noisy.implied_node_count()
            };
            shrink_until(&mut counts, |c| {
                let need = implied(c);
                (need > n as u64).then(|| n as f64 / need as f64)
            });
            let noisy = JointDegreeMatrix {
                counts: keys.iter().copied().zip(counts).filter(|&(_, c)| c > 0).collect::<BTreeMap<_, _>>(),
            };
            log.summary("noisy_edges", noisy.edge_count() as f64);
            log.stage("perturbation");

            let outcome = construct_dk2(&noisy, n, &mut stage_rng(seed, "construction"));
            log.summary("dropped_edges", outcome.report.dropped_edges as f64);
            if !outcome.report.feasible() {
                log.warn(format!(
                    "dk2 construction: {} edges dropped, {} nodes short of their class degree",
                    outcome.report.dropped_edges, outcome.report.degree_mismatch_nodes
                ));
            }
            log.stage("construction");
            outcome.graph
        }
        DpdkMode::Dk1 => {
            let hist = g.degree_sequence().histogram();
            log.stage("representation");
            ledger.charge(label, "laplace, sensitivity 4")?;
            let bound = SensitivityBound::global(4.0);
            let mut counts: Vec<u64> = Vec::with_capacity(hist.len());
            for &h in &hist {
                let noisy = h as f64 + laplace_noise(&bound, budget.epsilon, &mut rng)?;
                counts.push(round_clamp(noisy, 0.0, n as f64) as u64);
            }
            shrink_until(&mut counts, |c| {
                let total: u64 = c.iter().sum();
                (total > n as u64).then(|| n as f64 / total as f64)
            });
            let mut degrees: Vec<usize> = Vec::with_capacity(n);
            for (k, &c) in counts.iter().enumerate().rev() {
                degrees.extend(std::iter::repeat_n(k, c as usize));
            }
            degrees.resize(n, 0);
            let degrees = DegreeSequence(degrees);
            log.summary("noisy_edges", degrees.total() as f64 / 2.0);
            log.stage("perturbation");

            let out = match construct_havel_hakimi(&degrees) {
                Ok(g) => g,
                Err(Error::NotGraphical { .. }) => {
                    let (g, unmet) = havel_hakimi_best_effort(&degrees);
                    log.warn(format!("noisy degree sequence not graphical; {unmet} stubs left unmatched"));
                    g
                }
                Err(e) => return Err(e),
            };
            log.stage("construction");
            out
        }
    };
    log.finish(Algorithm::DpDk, out, ledger, Intermediates::default())
}
