use serde::{Deserialize, Serialize};

use super::{ledger_for, Algorithm, Intermediates, RunLog, SynthConfig, SynthesisRecord};
use crate::construct::{construct_bter, repair_degree_sequence, DEFAULT_TARGET_ACC};
use crate::dp::{laplace_sample, stage_rng, PrivacyBudget};
use crate::{Graph, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DggConfig {
    /// Average clustering the BTER affinity blocks aim for.
    pub target_acc: f64,
}

impl Default for DggConfig {
    fn default() -> Self {
        DggConfig {
            target_acc: DEFAULT_TARGET_ACC,
        }
    }
}

/// Adds `Lap(2/ε)` to every degree (one edge moves two degrees by one),
/// repairs the result into a valid sequence and wires it with BTER. The
/// node count is preserved.
pub fn dgg_generate(g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    let mut ledger = ledger_for(cfg, Algorithm::Dgg, budget)?;
    let mut log = RunLog::new();
    let degrees = g.degree_sequence();
    log.stage("representation");

    let stage = ledger.charge("degrees", "laplace, sensitivity 2")?;
    let mut rng = stage_rng(seed, "degrees");
    let scale = 2.0 / stage.epsilon;
    let noisy: Vec<f64> = degrees.0.iter().map(|&d| d as f64 + laplace_sample(scale, &mut rng)).collect();
    let repaired = repair_degree_sequence(&noisy);
    log.summary("noisy_degree_sum", repaired.total() as f64);
    log.stage("perturbation");

    let out = construct_bter(&repaired, cfg.dgg.target_acc, &mut stage_rng(seed, "construction"))?;
    log.stage("construction");
    let intermediates = Intermediates {
        degrees: Some(repaired),
        ..Default::default()
    };
    log.finish(Algorithm::Dgg, out, ledger, intermediates)
}
