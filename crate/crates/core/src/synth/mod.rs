//! The six synthesizers. Each one extracts a summary of the input graph,
//! perturbs it under a [`BudgetLedger`], and hands the noisy summary to a
//! constructor.

mod dgg;
mod dpdk;
mod privgraph;
mod privhrg;
mod privskg;
mod tmf;

pub use dgg::{dgg_generate, DggConfig};
pub use dpdk::{dpdk_generate, DpdkConfig, DpdkMode, NoiseMode};
pub use privgraph::{privgraph_generate, PrivGraphConfig};
pub use privhrg::{dendrogram_log_likelihood, privhrg_generate, PrivHrgConfig};
pub use privskg::{fit_initiator, kronecker_moments, privskg_generate, Moments, PrivSkgConfig};
pub use tmf::{tmf_generate, tmf_select, TmfConfig};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::construct::{Dendrogram, KroneckerInitiator};
use crate::dp::{split_budget, BudgetLedger, PrivacyBudget};
use crate::{DegreeSequence, Error, Graph, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "DP-dK")]
    DpDk,
    #[serde(rename = "TmF")]
    TmF,
    #[serde(rename = "PrivSKG")]
    PrivSkg,
    #[serde(rename = "PrivHRG")]
    PrivHrg,
    #[serde(rename = "PrivGraph")]
    PrivGraph,
    #[serde(rename = "DGG")]
    Dgg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::DpDk,
        Algorithm::TmF,
        Algorithm::PrivSkg,
        Algorithm::PrivHrg,
        Algorithm::PrivGraph,
        Algorithm::Dgg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DpDk => "DP-dK",
            Algorithm::TmF => "TmF",
            Algorithm::PrivSkg => "PrivSKG",
            Algorithm::PrivHrg => "PrivHRG",
            Algorithm::PrivGraph => "PrivGraph",
            Algorithm::Dgg => "DGG",
        }
    }

    /// One-line description for help output.
    pub fn summary(self) -> &'static str {
        match self {
            Algorithm::DpDk => "joint degree matrix with smooth-sensitivity noise, dK-2 construction",
            Algorithm::TmF => "top-m filtering of the noisy adjacency matrix",
            Algorithm::PrivSkg => "stochastic Kronecker initiator fitted to noisy moments",
            Algorithm::PrivHrg => "hierarchical random graph sampled by private MCMC",
            Algorithm::PrivGraph => "private communities plus per-community Chung-Lu",
            Algorithm::Dgg => "noisy degree sequence fed to BTER",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = |x: &str| x.to_ascii_lowercase().replace(['-', '_'], "");
        Algorithm::ALL
            .into_iter()
            .find(|a| norm(a.name()) == norm(s))
            .ok_or_else(|| {
                let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
                Error::Config(format!("unknown algorithm {s:?} (known: {})", known.join(", ")))
            })
    }
}

/// Per-algorithm settings, one section per algorithm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub dgg: DggConfig,
    pub tmf: TmfConfig,
    pub dpdk: DpdkConfig,
    pub privskg: PrivSkgConfig,
    pub privhrg: PrivHrgConfig,
    pub privgraph: PrivGraphConfig,
}

impl SynthConfig {
    /// Stage labels and budget fractions `alg` will use.
    pub fn ledger_template(&self, alg: Algorithm) -> Vec<(&'static str, f64)> {
        match alg {
            Algorithm::Dgg => vec![("degrees", 1.0)],
            Algorithm::DpDk => vec![(dpdk::stage_label(&self.dpdk), 1.0)],
            Algorithm::TmF => {
                let f = self.tmf.edge_count_fraction;
                vec![("edge_count", f), ("cells", 1.0 - f)]
            }
            Algorithm::PrivSkg => {
                let [e, h, t] = self.privskg.fractions;
                vec![("edges", e), ("two_stars", h), ("triangles", t)]
            }
            Algorithm::PrivHrg => {
                let f = self.privhrg.dendrogram_fraction;
                vec![("dendrogram", f), ("probabilities", 1.0 - f)]
            }
            Algorithm::PrivGraph => privgraph::stages(&self.privgraph),
        }
    }

    /// Checks every fraction and cap; returns one message per problem.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        for alg in Algorithm::ALL {
            let shares = self.ledger_template(alg);
            let sum: f64 = shares.iter().map(|s| s.1).sum();
            if shares.iter().any(|s| !(s.1 > 0.0 && s.1 < 1.0 + 1e-12)) || (sum - 1.0).abs() > 1e-9 {
                out.push(format!("{alg}: budget fractions {shares:?} must be positive and sum to 1"));
            }
        }
        if !(0.0..=1.0).contains(&self.dgg.target_acc) {
            out.push(format!("DGG: target_acc {} outside [0, 1]", self.dgg.target_acc));
        }
        if self.privhrg.max_steps == Some(0) {
            out.push("PrivHRG: max_steps must be positive".into());
        }
        if self.privskg.restarts == 0 {
            out.push("PrivSKG: restarts must be positive".into());
        }
        if self.privgraph.max_supernodes < 1 {
            out.push("PrivGraph: max_supernodes must be positive".into());
        }
        out
    }
}

/// Intermediate products kept for inspection and testing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Intermediates {
    /// Repaired noisy degree sequence (DGG).
    pub degrees: Option<DegreeSequence>,
    /// Sampled dendrogram with noisy probabilities (PrivHRG).
    pub dendrogram: Option<Dendrogram>,
    /// Fitted initiator (PrivSKG).
    pub initiator: Option<KroneckerInitiator>,
    /// Private community assignment (PrivGraph).
    pub partition: Option<Vec<usize>>,
}

/// Everything one synthesis run produced.
#[derive(Debug, Clone)]
pub struct SynthesisRecord {
    pub algorithm: Algorithm,
    pub output: Graph,
    pub ledger: BudgetLedger,
    /// Wall time per pipeline stage, in order.
    pub stage_seconds: Vec<(String, f64)>,
    /// Named scalars such as the noisy edge count.
    pub summaries: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub intermediates: Intermediates,
}

/// Collects stage timings, summaries and warnings during a run.
pub(crate) struct RunLog {
    stage_seconds: Vec<(String, f64)>,
    summaries: BTreeMap<String, f64>,
    warnings: Vec<String>,
    started: Instant,
}

impl RunLog {
    pub(crate) fn new() -> Self {
        RunLog {
            stage_seconds: Vec::new(),
            summaries: BTreeMap::new(),
            warnings: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Closes the current stage under `label` and starts the next.
    pub(crate) fn stage(&mut self, label: &str) {
        let now = Instant::now();
        self.stage_seconds
            .push((label.to_string(), now.duration_since(self.started).as_secs_f64()));
        self.started = now;
    }

    pub(crate) fn summary(&mut self, key: &str, value: f64) {
        self.summaries.insert(key.to_string(), value);
    }

    pub(crate) fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    pub(crate) fn finish(
        self,
        algorithm: Algorithm,
        output: Graph,
        ledger: BudgetLedger,
        intermediates: Intermediates,
    ) -> Result<SynthesisRecord> {
        if !ledger.is_balanced() || !ledger.all_charged() {
            return Err(Error::Budget(format!("{algorithm}: ledger not fully spent: {ledger:?}")));
        }
        Ok(SynthesisRecord {
            algorithm,
            output,
            ledger,
            stage_seconds: self.stage_seconds,
            summaries: self.summaries,
            warnings: self.warnings,
            intermediates,
        })
    }
}

pub(crate) fn ledger_for(cfg: &SynthConfig, alg: Algorithm, budget: PrivacyBudget) -> Result<BudgetLedger> {
    split_budget(budget, &cfg.ledger_template(alg))
}

/// Runs `alg` on `g`. The same inputs always give the same output.
pub fn generate(alg: Algorithm, g: &Graph, budget: PrivacyBudget, seed: u64, cfg: &SynthConfig) -> Result<SynthesisRecord> {
    match alg {
        Algorithm::Dgg => dgg_generate(g, budget, seed, cfg),
        Algorithm::TmF => tmf_generate(g, budget, seed, cfg),
        Algorithm::DpDk => dpdk_generate(g, budget, seed, cfg),
        Algorithm::PrivSkg => privskg_generate(g, budget, seed, cfg),
        Algorithm::PrivHrg => privhrg_generate(g, budget, seed, cfg),
        Algorithm::PrivGraph => privgraph_generate(g, budget, seed, cfg),
    }
}

/// Rounds a noisy count to the nearest integer within `[lo, hi]`.
pub(crate) fn round_clamp(x: f64, lo: f64, hi: f64) -> f64 {
    if x.is_nan() {
        lo
    } else {
        x.round().clamp(lo, hi)
    }
}
