use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::memory::measure_resources;
use crate::config::RunConfig;
use crate::dp::{derive_seed, BudgetLedger, PrivacyBudget};
use crate::graph::DatasetDescriptor;
use crate::metrics::{score, MetricId, MetricOptions, Score};
use crate::queries::{evaluate, local_clustering, triangle_counts, Evaluation, QueryId};
use crate::synth::{generate, Algorithm, SynthConfig};
use crate::{Error, Graph, Result};

/// A full sweep: every algorithm on every dataset at every ε, repeated.
#[derive(Debug, Clone)]
pub struct ExperimentGrid {
    pub algorithms: Vec<Algorithm>,
    pub datasets: Vec<DatasetDescriptor>,
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub queries: Vec<QueryId>,
    pub repetitions: u32,
    pub root_seed: u64,
    pub synth: SynthConfig,
    pub metrics: MetricOptions,
    pub workers: usize,
    /// Directory that relative dataset paths resolve against.
    pub base_dir: Option<PathBuf>,
}

impl ExperimentGrid {
    pub fn from_config(cfg: &RunConfig) -> Self {
        ExperimentGrid {
            algorithms: cfg.grid.algorithms.clone(),
            datasets: cfg.datasets.clone(),
            epsilons: cfg.grid.epsilons.clone(),
            delta: cfg.grid.delta,
            queries: cfg.grid.queries.clone(),
            repetitions: cfg.grid.repetitions,
            root_seed: cfg.grid.root_seed,
            synth: cfg.synth.clone(),
            metrics: cfg.metrics,
            workers: cfg.run.workers,
            base_dir: cfg.base_dir.clone(),
        }
    }

    /// Number of synthesis runs.
    pub fn cell_count(&self) -> usize {
        self.algorithms.len() * self.datasets.len() * self.epsilons.len() * self.repetitions as usize
    }

    /// Cell keys in report order: algorithm, dataset, ε, repetition.
    pub fn cell_keys(&self) -> Vec<CellKey> {
        let mut keys = Vec::with_capacity(self.cell_count());
        for &algorithm in &self.algorithms {
            for d in &self.datasets {
                for &epsilon in &self.epsilons {
                    for repetition in 0..self.repetitions {
                        keys.push(CellKey {
                            algorithm,
                            dataset: d.name.clone(),
                            epsilon,
                            repetition,
                        });
                    }
                }
            }
        }
        keys
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellKey {
    pub algorithm: Algorithm,
    pub dataset: String,
    pub epsilon: f64,
    pub repetition: u32,
}

impl CellKey {
    /// Seed of this cell's synthesis run.
    pub fn seed(&self, root_seed: u64) -> u64 {
        derive_seed(
            root_seed,
            &[
                self.algorithm.name(),
                &self.dataset,
                &self.epsilon.to_string(),
                &self.repetition.to_string(),
            ],
        )
    }
}

/// Scores for one query on one synthetic graph. `scores` is empty when the
/// query could not be evaluated; the reason is in `warnings`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub query: QueryId,
    pub scores: Vec<Score>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub key: CellKey,
    pub seed: u64,
    pub wall_s: f64,
    pub peak_bytes: Option<u64>,
    /// Per-query scores, or the failure that stopped the cell.
    pub outcome: std::result::Result<Vec<QueryOutcome>, String>,
    /// Warnings raised by the synthesizer.
    pub warnings: Vec<String>,
    pub ledger: Option<BudgetLedger>,
}

/// One line of the raw results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub algorithm: Algorithm,
    pub dataset: String,
    pub epsilon: f64,
    pub query: Option<QueryId>,
    pub repetition: u32,
    pub metric: Option<MetricId>,
    pub value: f64,
    pub wall_s: f64,
    pub peak_bytes: Option<u64>,
    pub warnings: String,
}

impl CellResult {
    /// Raw rows: one per (query, metric), or a single row without query and
    /// metric for a failed cell.
    pub fn rows(&self) -> Vec<RawRow> {
        let row = |query, metric, value, warnings: Vec<String>| RawRow {
            algorithm: self.key.algorithm,
            dataset: self.key.dataset.clone(),
            epsilon: self.key.epsilon,
            query,
            repetition: self.key.repetition,
            metric,
            value,
            wall_s: self.wall_s,
            peak_bytes: self.peak_bytes,
            warnings: warnings.join("; "),
        };
        match &self.outcome {
            Err(msg) => vec![row(None, None, f64::NAN, vec![format!("failed: {msg}")])],
            Ok(outcomes) => outcomes
                .iter()
                .flat_map(|o| {
                    let mut base = self.warnings.clone();
                    base.extend(o.warnings.iter().cloned());
                    if o.scores.is_empty() {
                        let primary = MetricId::primary_for(o.query);
                        return vec![row(Some(o.query), Some(primary), f64::NAN, base)];
                    }
                    o.scores
                        .iter()
                        .map(|s| {
                            let mut w = base.clone();
                            w.extend(s.flags.iter().cloned());
                            row(Some(o.query), Some(s.metric), s.value, w)
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

/// Query results on an input graph, shared by every cell of that dataset.
struct TrueSide {
    graph: Graph,
    values: HashMap<QueryId, std::result::Result<Evaluation, String>>,
    triangles: Vec<f64>,
    local_cc: Vec<f64>,
}

fn per_node(q: QueryId, g: &Graph) -> Option<Vec<f64>> {
    match q {
        QueryId::Q3 => Some(triangle_counts(g).0.into_iter().map(|t| t as f64).collect()),
        QueryId::Q11 => Some(local_clustering(g)),
        _ => None,
    }
}

fn true_side(grid: &ExperimentGrid, d: &DatasetDescriptor) -> Result<TrueSide> {
    let graph = d.load(grid.base_dir.as_deref())?;
    let seed = derive_seed(grid.root_seed, &[&d.name, "true-queries"]);
    let values = grid
        .queries
        .par_iter()
        .map(|&q| (q, evaluate(q, &graph, seed).map_err(|e| e.to_string())))
        .collect();
    Ok(TrueSide {
        triangles: per_node(QueryId::Q3, &graph).unwrap_or_default(),
        local_cc: per_node(QueryId::Q11, &graph).unwrap_or_default(),
        graph,
        values,
    })
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".into()
    }
}

fn score_queries(grid: &ExperimentGrid, truth: &TrueSide, out: &Graph, seed: u64) -> Vec<QueryOutcome> {
    let query_seed = derive_seed(seed, &["queries"]);
    grid.queries
        .iter()
        .map(|&q| {
            let fail = |msg: String| QueryOutcome {
                query: q,
                scores: Vec::new(),
                warnings: vec![msg],
            };
            let t = match &truth.values[&q] {
                Ok(t) => t,
                Err(e) => return fail(format!("undefined on input: {e}")),
            };
            let s = match evaluate(q, out, query_seed) {
                Ok(s) => s,
                Err(e) => return fail(format!("undefined on output: {e}")),
            };
            let syn_aux = per_node(q, out);
            let true_aux = match q {
                QueryId::Q3 => Some(&truth.triangles),
                QueryId::Q11 => Some(&truth.local_cc),
                _ => None,
            };
            let aux = true_aux.zip(syn_aux.as_ref()).map(|(a, b)| (a.as_slice(), b.as_slice()));
            match score(q, &t.value, &s.value, aux, grid.metrics) {
                Ok(scores) => QueryOutcome {
                    query: q,
                    scores,
                    warnings: s.warnings,
                },
                Err(e) => fail(e.to_string()),
            }
        })
        .collect()
}

fn run_cell(grid: &ExperimentGrid, truth: &TrueSide, key: CellKey, hook: &(dyn Fn(&CellKey) + Sync)) -> CellResult {
    let seed = key.seed(grid.root_seed);
    let attempt = catch_unwind(AssertUnwindSafe(|| {
        hook(&key);
        let budget = PrivacyBudget::new(key.epsilon, grid.delta)?;
        let measured = measure_resources(|| generate(key.algorithm, &truth.graph, budget, seed, &grid.synth));
        let rec = measured.value?;
        let outcomes = score_queries(grid, truth, &rec.output, seed);
        Ok::<_, Error>((measured.wall_s, measured.peak_bytes, rec.warnings, rec.ledger, outcomes))
    }));
    let failed = |msg: String| CellResult {
        key: key.clone(),
        seed,
        wall_s: 0.0,
        peak_bytes: None,
        outcome: Err(msg),
        warnings: Vec::new(),
        ledger: None,
    };
    match attempt {
        Ok(Ok((wall_s, peak_bytes, warnings, ledger, outcomes))) => CellResult {
            key,
            seed,
            wall_s,
            peak_bytes,
            outcome: Ok(outcomes),
            warnings,
            ledger: Some(ledger),
        },
        Ok(Err(e)) => failed(e.to_string()),
        Err(payload) => failed(format!("panic: {}", panic_message(payload))),
    }
}

/// Runs the grid on a pool of `grid.workers` threads. Cells come back in
/// [`ExperimentGrid::cell_keys`] order whatever order they finish in.
pub fn run_grid(grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    run_grid_with(grid, &|_| {})
}

/// [`run_grid`] with a hook called at the start of every cell, inside the
/// cell's failure boundary.
pub fn run_grid_with(grid: &ExperimentGrid, hook: &(dyn Fn(&CellKey) + Sync)) -> Result<Vec<CellResult>> {
    if grid.cell_count() == 0 || grid.queries.is_empty() {
        return Err(Error::Config("experiment grid is empty".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let truths: HashMap<String, TrueSide> = grid
            .datasets
            .iter()
            .map(|d| true_side(grid, d).map(|t| (d.name.clone(), t)))
            .collect::<Result<_>>()?;
        Ok(grid
            .cell_keys()
            .into_par_iter()
            .map(|key| {
                let truth = &truths[&key.dataset];
                run_cell(grid, truth, key, hook)
            })
            .collect())
    })
}
