//! Benchmark sweeps: run every (algorithm, dataset, ε, repetition) cell,
//! score the queries, average over repetitions, count best algorithms, and
//! write reports.

mod aggregate;
mod grid;
mod memory;
pub mod report;

pub use aggregate::{
    aggregate_means, best_counts, best_counts_by, AggregateRow, BestCountOptions, BestCountTable, Credit,
    TIE_TOLERANCE,
};
pub use grid::{run_grid, run_grid_with, CellKey, CellResult, ExperimentGrid, QueryOutcome, RawRow};
pub use memory::{measure_resources, tracking_installed, Measured, TrackingAllocator, MEMORY_METHOD};

use crate::config::RunConfig;
use crate::Result;

/// Everything a finished sweep produced.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub cells: Vec<CellResult>,
    pub aggregates: Vec<AggregateRow>,
    pub best: BestCountTable,
}

/// Runs the configured grid and derives aggregates and best counts.
pub fn run_sweep(cfg: &RunConfig) -> Result<Sweep> {
    let grid = ExperimentGrid::from_config(cfg);
    let cells = run_grid(&grid)?;
    let rows: Vec<RawRow> = cells.iter().flat_map(CellResult::rows).collect();
    let aggregates = aggregate_means(&rows);
    let opts = BestCountOptions {
        strict: cfg.run.strict_ties,
        require_complete: false,
    };
    let best = best_counts(&aggregates, &grid.algorithms, opts)?;
    Ok(Sweep {
        cells,
        aggregates,
        best,
    })
}
