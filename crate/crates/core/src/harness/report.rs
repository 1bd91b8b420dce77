use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::aggregate::{AggregateRow, BestCountTable};
use super::grid::{CellResult, RawRow};
use super::memory::MEMORY_METHOD;
use crate::config::RunConfig;
use crate::synth::Algorithm;
use crate::{Error, Result};

pub const RAW_CSV: &str = "raw.csv";
pub const AGGREGATE_CSV: &str = "aggregate.csv";
pub const BEST_BY_GRAPH_CSV: &str = "best_counts_by_graph.csv";
pub const BEST_BY_QUERY_CSV: &str = "best_counts_by_query.csv";
pub const LONG_CSV: &str = "long.csv";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const SCHEMA_VERSION: u32 = 1;

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Report(format!("{}: {e}", path.display()))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Raw rows in cell order.
pub fn write_raw(path: &Path, cells: &[CellResult]) -> Result<()> {
    write_rows(path, cells.iter().flat_map(CellResult::rows))
}

pub fn read_raw(path: &Path) -> Result<Vec<RawRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

pub fn write_aggregates(path: &Path, aggs: &[AggregateRow]) -> Result<()> {
    write_rows(path, aggs)
}

/// Plot-ready long format: one row per (dataset, query, metric, algorithm,
/// ε), sorted so each (dataset, query, metric) facet is contiguous.
pub fn write_long(path: &Path, aggs: &[AggregateRow]) -> Result<()> {
    #[derive(Serialize)]
    struct Long<'a> {
        dataset: &'a str,
        query: String,
        metric: String,
        algorithm: Algorithm,
        epsilon: f64,
        mean: f64,
        sd: f64,
    }
    let mut sorted: Vec<&AggregateRow> = aggs.iter().collect();
    sorted.sort_by(|a, b| {
        (a.dataset.as_str(), a.query, a.metric.name(), a.algorithm.name())
            .cmp(&(b.dataset.as_str(), b.query, b.metric.name(), b.algorithm.name()))
            .then(a.epsilon.total_cmp(&b.epsilon))
    });
    write_rows(
        path,
        sorted.into_iter().map(|r| Long {
            dataset: &r.dataset,
            query: r.query.to_string(),
            metric: r.metric.to_string(),
            algorithm: r.algorithm,
            epsilon: r.epsilon,
            mean: r.mean,
            sd: r.sd,
        }),
    )
}

/// Per-graph layout: one row per (ε, algorithm), one column per dataset.
pub fn write_best_by_graph(path: &Path, t: &BestCountTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["epsilon".to_string(), "algorithm".to_string()];
    header.extend(t.datasets.iter().cloned());
    w.write_record(&header).map_err(csv_err(path))?;
    for &e in &t.epsilons {
        for &a in &t.algorithms {
            let mut rec = vec![e.to_string(), a.to_string()];
            rec.extend(t.datasets.iter().map(|d| t.graph_count(a, d, e).to_string()));
            w.write_record(&rec).map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Per-query layout: one row per algorithm, one column per query, and a
/// total.
pub fn write_best_by_query(path: &Path, t: &BestCountTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header = vec!["algorithm".to_string()];
    header.extend(t.queries.iter().map(|q| q.to_string()));
    header.push("total".into());
    w.write_record(&header).map_err(csv_err(path))?;
    for &a in &t.algorithms {
        let counts: Vec<usize> = t.queries.iter().map(|&q| t.query_count(a, q)).collect();
        let mut rec = vec![a.to_string()];
        rec.extend(counts.iter().map(usize::to_string));
        rec.push(counts.iter().sum::<usize>().to_string());
        w.write_record(&rec).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the aggregate, best-count and long-format files derived from
/// `aggs`. Used both after a run and when re-aggregating a raw file.
pub fn write_derived(dir: &Path, aggs: &[AggregateRow], table: &BestCountTable) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = [AGGREGATE_CSV, BEST_BY_GRAPH_CSV, BEST_BY_QUERY_CSV, LONG_CSV]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_aggregates(&paths[0], aggs)?;
    write_best_by_graph(&paths[1], table)?;
    write_best_by_query(&paths[2], table)?;
    write_long(&paths[3], aggs)?;
    Ok(paths)
}

/// Manifest with the configuration echo, cell seeds, declared budget
/// splits and anything that went wrong.
pub fn manifest(cfg: &RunConfig, cells: &[CellResult], table: &BestCountTable) -> serde_json::Value {
    let ledgers: serde_json::Map<String, serde_json::Value> = cfg
        .grid
        .algorithms
        .iter()
        .map(|&a| {
            let stages: Vec<_> = cfg
                .synth
                .ledger_template(a)
                .into_iter()
                .map(|(label, fraction)| json!({ "label": label, "fraction": fraction }))
                .collect();
            (a.name().to_string(), json!(stages))
        })
        .collect();
    let seeds: Vec<_> = cells
        .iter()
        .map(|c| {
            json!({
                "algorithm": c.key.algorithm,
                "dataset": c.key.dataset,
                "epsilon": c.key.epsilon,
                "repetition": c.key.repetition,
                "seed": c.seed,
            })
        })
        .collect();
    let failures: Vec<_> = cells
        .iter()
        .filter_map(|c| c.outcome.as_ref().err().map(|e| json!({ "cell": c.key, "error": e })))
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "dpgraph_version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "cells": cells.len(),
        "raw_rows": cells.iter().map(|c| c.rows().len()).sum::<usize>(),
        "cell_seeds": seeds,
        "ledger_templates": ledgers,
        "memory_method": MEMORY_METHOD,
        "tie_rule": if table.strict { "strict: first tied algorithm in grid order" } else { "all algorithms within 1e-12 of the best are credited" },
        "failures": failures,
        "missing_aggregates": table.missing,
        "files": [RAW_CSV, AGGREGATE_CSV, BEST_BY_GRAPH_CSV, BEST_BY_QUERY_CSV, LONG_CSV, MANIFEST_JSON],
    })
}

/// Writes every report artifact into `dir` and returns the paths.
pub fn write_report(
    dir: &Path,
    cfg: &RunConfig,
    cells: &[CellResult],
    aggs: &[AggregateRow],
    table: &BestCountTable,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let raw = dir.join(RAW_CSV);
    write_raw(&raw, cells)?;
    let mut paths = vec![raw];
    paths.extend(write_derived(dir, aggs, table)?);
    let m = dir.join(MANIFEST_JSON);
    let text = serde_json::to_string_pretty(&manifest(cfg, cells, table)).map_err(|e| Error::Report(e.to_string()))?;
    fs::write(&m, text + "\n").map_err(|e| Error::io(&m, e))?;
    paths.push(m);
    Ok(paths)
}
