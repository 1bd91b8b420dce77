use std::time::Duration;

use dpgraph::config::RunConfig;
use dpgraph::harness::{
    aggregate_means, best_counts, measure_resources, report, run_grid, run_grid_with, tracking_installed,
    BestCountOptions, CellResult, ExperimentGrid, RawRow, TrackingAllocator,
};
use dpgraph::metrics::MetricId;
use dpgraph::synth::Algorithm;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

const TOY: &str = r#"
[grid]
algorithms = ["TmF", "DGG"]
epsilons = [1.0, 10.0]
queries = ["Q2", "Q6", "Q12"]
repetitions = 2
root_seed = 11

[[dataset]]
name = "ba300"
source = "builtin:ba300"
type = "synthetic"

[run]
workers = 3
"#;

fn toy() -> RunConfig {
    let cfg = RunConfig::from_toml(TOY).unwrap();
    cfg.validate().unwrap();
    cfg
}

fn rows(cells: &[CellResult]) -> Vec<RawRow> {
    cells.iter().flat_map(CellResult::rows).collect()
}

#[test]
fn toy_grid_cardinality() {
    let grid = ExperimentGrid::from_config(&toy());
    assert_eq!(grid.cell_count(), 2 * 2 * 2);
    let cells = run_grid(&grid).unwrap();
    assert_eq!(cells.len(), 8);
    assert!(cells.iter().all(|c| c.outcome.is_ok()), "{cells:#?}");
    let outcomes: usize = cells.iter().map(|c| c.outcome.as_ref().unwrap().len()).sum();
    assert_eq!(outcomes, 8 * 3);
    // Q2 has one metric (RE), Q6 three (KL, HD, KS), Q12 four (NMI, ARI, AMI, Avg-F1).
    assert_eq!(rows(&cells).len(), 8 * (1 + 3 + 4));
    for c in &cells {
        let first: Vec<MetricId> = c.outcome.as_ref().unwrap().iter().map(|o| o.scores[0].metric).collect();
        assert_eq!(first, vec![MetricId::Re, MetricId::Kl, MetricId::Nmi]);
    }
}

#[test]
fn cells_keep_grid_order_and_derived_seeds() {
    let grid = ExperimentGrid::from_config(&toy());
    let cells = run_grid(&grid).unwrap();
    for (c, k) in cells.iter().zip(grid.cell_keys()) {
        assert_eq!(c.key, k);
        assert_eq!(c.seed, k.seed(grid.root_seed));
    }
    let mut seeds: Vec<u64> = cells.iter().map(|c| c.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), cells.len());
}

fn strip_resources(rows: &[RawRow]) -> Vec<RawRow> {
    rows.iter()
        .cloned()
        .map(|mut r| {
            r.wall_s = 0.0;
            r.peak_bytes = None;
            r
        })
        .collect()
}

#[test]
fn same_seed_same_rows_across_worker_counts() {
    let mut cfg = toy();
    let a = run_grid(&ExperimentGrid::from_config(&cfg)).unwrap();
    cfg.run.workers = 1;
    let b = run_grid(&ExperimentGrid::from_config(&cfg)).unwrap();
    let (ra, rb) = (strip_resources(&rows(&a)), strip_resources(&rows(&b)));
    assert_eq!(ra.len(), rb.len());
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!(x.value.to_bits(), y.value.to_bits(), "{x:?} vs {y:?}");
        assert_eq!(x.warnings, y.warnings);
    }
    cfg.grid.root_seed += 1;
    let c = run_grid(&ExperimentGrid::from_config(&cfg)).unwrap();
    assert_ne!(strip_resources(&rows(&c)), ra);
}

#[test]
fn a_panicking_cell_does_not_take_down_the_sweep() {
    let grid = ExperimentGrid::from_config(&toy());
    let cells = run_grid_with(&grid, &|k| {
        if k.algorithm == Algorithm::Dgg && k.epsilon == 10.0 && k.repetition == 1 {
            panic!("injected failure");
        }
    })
    .unwrap();
    let failed: Vec<&CellResult> = cells.iter().filter(|c| c.outcome.is_err()).collect();
    assert_eq!(failed.len(), 1);
    let msg = failed[0].outcome.as_ref().unwrap_err();
    assert!(msg.contains("panic") && msg.contains("injected failure"), "{msg}");
    let failed_rows = failed[0].rows();
    assert_eq!(failed_rows.len(), 1);
    assert!(failed_rows[0].value.is_nan() && failed_rows[0].query.is_none());
    assert!(failed_rows[0].warnings.starts_with("failed: "));

    // The surviving repetition still yields a mean for that cell group.
    let aggs = aggregate_means(&rows(&cells));
    let group = aggs
        .iter()
        .find(|a| a.algorithm == Algorithm::Dgg && a.epsilon == 10.0 && a.metric == MetricId::Re)
        .unwrap();
    assert_eq!(group.n, 1);
}

#[test]
fn report_files_round_trip() {
    let cfg = toy();
    let cells = run_grid(&ExperimentGrid::from_config(&cfg)).unwrap();
    let aggs = aggregate_means(&rows(&cells));
    let table = best_counts(&aggs, &cfg.grid.algorithms, BestCountOptions::default()).unwrap();
    assert!(table.violations(&aggs).is_empty());
    let dir = tempfile::tempdir().unwrap();
    let paths = report::write_report(dir.path(), &cfg, &cells, &aggs, &table).unwrap();
    assert_eq!(paths.len(), 6);

    let raw = report::read_raw(&dir.path().join(report::RAW_CSV)).unwrap();
    assert_eq!(raw.len(), rows(&cells).len());
    let again = aggregate_means(&raw);
    assert_eq!(again.len(), aggs.len());
    for (a, b) in again.iter().zip(&aggs) {
        assert_eq!((a.algorithm, &a.dataset, a.query, a.metric), (b.algorithm, &b.dataset, b.query, b.metric));
        assert!((a.mean - b.mean).abs() <= 1e-12 * b.mean.abs().max(1.0));
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(report::MANIFEST_JSON)).unwrap()).unwrap();
    assert_eq!(manifest["cell_seeds"].as_array().unwrap().len(), 8);
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
    let by_graph = std::fs::read_to_string(dir.path().join(report::BEST_BY_GRAPH_CSV)).unwrap();
    assert_eq!(by_graph.lines().count(), 1 + 2 * 2);
}

#[test]
fn peak_memory_sees_a_large_allocation() {
    let m = measure_resources(|| {
        let v = vec![1u8; 16 << 20];
        v.iter().map(|&b| b as u64).sum::<u64>()
    });
    assert_eq!(m.value, 16 << 20);
    assert!(tracking_installed());
    let peak = m.peak_bytes.expect("allocator installed");
    assert!(peak >= 16 << 20, "peak {peak}");
    assert!(peak < 64 << 20, "peak {peak}");
}

#[test]
fn wall_clock_covers_a_sleep() {
    let m = measure_resources(|| std::thread::sleep(Duration::from_millis(150)));
    assert!(m.wall_s >= 0.15 && m.wall_s < 2.0, "{}", m.wall_s);
}

#[test]
fn dataset_files_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let edges: String = (0..30).map(|i| format!("{} {}\n", i, (i + 1) % 30)).collect();
    std::fs::write(dir.path().join("ring.txt"), edges).unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        r#"
[grid]
algorithms = ["TmF"]
epsilons = [5.0]
queries = ["Q1", "Q2"]
repetitions = 1

[[dataset]]
name = "ring"
source = "ring.txt"
type = "technology"
"#,
    )
    .unwrap();
    let cfg = RunConfig::from_file(&cfg_path).unwrap();
    cfg.validate().unwrap();
    let cells = run_grid(&ExperimentGrid::from_config(&cfg)).unwrap();
    let r = rows(&cells);
    assert_eq!(r.len(), 2);
    // Q1 is the node count, which TmF keeps.
    assert_eq!(r[0].value, 0.0);
}
