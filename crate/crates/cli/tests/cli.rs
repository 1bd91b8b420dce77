use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dpgraph::queries::QueryId;
use dpgraph::synth::Algorithm;

fn dpgraph(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpgraph"))
        .args(args)
        .current_dir(cwd)
        .env_remove("RUST_LOG")
        .env_remove("DPGRAPH_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn k4(dir: &Path) {
    fs::write(dir.join("k4.txt"), "1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n").unwrap();
}

const TOY: &str = r#"
[grid]
algorithms = ["TmF", "DGG"]
epsilons = [1.0, 10.0]
queries = ["Q1", "Q2", "Q11"]
repetitions = 2
root_seed = 3

[[dataset]]
name = "ba300"
source = "builtin:ba300"
type = "synthetic"

[run]
workers = 2
"#;

#[test]
fn help_lists_every_algorithm_and_query() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpgraph(&["--help"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for a in Algorithm::ALL {
        assert!(text.contains(a.name()), "missing {a}");
    }
    for q in QueryId::ALL {
        assert!(text.contains(&format!("{} ", q.code())) && text.contains(q.name()), "missing {q}");
    }
}

#[test]
fn query_k4() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let acc = dpgraph(&["query", "--input", "k4.txt", "--query", "acc"], dir.path());
    assert!(acc.status.success());
    assert_eq!(stdout(&acc).trim().parse::<f64>().unwrap(), 1.0);
    let tri = dpgraph(&["query", "--input", "k4.txt", "--query", "triangles"], dir.path());
    assert_eq!(stdout(&tri).trim(), "4");
    let dist = dpgraph(&["query", "--input", "k4.txt", "--query", "Q6"], dir.path());
    assert_eq!(stdout(&dist), "degree,probability\n0,0\n1,0\n2,0\n3,1\n");
}

#[test]
fn unknown_query_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let o = dpgraph(&["query", "--input", "k4.txt", "--query", "Q16"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dpgraph(&["query", "--input", "nope.txt", "--query", "Q1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.txt"));
}

#[test]
fn generate_dgg_zero_noise_keeps_k4_degrees() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let args = ["generate", "--alg", "dgg", "--input", "k4.txt", "--epsilon", "1e6", "--seed", "7", "-o", "out.txt"];
    let o = dpgraph(&args, dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.txt.ledger.json")).unwrap()).unwrap();
    assert_eq!(meta["noisy_degrees"], serde_json::json!([3, 3, 3, 3]));
    assert_eq!(meta["nodes"], 4);
    let labels = fs::read_to_string(dir.path().join("out.txt.labels")).unwrap();
    assert!(labels.contains('4'));

    let first = fs::read(dir.path().join("out.txt")).unwrap();
    let first_meta = fs::read(dir.path().join("out.txt.ledger.json")).unwrap();
    assert!(dpgraph(&args, dir.path()).status.success());
    assert_eq!(fs::read(dir.path().join("out.txt")).unwrap(), first);
    assert_eq!(fs::read(dir.path().join("out.txt.ledger.json")).unwrap(), first_meta);
}

#[test]
fn generate_needs_delta_where_applicable() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let o = dpgraph(&["generate", "--alg", "dpdk", "--input", "k4.txt", "--epsilon", "1", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--delta"));
    assert!(fs::read_dir(dir.path()).unwrap().count() == 1, "nothing written");

    let o = dpgraph(
        &["generate", "--alg", "tmf", "--input", "k4.txt", "--epsilon", "1", "--seed", "1", "-o", "t.txt"],
        dir.path(),
    );
    assert!(o.status.success());
}

#[test]
fn generate_rejects_bad_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let o = dpgraph(&["generate", "--alg", "dgg", "--input", "k4.txt", "--epsilon", "-1", "--seed", "1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn default_output_goes_to_dpgraph_out() {
    let dir = tempfile::tempdir().unwrap();
    k4(dir.path());
    let out = dir.path().join("synth");
    let o = Command::new(env!("CARGO_BIN_EXE_dpgraph"))
        .args(["generate", "--alg", "dgg", "--input", "k4.txt", "--epsilon", "2", "--seed", "5"])
        .current_dir(dir.path())
        .env("DPGRAPH_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(out.join("dgg_k4_eps2_seed5.txt").is_file());
}

#[test]
fn bench_dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.toml"), TOY).unwrap();
    let o = dpgraph(&["bench", "--config", "toy.toml", "--dry-run", "--out", "res"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("planned: 8 synthesis runs"), "{}", stdout(&o));
    assert!(!dir.path().join("res").exists());
}

#[test]
fn bench_lists_all_config_problems() {
    let dir = tempfile::tempdir().unwrap();
    let bad = TOY.replace("repetitions = 2", "repetitions = 0").replace("epsilons = [1.0, 10.0]", "epsilons = [-1.0]");
    fs::write(dir.path().join("bad.toml"), bad).unwrap();
    let o = dpgraph(&["bench", "--config", "bad.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("repetitions") && err.contains("epsilons"), "{err}");
}

fn strip_resource_columns(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            // raw.csv columns: ..., value, wall_s, peak_bytes, warnings
            let n = f.len();
            [&f[..n - 3], &f[n - 1..]].concat().join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bench_toy_grid_and_report() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("toy.toml"), TOY).unwrap();
    let run = |out: &str| {
        let o = dpgraph(&["bench", "--config", "toy.toml", "--seed", "1", "--out", out], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o
    };
    let o = run("a");
    assert!(stdout(&o).contains("TmF"));
    let a = dir.path().join("a");
    for f in ["raw.csv", "aggregate.csv", "best_counts_by_graph.csv", "best_counts_by_query.csv", "long.csv", "manifest.json"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    // 8 syntheses, each scored on 3 queries with one metric apiece (Q11 adds
    // MRE over local clustering).
    let raw = fs::read_to_string(a.join("raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 1 + 8 * 4);

    run("b");
    let raw_b = fs::read_to_string(dir.path().join("b/raw.csv")).unwrap();
    assert_eq!(strip_resource_columns(&raw), strip_resource_columns(&raw_b));
    assert_eq!(
        fs::read(a.join("aggregate.csv")).unwrap(),
        fs::read(dir.path().join("b/aggregate.csv")).unwrap()
    );

    let before = fs::read(a.join("best_counts_by_query.csv")).unwrap();
    fs::remove_file(a.join("best_counts_by_query.csv")).unwrap();
    let o = dpgraph(&["report", "--raw", "a/raw.csv"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(a.join("best_counts_by_query.csv")).unwrap(), before);
}
