use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use log::info;
use serde_json::json;

use dpgraph::config::RunConfig;
use dpgraph::dp::PrivacyBudget;
use dpgraph::graph::{builtin_graph, load_edge_list_with_labels, write_edge_list, write_label_map, DatasetSource};
use dpgraph::harness::{self, report, BestCountOptions, BestCountTable, ExperimentGrid};
use dpgraph::queries::{evaluate, QueryId, QueryValue};
use dpgraph::synth::{generate as synthesize, Algorithm, DpdkMode, NoiseMode, SynthConfig};
use dpgraph::Graph;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "DPGRAPH_OUT";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    Usage(String),
    /// Anything that failed while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<dpgraph::Error> for CliError {
    fn from(e: dpgraph::Error) -> Self {
        match e {
            dpgraph::Error::Config(_) | dpgraph::Error::Budget(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

type Result<T> = std::result::Result<T, CliError>;

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

/// A graph from a file or a `builtin:` tag, with original IDs for files.
fn load_input(input: &str) -> Result<(Graph, Option<Vec<u64>>)> {
    match DatasetSource::parse(input) {
        DatasetSource::Builtin(tag) => Ok((builtin_graph(&tag, 1)?, None)),
        DatasetSource::Path(p) => {
            let loaded = load_edge_list_with_labels(&p)?;
            Ok((loaded.graph, Some(loaded.labels)))
        }
    }
}

/// Per-algorithm settings from a run config (its `[synth.*]` sections) or
/// from a file holding only those sections.
fn load_synth_config(path: &Path) -> Result<SynthConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    if let Ok(run) = RunConfig::from_toml(&text) {
        return Ok(run.synth);
    }
    toml_synth(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn toml_synth(text: &str) -> std::result::Result<SynthConfig, toml::de::Error> {
    #[derive(serde::Deserialize)]
    struct Wrapper {
        synth: SynthConfig,
    }
    toml::from_str::<SynthConfig>(text).or_else(|e| toml::from_str::<Wrapper>(text).map(|w| w.synth).map_err(|_| e))
}

fn needs_delta(alg: Algorithm, cfg: &SynthConfig) -> bool {
    match alg {
        Algorithm::PrivSkg => true,
        Algorithm::DpDk => cfg.dpdk.mode == DpdkMode::Dk2 && cfg.dpdk.noise == NoiseMode::Smooth,
        _ => false,
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Algorithm name, e.g. DGG or dp-dk.
    #[arg(long)]
    alg: Algorithm,
    /// Edge-list file or builtin:<tag>.
    #[arg(long)]
    input: String,
    #[arg(long)]
    epsilon: f64,
    /// Required for DP-dK (dK-2, smooth noise) and PrivSKG.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: u64,
    /// Output edge list; defaults to a name built from the flags inside
    /// $DPGRAPH_OUT (or the working directory).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// TOML with per-algorithm settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let synth_cfg = match &a.config {
        Some(p) => load_synth_config(p)?,
        None => SynthConfig::default(),
    };
    if a.delta.is_none() && needs_delta(a.alg, &synth_cfg) {
        return Err(CliError::Usage(format!("{} needs --delta (for example --delta 0.01)", a.alg)));
    }
    let budget = PrivacyBudget::new(a.epsilon, a.delta.unwrap_or(0.0))?;
    let (g, labels) = load_input(&a.input)?;
    info!("loaded {} with n={} m={}", a.input, g.n(), g.m());

    let rec = synthesize(a.alg, &g, budget, a.seed, &synth_cfg)?;
    for (stage, secs) in &rec.stage_seconds {
        info!("{stage}: {secs:.3}s");
    }
    for w in &rec.warnings {
        log::warn!("{w}");
    }
    let output = a.output.clone().unwrap_or_else(|| {
        let stem = Path::new(a.input.trim_start_matches("builtin:"))
            .file_stem()
            .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned());
        default_out_dir().join(format!(
            "{}_{stem}_eps{}_seed{}.txt",
            a.alg.name().to_lowercase(),
            a.epsilon,
            a.seed
        ))
    });
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    write_edge_list(&rec.output, &output)?;
    let sidecar = PathBuf::from(format!("{}.ledger.json", output.display()));
    let meta = json!({
        "algorithm": rec.algorithm,
        "input": a.input,
        "seed": a.seed,
        "budget": budget,
        "ledger": rec.ledger,
        "summaries": rec.summaries,
        "warnings": rec.warnings,
        "noisy_degrees": rec.intermediates.degrees.as_ref().map(|d| &d.0),
        "nodes": rec.output.n(),
        "edges": rec.output.m(),
    });
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&sidecar, text + "\n").map_err(io_err(&sidecar))?;
    if let Some(labels) = labels {
        write_label_map(&labels, format!("{}.labels", output.display()))?;
    }
    println!("{}", output.display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Edge-list file or builtin:<tag>.
    #[arg(long)]
    input: String,
    /// Q1..Q15 or a query name such as acc.
    #[arg(long)]
    query: QueryId,
    /// Seed for community detection (Q12, Q13).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write non-scalar results as CSV; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

pub fn query(a: QueryArgs) -> Result<()> {
    let (g, labels) = load_input(&a.input)?;
    let ev = evaluate(a.query, &g, a.seed)?;
    for w in &ev.warnings {
        log::warn!("{w}");
    }
    let node = |i: usize| labels.as_ref().map_or(i as u64, |l| l[i]);
    let csv = match &ev.value {
        QueryValue::Scalar(v) => {
            println!("{v}");
            return Ok(());
        }
        QueryValue::Distribution(p) => {
            let head = if a.query == QueryId::Q6 { "degree" } else { "distance" };
            let mut s = format!("{head},probability\n");
            for (i, x) in p.iter().enumerate() {
                s += &format!("{i},{x}\n");
            }
            s
        }
        QueryValue::Partition(c) => {
            let mut s = String::from("node,community\n");
            for (i, x) in c.iter().enumerate() {
                s += &format!("{},{x}\n", node(i));
            }
            s
        }
        QueryValue::NodeScores(v) => {
            let mut s = String::from("node,score\n");
            for (i, x) in v.iter().enumerate() {
                s += &format!("{},{x}\n", node(i));
            }
            s
        }
    };
    match &a.output {
        Some(p) => fs::write(p, csv).map_err(io_err(p)),
        None => std::io::stdout()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Validate and print the planned work without running or writing.
    #[arg(long)]
    dry_run: bool,
    /// Overrides grid.root_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides run.workers.
    #[arg(long)]
    workers: Option<usize>,
    /// Report directory; overrides run.out_dir and $DPGRAPH_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_best(t: &BestCountTable) {
    let width = t.datasets.iter().map(String::len).max().unwrap_or(0).max(3);
    print!("{:>8}  {:<10}", "epsilon", "algorithm");
    for d in &t.datasets {
        print!("  {d:>width$}");
    }
    println!();
    for &e in &t.epsilons {
        for &a in &t.algorithms {
            print!("{e:>8}  {:<10}", a.name());
            for d in &t.datasets {
                print!("  {:>width$}", t.graph_count(a, d, e));
            }
            println!();
        }
    }
    if !t.missing.is_empty() {
        println!("{} (algorithm, dataset, epsilon, query) combinations had no value", t.missing.len());
    }
}

pub fn bench(a: BenchArgs, explicit_log: Option<&str>) -> Result<()> {
    let mut cfg = RunConfig::from_file(&a.config)?;
    crate::init_logger(explicit_log.unwrap_or(&cfg.run.log_level));
    if let Some(s) = a.seed {
        cfg.grid.root_seed = s;
    }
    if let Some(w) = a.workers {
        cfg.run.workers = w;
    }
    cfg.validate()?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.run.out_dir.clone())
        .unwrap_or_else(|| std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("results"), PathBuf::from));
    let grid = ExperimentGrid::from_config(&cfg);
    let cells = grid.cell_count();
    if a.dry_run {
        println!(
            "planned: {cells} synthesis runs ({} algorithms x {} datasets x {} epsilons x {} repetitions), {} query evaluations",
            grid.algorithms.len(),
            grid.datasets.len(),
            grid.epsilons.len(),
            grid.repetitions,
            cells * grid.queries.len()
        );
        println!("reports would be written to {}", out.display());
        return Ok(());
    }
    info!("running {cells} cells on {} workers", cfg.run.workers);
    let sweep = harness::run_sweep(&cfg)?;
    let paths = report::write_report(&out, &cfg, &sweep.cells, &sweep.aggregates, &sweep.best)?;
    let failed = sweep.cells.iter().filter(|c| c.outcome.is_err()).count();
    print_best(&sweep.best);
    if failed > 0 {
        println!("{failed} of {cells} cells failed; see raw.csv and manifest.json");
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// raw.csv from an earlier bench run.
    #[arg(long)]
    raw: PathBuf,
    /// Output directory; defaults to the directory holding the raw file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Credit only the first tied algorithm.
    #[arg(long)]
    strict: bool,
}

pub fn report(a: ReportArgs) -> Result<()> {
    let rows = report::read_raw(&a.raw)?;
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for r in &rows {
        if !algorithms.contains(&r.algorithm) {
            algorithms.push(r.algorithm);
        }
    }
    let aggs = harness::aggregate_means(&rows);
    let opts = BestCountOptions {
        strict: a.strict,
        require_complete: false,
    };
    let table = harness::best_counts(&aggs, &algorithms, opts)?;
    let dir = a.out.clone().unwrap_or_else(|| {
        a.raw
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf)
    });
    let paths = report::write_derived(&dir, &aggs, &table)?;
    print_best(&table);
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}
