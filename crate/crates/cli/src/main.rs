mod commands;

use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use dpgraph::graph::BUILTIN_TAGS;
use dpgraph::harness::TrackingAllocator;
use dpgraph::queries::QueryId;
use dpgraph::synth::Algorithm;

#[global_allocator]
static ALLOC: TrackingAllocator = TrackingAllocator;

/// Edge-level differentially private synthetic graphs: generate, query,
/// and benchmark.
#[derive(Debug, Parser)]
#[command(name = "dpgraph", version)]
struct Cli {
    /// Log filter, e.g. `info` or `dpgraph=debug`; RUST_LOG wins if set.
    #[arg(long, global = true)]
    log_level: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize one graph and write it as an edge list.
    Generate(commands::GenerateArgs),
    /// Evaluate one query on a graph.
    Query(commands::QueryArgs),
    /// Run a benchmark sweep from a config file.
    Bench(commands::BenchArgs),
    /// Re-aggregate an existing raw results file.
    Report(commands::ReportArgs),
}

fn reference_text() -> String {
    let algs: Vec<String> = Algorithm::ALL
        .iter()
        .map(|a| format!("  {:<10} {}", a.name(), a.summary()))
        .collect();
    let queries: Vec<String> = QueryId::ALL
        .iter()
        .map(|q| format!("  {:<4} {}", q.code(), q.name()))
        .collect();
    format!(
        "Algorithms:\n{}\n\nQueries:\n{}\n\nBuiltin inputs: {}\n\nDPGRAPH_OUT sets the default output directory.",
        algs.join("\n"),
        queries.join("\n"),
        BUILTIN_TAGS.map(|t| format!("builtin:{t}")).join(", ")
    )
}

/// RUST_LOG takes precedence over `fallback`.
pub(crate) fn init_logger(fallback: &str) {
    let filter = std::env::var("RUST_LOG").unwrap_or_else(|_| fallback.to_string());
    env_logger::Builder::new().parse_filters(&filter).init();
}

fn main() -> ExitCode {
    let matches = Cli::command().after_help(reference_text()).get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    // Bench falls back to the config's log level, so it sets up logging
    // itself once the config is read.
    let result = match cli.command {
        Command::Bench(a) => commands::bench(a, cli.log_level.as_deref()),
        other => {
            init_logger(cli.log_level.as_deref().unwrap_or("warn"));
            match other {
                Command::Generate(a) => commands::generate(a),
                Command::Query(a) => commands::query(a),
                Command::Report(a) => commands::report(a),
                Command::Bench(_) => unreachable!(),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
