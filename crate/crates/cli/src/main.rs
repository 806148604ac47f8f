mod commands;
mod error;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{benchmark, cumulants, discover, graph_tools, simulate, treks};

/// Multidirected edge recovery for linear non-Gaussian SEMs.
///
/// Vertices are numbered from 1 in every file and argument.
#[derive(Parser)]
#[command(name = "mbang", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a model file.
    Simulate(simulate::Args),
    /// Recover a mixed graph with multidirected edges from data.
    Discover(discover::Args),
    /// Check whether a vertex tuple is joined by a k-trek.
    Treks(treks::Args),
    /// Sample or population cumulant entries.
    Cumulants(cumulants::Args),
    /// Repeated recovery on random models, scored against the truth.
    Benchmark(benchmark::Args),
    /// Inspect, convert and generate graphs.
    #[command(subcommand)]
    GraphTools(graph_tools::Command),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate::run(a),
        Command::Discover(a) => discover::run(a),
        Command::Treks(a) => treks::run(a),
        Command::Cumulants(a) => cumulants::run(a),
        Command::Benchmark(a) => benchmark::run(a),
        Command::GraphTools(c) => graph_tools::run(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
