use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mbang_core::bench::{
    run_benchmark, run_benchmark_with_threads, write_trials_csv_many, AggregateEntry, BenchReport,
    CumulantMode, Grid, TrialConfig,
};
use mbang_core::discovery::ZeroTest;
use mbang_core::{Error, NoiseLaw};

use crate::error::{CliError, CliResult};
use crate::input::{emit, read_bytes, resolve_seed, to_json_text};

pub const THREADS_ENV: &str = "MBANG_THREADS";

#[derive(clap::Args)]
pub struct Args {
    /// TOML file with trial settings and an optional `[grid]` table.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    n: Option<usize>,
    #[arg(long)]
    edges: Option<usize>,
    /// Noise law, e.g. `unif10`, `t10`, `gamma(2,4)`, `chisq(2)`.
    #[arg(long)]
    noise: Option<String>,
    /// Exact population cumulants instead of samples.
    #[arg(long)]
    population: bool,
    /// Worker threads; overrides MBANG_THREADS.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Per-trial CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Per-configuration summary JSON.
    #[arg(long)]
    aggregate: Option<PathBuf>,
}

/// Base settings and the grid over them, as read from a config file.
fn load_config(path: &Path) -> CliResult<(TrialConfig, Grid, bool)> {
    let schema = |e: &dyn std::fmt::Display| {
        CliError::from(Error::Schema(e.to_string()).context(format!("reading {}", path.display())))
    };
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes).map_err(|e| schema(&e))?;
    let mut table: toml::Table = text.parse().map_err(|e| schema(&e))?;
    let grid = match table.remove("grid") {
        Some(g) => g.try_into::<Grid>().map_err(|e| schema(&e))?,
        None => Grid::default(),
    };
    let seeded = table.contains_key("seed");
    let cfg = table.try_into::<TrialConfig>().map_err(|e| schema(&e))?;
    Ok((cfg, grid, seeded))
}

fn threads(flag: Option<u64>) -> CliResult<Option<usize>> {
    if let Some(t) = flag {
        return Ok(Some(t as usize));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run(args: Args) -> CliResult {
    let (mut base, grid, seeded) = match &args.config {
        Some(path) => load_config(path)?,
        None => (TrialConfig::default(), Grid::default(), false),
    };
    let threads = threads(args.threads)?;
    if let Some(t) = args.trials {
        base.trials = t;
    }
    if let Some(n) = args.n {
        base.n = n;
    }
    if let Some(e) = args.edges {
        base.edges = e;
    }
    if let Some(noise) = &args.noise {
        base.noise = noise.parse::<NoiseLaw>()?;
    }
    if args.population {
        base.cumulants = CumulantMode::Population;
    }
    base.seed = resolve_seed(args.seed, seeded.then_some(base.seed), "benchmark");

    let configs = grid.expand(&base)?;
    for cfg in &configs {
        cfg.validate()?;
    }
    if base.cumulants == CumulantMode::Sample
        && base.discovery.zero_test == ZeroTest::Threshold
        && base.discovery.tolerance == 0.0
    {
        eprintln!("warning: tolerance 0 on sample data: sample cumulants are almost surely nonzero, so every clique merges");
    }

    let mut reports = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let report = match threads {
            Some(t) => run_benchmark_with_threads(cfg, t)?,
            None => run_benchmark(cfg)?,
        };
        print_summary(&report);
        reports.push(report);
    }

    if let Some(path) = &args.out {
        let file = File::create(path).map_err(|e| Error::from(e).context(format!("writing {}", path.display())))?;
        write_trials_csv_many(&reports, BufWriter::new(file))?;
    }
    if let Some(path) = &args.aggregate {
        let entries: Vec<AggregateEntry> = reports.iter().map(AggregateEntry::from).collect();
        emit(&to_json_text(&entries)?, Some(path))?;
    }
    Ok(())
}

fn print_summary(r: &BenchReport) {
    let s = &r.summary;
    let n = match r.config.cumulants {
        CumulantMode::Sample => r.config.n.to_string(),
        CumulantMode::Population => "pop".to_string(),
    };
    let rate = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
    println!(
        "noise={} edges={} n={} trials={} exact={:.3} edges_recovered={} ({}/{}) failures={}",
        r.config.noise,
        r.config.edges,
        n,
        s.trials,
        s.graph_exact_rate,
        rate(s.edge_rate),
        s.edge_correct,
        s.edge_total,
        s.failures
    );
}
