use std::path::PathBuf;

use clap::ValueEnum;
use mbang_core::discovery::{
    load_external_first_stage, oracle_first_stage, run_mbang, run_mbang_population, DiscoveryConfig,
    FirstStageResult, RelaxedTest, Reporting, ZeroTest,
};
use mbang_core::io::read_dataset;

use super::non_negative;
use crate::error::CliResult;
use crate::input::{emit, load_spec, resolve_seed, to_json_text, warn_all, LoadedSpec};

#[derive(Clone, Copy, ValueEnum)]
enum RelaxedArg {
    /// Repeat one clique vertex next to the candidate.
    Listing,
    /// Also allow repeating the candidate itself.
    Prose,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportingArg {
    Hereditary,
    Listing,
}

#[derive(clap::Args)]
pub struct Args {
    /// Observed data, one variable per CSV line (or `.bin`).
    #[arg(long, required_unless_present = "population")]
    data: Option<PathBuf>,
    /// First-stage result (JSON with `directed`, `bidirected`, `B`).
    #[arg(long, required_unless_present = "oracle", conflicts_with = "oracle")]
    stage: Option<PathBuf>,
    /// Use the true structure of this model file as the first stage.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Uniform noise of this half-width added to every oracle effect.
    #[arg(long, default_value_t = 0.0, value_parser = non_negative, requires = "oracle")]
    perturbation: f64,
    /// Seed for the oracle perturbation.
    #[arg(long)]
    seed: Option<u64>,
    /// Reject a first-stage file containing a bow instead of warning.
    #[arg(long, requires = "stage")]
    strict_stage: bool,
    /// Population cumulants of the oracle model instead of data.
    #[arg(long, requires = "oracle", conflicts_with = "data")]
    population: bool,
    /// Entries with |C| above this count as nonzero.
    #[arg(long, default_value_t = 0.05, value_parser = non_negative)]
    tolerance: f64,
    /// Test for exact zeros (|C| > 1e-9) instead of using the tolerance.
    #[arg(long)]
    exact_zero: bool,
    #[arg(long)]
    no_standardize: bool,
    /// Fallback entries consulted when the direct entry looks like zero.
    #[arg(long, value_enum, default_value = "listing")]
    relaxed: RelaxedArg,
    /// Disable the fallback entries.
    #[arg(long, conflicts_with = "relaxed")]
    strict: bool,
    #[arg(long, value_enum, default_value = "hereditary")]
    reporting: ReportingArg,
    /// Report JSON; printed to stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl Args {
    fn config(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            tolerance: self.tolerance,
            standardize: !self.no_standardize,
            relaxed: match (self.strict, self.relaxed) {
                (true, _) => RelaxedTest::Off,
                (false, RelaxedArg::Listing) => RelaxedTest::Listing,
                (false, RelaxedArg::Prose) => RelaxedTest::Prose,
            },
            zero_test: if self.exact_zero { ZeroTest::Exact } else { ZeroTest::Threshold },
            reporting: match self.reporting {
                ReportingArg::Hereditary => Reporting::Hereditary,
                ReportingArg::Listing => Reporting::Listing,
            },
        }
    }
}

pub fn run(args: Args) -> CliResult {
    let cfg = args.config();
    let oracle = match &args.oracle {
        Some(path) => {
            let loaded = load_spec(path)?;
            eprintln!("spec sha256: {}", loaded.sha256);
            Some(loaded)
        }
        None => None,
    };
    let stage = first_stage(&args, oracle.as_ref())?;

    let result = match (&oracle, args.population) {
        (Some(loaded), true) => run_mbang_population(&loaded.spec, &stage, &cfg)?,
        _ => {
            let path = args.data.as_ref().expect("clap requires --data without --population");
            let y = read_dataset(path)?;
            run_mbang(&y, &stage, &cfg)?
        }
    };
    warn_all(&result.warnings);

    let report = to_json_text(&result.to_json())?;
    match &args.out {
        Some(path) => {
            emit(&report, Some(path))?;
            print!("{}", result.graph);
        }
        None => emit(&report, None)?,
    }
    Ok(())
}

fn first_stage(args: &Args, oracle: Option<&LoadedSpec>) -> CliResult<FirstStageResult> {
    if let Some(loaded) = oracle {
        let seed = if args.perturbation > 0.0 {
            resolve_seed(args.seed, None, "perturbation")
        } else {
            0
        };
        return Ok(oracle_first_stage(&loaded.spec, args.perturbation, seed)?);
    }
    let path = args.stage.as_ref().expect("clap requires --stage without --oracle");
    let (stage, warnings) = load_external_first_stage(path, args.strict_stage)?;
    warn_all(&warnings);
    Ok(stage)
}
