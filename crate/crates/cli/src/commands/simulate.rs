use std::path::PathBuf;

use mbang_core::io::write_dataset;
use mbang_core::sim::simulate;

use crate::error::CliResult;
use crate::input::{load_spec, resolve_seed};

#[derive(clap::Args)]
pub struct Args {
    /// Model file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Number of samples.
    #[arg(short, long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    /// Defaults to the seed stored in the model file, then to a fresh one.
    #[arg(long)]
    seed: Option<u64>,
    /// Output dataset; `.bin` selects the binary format, anything else CSV.
    #[arg(short, long)]
    out: PathBuf,
}

pub fn run(args: Args) -> CliResult {
    let loaded = load_spec(&args.spec)?;
    eprintln!("spec sha256: {}", loaded.sha256);
    let seed = resolve_seed(args.seed, loaded.spec.seed(), "simulation");
    let data = simulate::<f64>(&loaded.spec, args.n as usize, seed)?;
    write_dataset(&data, &args.out)?;
    eprintln!(
        "wrote {} variables x {} samples to {}",
        data.p(),
        data.n(),
        args.out.display()
    );
    Ok(())
}
