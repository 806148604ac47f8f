use std::path::PathBuf;

use mbang_core::io::{read_dataset, read_json};
use mbang_core::sim::standardize_rows;
use mbang_core::{CumulantSource, CumulantTensor, PopulationCumulants, Rational, SampleCumulants, MAX_ORDER};

use crate::error::{CliError, CliResult};
use crate::input::{emit, load_spec, parse_one_based, to_json_text};

#[derive(clap::Args)]
pub struct Args {
    /// Dataset to estimate from.
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    data: Option<PathBuf>,
    /// Model file; entries are its exact population cumulants.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Cumulant order.
    #[arg(short, long, value_parser = clap::value_parser!(u8).range(2..=MAX_ORDER as i64))]
    k: u8,
    /// `all`, or a JSON file holding a list of index lists such as `[[2,3,4]]`.
    #[arg(long, default_value = "all", conflicts_with = "index")]
    indices: String,
    /// A single index, e.g. `--index 2,3,4`. Repeatable.
    #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
    index: Vec<usize>,
    /// Scale each data row to unit variance first.
    #[arg(long, requires = "data")]
    standardize: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> CliResult {
    let k = usize::from(args.k);
    let wanted = requested_indices(&args, k)?;
    let json = if let Some(path) = &args.spec {
        let loaded = load_spec(path)?;
        eprintln!("spec sha256: {}", loaded.sha256);
        let pop = PopulationCumulants::<Rational>::new(&loaded.spec)?;
        tensor(&pop, k, wanted)?.to_json()
    } else {
        let path = args.data.as_ref().expect("clap requires --data without --spec");
        let mut data = read_dataset(path)?;
        if args.standardize {
            data = standardize_rows(&data)?;
        }
        tensor(&SampleCumulants::new(&data), k, wanted)?.to_json()
    };
    emit(&to_json_text(&json)?, args.out.as_deref())
}

fn tensor<C: CumulantSource<T>, T: mbang_core::Scalar>(
    source: &C,
    k: usize,
    wanted: Option<Vec<Vec<usize>>>,
) -> CliResult<CumulantTensor<T>> {
    Ok(match wanted {
        Some(indices) => CumulantTensor::from_indices(source, k, indices)?,
        None => CumulantTensor::from_source(source, k)?,
    })
}

/// 0-based indices, or `None` for the whole tensor.
fn requested_indices(args: &Args, k: usize) -> CliResult<Option<Vec<Vec<usize>>>> {
    let lists: Vec<Vec<usize>> = if !args.index.is_empty() {
        if !args.index.len().is_multiple_of(k) {
            return Err(CliError::Usage(format!(
                "--index values must come in groups of k = {k}, got {}",
                args.index.len()
            )));
        }
        args.index.chunks(k).map(<[usize]>::to_vec).collect()
    } else if args.indices == "all" {
        return Ok(None);
    } else {
        read_json(args.indices.as_ref())?
    };
    let mut out = Vec::with_capacity(lists.len());
    for idx in lists {
        if idx.len() != k {
            return Err(CliError::Usage(format!("index {idx:?} has length {}, expected {k}", idx.len())));
        }
        out.push(parse_one_based(&idx, "index")?);
    }
    Ok(Some(out))
}
