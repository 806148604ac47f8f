//! Loading inputs and writing outputs shared by the subcommands.

use std::path::Path;

use mbang_core::discovery::{FirstStageJson, FirstStageResult};
use mbang_core::{Error, LsemSpec, MixedGraph};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::from(e).context(format!("reading {}", path.display())).into())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A model file together with the hash of its exact bytes.
pub struct LoadedSpec {
    pub spec: LsemSpec,
    pub sha256: String,
}

pub fn load_spec(path: &Path) -> CliResult<LoadedSpec> {
    let bytes = read_bytes(path)?;
    let spec = serde_json::from_slice(&bytes)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    Ok(LoadedSpec {
        spec,
        sha256: sha256_hex(&bytes),
    })
}

/// Accepts a graph file (`p`, `directed`, `multi`), a model file (which
/// also carries `noise`) or a first-stage file (which carries
/// `bidirected`; its pairs become 2-directed edges).
pub fn load_graph(path: &Path) -> CliResult<MixedGraph> {
    let ctx = || format!("reading {}", path.display());
    let bytes = read_bytes(path)?;
    let value: Value = serde_json::from_slice(&bytes).map_err(|e| Error::from(e).context(ctx()))?;
    let has = |key: &str| value.get(key).is_some();
    let graph = if has("noise") {
        serde_json::from_value::<LsemSpec>(value)
            .map(|s| s.graph().clone())
            .map_err(Error::from)
    } else if has("bidirected") {
        serde_json::from_value::<FirstStageJson>(value)
            .map_err(Error::from)
            .and_then(|raw| FirstStageResult::from_json(raw, false))
            .map(|(stage, warnings)| {
                warn_all(&warnings);
                stage.graph()
            })
    } else {
        serde_json::from_value::<MixedGraph>(value).map_err(Error::from)
    };
    graph.map_err(|e| e.context(ctx()).into())
}

/// Seed for a randomized command: the flag, else a fallback (e.g. the seed
/// stored in a model file), else fresh entropy. A seed the user did not type
/// is reported on stderr so the run can be repeated.
pub fn resolve_seed(flag: Option<u64>, fallback: Option<u64>, what: &str) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    if let Some(s) = fallback {
        eprintln!("{what} seed: {s} (from input file)");
        return s;
    }
    let s = rand::random::<u64>();
    eprintln!("{what} seed: {s} (pass --seed {s} to reproduce)");
    s
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::from(e).context(format!("writing {}", path.display())).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn to_json_text<T: serde::Serialize>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    Ok(text)
}

pub fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Parses `2,3,4` into 0-based vertices.
pub fn parse_one_based(list: &[usize], what: &str) -> CliResult<Vec<usize>> {
    list.iter()
        .map(|&v| {
            v.checked_sub(1)
                .ok_or_else(|| CliError::Usage(format!("{what}: vertices are numbered from 1")))
        })
        .collect()
}
