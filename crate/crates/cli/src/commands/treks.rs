use std::path::PathBuf;

use mbang_core::graph::TrekTop;
use mbang_core::{Error, TrekWitness, VertexTuple};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::input::{load_graph, to_json_text};

#[derive(clap::Args)]
pub struct Args {
    /// Graph, model or first-stage file.
    #[arg(long)]
    graph: PathBuf,
    /// Distinct vertices, e.g. `2 3 4` or `2,3,4`.
    #[arg(required = true, num_args = 1.., value_delimiter = ',')]
    tuple: Vec<usize>,
    #[arg(long)]
    json: bool,
}

pub fn run(args: Args) -> CliResult {
    let g = load_graph(&args.graph)?;
    let tuple = VertexTuple::from_one_based(&args.tuple, g.p()).map_err(|e| match e {
        Error::TupleTooShort(_) | Error::RepeatedVertex(_) | Error::VertexOutOfRange { .. } => {
            CliError::Usage(format!("bad tuple: {e}"))
        }
        other => other.into(),
    })?;
    let witness = g.find_k_trek(&tuple)?;
    if args.json {
        print!("{}", to_json_text(&witness_json(&args.tuple, witness.as_ref()))?);
    } else {
        print!("{}", witness_text(&args.tuple, witness.as_ref()));
    }
    Ok(())
}

fn one_based(vs: &[usize]) -> Vec<usize> {
    vs.iter().map(|v| v + 1).collect()
}

fn witness_json(tuple: &[usize], witness: Option<&TrekWitness>) -> serde_json::Value {
    let witness = witness.map(|w| {
        let top = match &w.top {
            TrekTop::Vertex(v) => json!({ "vertex": v + 1 }),
            TrekTop::Hidden(h) => json!({ "multi": one_based(h) }),
        };
        json!({ "top": top, "paths": w.paths.iter().map(|p| one_based(p)).collect::<Vec<_>>() })
    });
    json!({ "tuple": tuple, "trek": witness.is_some(), "witness": witness })
}

fn witness_text(tuple: &[usize], witness: Option<&TrekWitness>) -> String {
    let names: Vec<String> = tuple.iter().map(usize::to_string).collect();
    let k = tuple.len();
    let Some(w) = witness else {
        return format!("({}): no {k}-trek\n", names.join(","));
    };
    let mut out = format!("({}): {k}-trek\n", names.join(","));
    match &w.top {
        TrekTop::Vertex(v) => out.push_str(&format!("  top: {}\n", v + 1)),
        TrekTop::Hidden(h) => {
            let members: Vec<String> = h.iter().map(|v| (v + 1).to_string()).collect();
            out.push_str(&format!("  top: ({}) <-*->\n", members.join(",")));
        }
    }
    for path in &w.paths {
        let steps: Vec<String> = path.iter().map(|v| (v + 1).to_string()).collect();
        out.push_str(&format!("  {}\n", steps.join(" -> ")));
    }
    out
}
