use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};
use mbang_core::fixtures;
use mbang_core::sim::{marginalize, random_bowfree, BowRemoval, GeneratorOptions};
use mbang_core::NoiseLaw;
use serde_json::json;

use super::non_negative;
use crate::error::{CliError, CliResult};
use crate::input::{emit, load_graph, parse_one_based, resolve_seed, to_json_text};

#[derive(Subcommand)]
pub enum Command {
    /// Report size, acyclicity and bow-freeness; exit 3 if either fails.
    Check { graph: PathBuf },
    /// Bidirected pairs implied by the multidirected edges.
    Subdivide {
        graph: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Maximal cliques of the bidirected subdivision.
    Cliques {
        graph: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Graphviz rendering.
    Dot {
        graph: PathBuf,
        /// Comma-separated vertex names.
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<String>>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Hide vertices of a DAG and print the induced mixed graph.
    Marginalize {
        graph: PathBuf,
        /// Vertices to hide, e.g. `1,5`.
        #[arg(long, value_delimiter = ',', required = true)]
        hidden: Vec<usize>,
        #[arg(long, value_enum, default_value = "drop-parent")]
        bows: BowArg,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Random bow-free model, written as a model file.
    Random {
        /// Vertices before marginalization.
        #[arg(long, default_value_t = 7)]
        p: usize,
        #[arg(long, default_value_t = 5)]
        edges: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "unif10")]
        noise: String,
        #[arg(long, default_value_t = 0.5, value_parser = non_negative)]
        hide_probability: f64,
        #[arg(long, default_value_t = 3)]
        max_hidden: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Built-in example models.
    Fixture {
        #[arg(value_enum)]
        name: Fixture,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BowArg {
    DropParent,
    DropDirected,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Fixture {
    /// 1 -> 4, 3 -> 5 with multidirected edges (1,2,3) and (4,5).
    TripleAndPair,
    /// Four vertices, two overlapping hidden pairs (2,3) and (3,4).
    TwoPairs,
    /// Four vertices, one hidden source shared by (2,3,4).
    SharedTriple,
    /// Like `shared-triple` with symmetric noise everywhere.
    SymmetricTriple,
    /// First-stage result for the plot and site ecology variables.
    Ecology,
}

pub fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Check { graph } => {
            let g = load_graph(&graph)?;
            println!("p = {}", g.p());
            println!("directed edges: {}", g.directed().len());
            println!("multidirected edges: {}", g.multi().len());
            let acyclic = g.is_acyclic();
            println!("acyclic: {acyclic}");
            let bow = g.find_bow();
            match bow {
                Some((i, j)) => println!("bow-free: false ({} -> {} shares a multidirected edge)", i + 1, j + 1),
                None => println!("bow-free: true"),
            }
            if !acyclic || bow.is_some() {
                return Err(CliError::Invalid(format!("{} is not a bow-free acyclic mixed graph", graph.display())));
            }
            Ok(())
        }
        Command::Subdivide { graph, out } => {
            let bg = load_graph(&graph)?.bidirected_subdivision();
            let pairs: Vec<[usize; 2]> = bg.pairs().into_iter().map(|(i, j)| [i + 1, j + 1]).collect();
            emit(&to_json_text(&json!({ "p": bg.p(), "bidirected": pairs }))?, out.as_deref())
        }
        Command::Cliques { graph, out } => {
            let cliques: Vec<Vec<usize>> = load_graph(&graph)?
                .bidirected_subdivision()
                .maximal_cliques()
                .into_iter()
                .map(|c| c.into_iter().map(|v| v + 1).collect())
                .collect();
            emit(&to_json_text(&cliques)?, out.as_deref())
        }
        Command::Dot { graph, labels, out } => {
            let g = load_graph(&graph)?;
            if let Some(l) = &labels {
                if l.len() != g.p() {
                    return Err(CliError::Usage(format!("{} labels given for {} vertices", l.len(), g.p())));
                }
            }
            emit(&g.to_dot(labels.as_deref()), out.as_deref())
        }
        Command::Marginalize { graph, hidden, bows, out } => {
            let dag = load_graph(&graph)?;
            let hidden: BTreeSet<usize> = parse_one_based(&hidden, "--hidden")?.into_iter().collect();
            let bows = match bows {
                BowArg::DropParent => BowRemoval::DropParent,
                BowArg::DropDirected => BowRemoval::DropDirected,
            };
            let m = marginalize(&dag, &hidden, bows)?;
            let sources: Vec<_> = m
                .sources
                .iter()
                .map(|s| {
                    json!({
                        "vertex": s.vertex + 1,
                        "members": s.members.iter().map(|v| v + 1).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let observed: Vec<usize> = m.observed.iter().map(|v| v + 1).collect();
            let doc = json!({ "graph": m.graph, "observed": observed, "sources": sources });
            emit(&to_json_text(&doc)?, out.as_deref())
        }
        Command::Random {
            p,
            edges,
            seed,
            noise,
            hide_probability,
            max_hidden,
            out,
        } => {
            let opts = GeneratorOptions {
                noise: noise.parse::<NoiseLaw>()?,
                hide_probability,
                max_hidden: Some(max_hidden),
                ..GeneratorOptions::default()
            };
            let seed = resolve_seed(seed, None, "generator");
            let model = random_bowfree(p, edges, seed, &opts)?;
            emit(&to_json_text(&model.spec)?, out.as_deref())
        }
        Command::Fixture { name, out } => {
            let text = match name {
                Fixture::TripleAndPair => to_json_text(&fixtures::triple_and_pair_spec())?,
                Fixture::TwoPairs => to_json_text(&fixtures::two_pairs_spec())?,
                Fixture::SharedTriple => to_json_text(&fixtures::shared_triple_spec())?,
                Fixture::SymmetricTriple => to_json_text(&fixtures::symmetric_triple_spec())?,
                Fixture::Ecology => to_json_text(&fixtures::ecology_first_stage().to_json())?,
            };
            emit(&text, out.as_deref())
        }
    }
}
