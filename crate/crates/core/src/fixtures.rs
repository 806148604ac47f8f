//! Small hand-built models used by tests, examples and the CLI.
//!
//! Vertex ids are 0-based like everywhere in memory; the comments use the
//! 1-based names that show up in files and printouts.

use std::collections::BTreeSet;

use crate::discovery::FirstStageResult;
use crate::graph::{BidirectedGraph, MixedGraph};
use crate::sim::{EffectsMatrix, HiddenSource, LsemSpec, NoiseLaw};

/// Seven-vertex DAG in which 1 and 5 are latent:
/// `1 -> {2, 3, 4}`, `5 -> {6, 7}`, `2 -> 6`, `4 -> 7`.
pub fn latent_dag() -> (MixedGraph, BTreeSet<usize>) {
    let dag = MixedGraph::new(
        7,
        [(0, 1), (0, 2), (0, 3), (4, 5), (4, 6), (1, 5), (3, 6)],
        [],
    )
    .expect("valid DAG");
    (dag, BTreeSet::from([0, 4]))
}

/// Observed labels of [`latent_dag`] after marginalization, in new-index order.
pub const LATENT_DAG_LABELS: [&str; 5] = ["2", "3", "4", "6", "7"];

/// Canonical graph of [`latent_dag`] on its five observed vertices: a
/// 3-directed edge `(1,2,3)`, a 2-directed edge `(4,5)`, `1 -> 4`, `3 -> 5`.
pub fn latent_dag_marginal() -> MixedGraph {
    MixedGraph::new(5, [(0, 3), (2, 4)], [vec![0, 1, 2], vec![3, 4]]).expect("valid graph")
}

/// LSEM on [`latent_dag_marginal`] with uniform(-10,10) noise everywhere.
pub fn triple_and_pair_spec() -> LsemSpec {
    let mut b = EffectsMatrix::zeros(5);
    b.set(0, 3, 0.7);
    b.set(2, 4, -0.8);
    let hidden = vec![
        HiddenSource {
            members: vec![0, 1, 2],
            loadings: vec![0.8, -0.7, 0.9],
            noise: NoiseLaw::UNIFORM_10,
        },
        HiddenSource {
            members: vec![3, 4],
            loadings: vec![0.75, -0.85],
            noise: NoiseLaw::UNIFORM_10,
        },
    ];
    LsemSpec::new(5, [(0, 3), (2, 4)], b, vec![NoiseLaw::UNIFORM_10; 5], hidden).expect("valid spec")
}

fn four_vertex_effects() -> EffectsMatrix {
    let mut b = EffectsMatrix::zeros(4);
    b.set(0, 1, 0.8);
    b.set(0, 3, -0.7);
    b
}

fn four_vertex_spec(hidden: Vec<HiddenSource>) -> LsemSpec {
    LsemSpec::new(
        4,
        [(0, 1), (0, 3)],
        four_vertex_effects(),
        vec![NoiseLaw::GAMMA_2_4; 4],
        hidden,
    )
    .expect("valid spec")
}

/// `1 -> 2`, `1 -> 4` with two latent pairs `(2,3)` and `(3,4)`.
/// No 3-trek joins 2, 3 and 4, so their third cumulant vanishes.
pub fn two_pairs_spec() -> LsemSpec {
    four_vertex_spec(vec![
        HiddenSource {
            members: vec![1, 2],
            loadings: vec![1.0, 1.0],
            noise: NoiseLaw::CHI_SQUARED_2,
        },
        HiddenSource {
            members: vec![2, 3],
            loadings: vec![1.0, 1.0],
            noise: NoiseLaw::CHI_SQUARED_2,
        },
    ])
}

/// Same directed part as [`two_pairs_spec`] but one skewed latent source
/// `(2,3,4)` with unit loadings.
pub fn shared_triple_spec() -> LsemSpec {
    shared_triple_with(NoiseLaw::CHI_SQUARED_2)
}

/// [`shared_triple_spec`] with a symmetric latent source: its third
/// cumulant is zero, its fourth is not.
pub fn symmetric_triple_spec() -> LsemSpec {
    shared_triple_with(NoiseLaw::UNIFORM_10)
}

fn shared_triple_with(noise: NoiseLaw) -> LsemSpec {
    four_vertex_spec(vec![HiddenSource {
        members: vec![1, 2, 3],
        loadings: vec![1.0, 1.0, 1.0],
        noise,
    }])
}

pub const ECOLOGY_LABELS: [&str; 8] = [
    "PlotProd", "PlotBiomass", "PlotShade", "PlotRich", "SiteProd", "SiteBiomass", "SiteRich",
    "PlotSoilSuit",
];

/// First-stage output for the grassland productivity and richness model:
/// eleven directed edges and seven bidirected pairs among
/// {PlotSoilSuit, PlotProd, SiteBiomass, SiteProd, SiteRich}. The effect
/// sizes are placeholders (the structure is what matters downstream).
pub fn ecology_first_stage() -> FirstStageResult {
    let idx = |name: &str| ECOLOGY_LABELS.iter().position(|l| *l == name).expect("known label");
    let directed = [
        ("PlotSoilSuit", "SiteRich"),
        ("PlotProd", "SiteRich"),
        ("PlotBiomass", "PlotShade"),
        ("SiteBiomass", "PlotBiomass"),
        ("SiteBiomass", "PlotRich"),
        ("SiteRich", "PlotRich"),
        ("SiteProd", "PlotProd"),
        ("SiteProd", "PlotRich"),
        ("SiteProd", "PlotShade"),
        ("PlotShade", "PlotRich"),
        ("PlotBiomass", "PlotProd"),
    ];
    let bidirected = [
        ("PlotSoilSuit", "PlotProd"),
        ("PlotSoilSuit", "SiteBiomass"),
        ("PlotSoilSuit", "SiteProd"),
        ("SiteRich", "SiteProd"),
        ("SiteRich", "SiteBiomass"),
        ("SiteBiomass", "PlotProd"),
        ("SiteProd", "SiteBiomass"),
    ];
    let p = ECOLOGY_LABELS.len();
    let mut b = EffectsMatrix::zeros(p);
    let directed: Vec<(usize, usize)> = directed.iter().map(|&(a, c)| (idx(a), idx(c))).collect();
    for (k, &(i, j)) in directed.iter().enumerate() {
        b.set(i, j, if k % 2 == 0 { 0.5 } else { -0.4 });
    }
    let bg = BidirectedGraph::new(p, bidirected.iter().map(|&(a, c)| (idx(a), idx(c))))
        .expect("valid pairs");
    FirstStageResult::new(b, directed.into_iter().collect(), bg)
        .expect("bow-free first stage")
        .with_labels(ECOLOGY_LABELS.iter().map(|s| s.to_string()).collect())
        .expect("one label per vertex")
}
