use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::sim::noise::NoiseLaw;
use crate::sim::spec::{EffectsMatrix, HiddenSource, LsemSpec};

/// How a bow created by marginalization is broken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BowRemoval {
    /// Drop the parent of the directed edge from the multidirected edge.
    #[default]
    DropParent,
    /// Drop the directed edge and keep the multidirected edge intact.
    DropDirected,
}

/// A latent vertex of the original DAG that survives as a multidirected edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatentSource {
    /// Vertex id in the original DAG.
    pub vertex: usize,
    /// Observed members, in the relabeled (marginal) indexing.
    pub members: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Marginalized {
    pub graph: MixedGraph,
    /// `observed[new] = old` vertex id.
    pub observed: Vec<usize>,
    pub sources: Vec<LatentSource>,
}

/// Canonical mixed graph over the observed vertices of a DAG.
///
/// Every hidden vertex becomes a source whose members are the observed
/// vertices it reaches through hidden-only paths; sources with fewer than two
/// members disappear. Directed edges between observed vertices are kept, bows
/// are broken according to `bows`, and observed vertices are relabeled
/// `0..p_obs` in ascending original order.
pub fn marginalize(dag: &MixedGraph, hidden: &BTreeSet<usize>, bows: BowRemoval) -> Result<Marginalized> {
    if !dag.multi().is_empty() {
        return Err(Error::InvalidParameter(
            "marginalize expects a DAG without multidirected edges".into(),
        ));
    }
    if !dag.is_acyclic() {
        return Err(Error::Cyclic);
    }
    for &h in hidden {
        if h >= dag.p() {
            return Err(Error::VertexOutOfRange { vertex: h + 1, p: dag.p() });
        }
        if dag.parents(h).any(|u| !hidden.contains(&u)) {
            return Err(Error::HiddenWithObservedParent(h + 1));
        }
    }

    let observed: Vec<usize> = (0..dag.p()).filter(|v| !hidden.contains(v)).collect();
    let relabel: BTreeMap<usize, usize> = observed.iter().enumerate().map(|(n, &o)| (o, n)).collect();

    let mut directed: BTreeSet<(usize, usize)> = dag
        .directed()
        .iter()
        .filter_map(|(i, j)| Some((*relabel.get(i)?, *relabel.get(j)?)))
        .collect();

    let mut sources: Vec<LatentSource> = hidden
        .iter()
        .map(|&h| LatentSource {
            vertex: h,
            members: observed_reach(dag, hidden, h)
                .into_iter()
                .map(|v| relabel[&v])
                .collect(),
        })
        .collect();

    match bows {
        BowRemoval::DropParent => {
            for src in &mut sources {
                loop {
                    let bow = directed
                        .iter()
                        .find(|(i, j)| src.members.contains(i) && src.members.contains(j))
                        .map(|&(i, _)| i);
                    match bow {
                        Some(parent) => src.members.retain(|&v| v != parent),
                        None => break,
                    }
                }
            }
        }
        BowRemoval::DropDirected => {
            directed.retain(|(i, j)| {
                !sources
                    .iter()
                    .any(|s| s.members.len() >= 2 && s.members.contains(i) && s.members.contains(j))
            });
        }
    }
    sources.retain(|s| s.members.len() >= 2);

    let graph = MixedGraph::new(
        observed.len(),
        directed,
        sources.iter().map(|s| s.members.clone()),
    )?;
    Ok(Marginalized {
        graph,
        observed,
        sources,
    })
}

/// Observed vertices reachable from `h` through hidden intermediates only.
fn observed_reach(dag: &MixedGraph, hidden: &BTreeSet<usize>, h: usize) -> Vec<usize> {
    let mut seen = BTreeSet::new();
    let mut out = BTreeSet::new();
    let mut stack = vec![h];
    while let Some(u) = stack.pop() {
        for c in dag.children(u) {
            if hidden.contains(&c) {
                if seen.insert(c) {
                    stack.push(c);
                }
            } else {
                out.insert(c);
            }
        }
    }
    out.into_iter().collect()
}

/// Total effect of `from` on `to` along paths whose intermediate vertices are hidden.
fn hidden_path_effect(
    dag: &MixedGraph,
    coef: &EffectsMatrix,
    hidden: &BTreeSet<usize>,
    from: usize,
    to: usize,
) -> f64 {
    dag.children(from)
        .map(|c| {
            let b = coef.get(from, c);
            if c == to {
                b
            } else if hidden.contains(&c) {
                b * hidden_path_effect(dag, coef, hidden, c, to)
            } else {
                0.0
            }
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorOptions {
    /// Chance that an eligible parentless vertex (two or more children) is hidden.
    pub hide_probability: f64,
    /// Upper bound on hidden vertices per graph.
    pub max_hidden: Option<usize>,
    pub bow_removal: BowRemoval,
    /// Drop multidirected edges strictly contained in another one. Such
    /// nested edges produce the same cumulant zero pattern as the outer edge
    /// alone and cannot be told apart from it.
    pub absorb_nested: bool,
    /// Law shared by every observed and hidden source.
    pub noise: NoiseLaw,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            hide_probability: 0.5,
            max_hidden: Some(3),
            bow_removal: BowRemoval::DropParent,
            absorb_nested: true,
            noise: NoiseLaw::UNIFORM_10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RandomModel {
    /// Ground-truth model on the observed vertices.
    pub spec: LsemSpec,
    /// DAG before marginalization, with its coefficients.
    pub dag: MixedGraph,
    pub dag_effects: EffectsMatrix,
    pub hidden: BTreeSet<usize>,
    pub observed: Vec<usize>,
}

impl RandomModel {
    pub fn truth(&self) -> &MixedGraph {
        self.spec.graph()
    }
}

/// Uniform draw from `(-1, -0.6) ∪ (0.6, 1)`.
pub(crate) fn draw_coefficient<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let magnitude = rng.random_range(0.6..1.0);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Random DAG with `edges` edges drawn uniformly from `{(i, j) : i < j}`,
/// some parentless vertices hidden, then marginalized into a bow-free
/// acyclic mixed graph with its LSEM.
pub fn random_bowfree(p: usize, edges: usize, seed: u64, opts: &GeneratorOptions) -> Result<RandomModel> {
    let max = p * p.saturating_sub(1) / 2;
    if edges > max {
        return Err(Error::EdgeCountOutOfRange { edges, max });
    }
    if !(0.0..=1.0).contains(&opts.hide_probability) {
        return Err(Error::InvalidParameter("hide_probability must lie in [0, 1]".into()));
    }
    opts.noise.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let all_pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
        .collect();
    let mut chosen: Vec<(usize, usize)> = index::sample(&mut rng, all_pairs.len(), edges)
        .into_iter()
        .map(|k| all_pairs[k])
        .collect();
    chosen.sort_unstable();

    let mut dag_effects = EffectsMatrix::zeros(p);
    for &(i, j) in &chosen {
        dag_effects.set(i, j, draw_coefficient(&mut rng));
    }
    let dag = MixedGraph::new(p, chosen.iter().copied(), [])?;

    let mut hidden = BTreeSet::new();
    for v in 0..p {
        if opts.max_hidden.is_some_and(|m| hidden.len() >= m) {
            break;
        }
        let eligible = dag.parents(v).next().is_none() && dag.children(v).count() >= 2;
        if eligible && rng.random_bool(opts.hide_probability) {
            hidden.insert(v);
        }
    }

    let marg = marginalize(&dag, &hidden, opts.bow_removal)?;
    let p_obs = marg.observed.len();

    let mut effects = EffectsMatrix::zeros(p_obs);
    for &(i, j) in marg.graph.directed() {
        effects.set(i, j, dag_effects.get(marg.observed[i], marg.observed[j]));
    }

    let mut sources: Vec<&LatentSource> = Vec::new();
    for s in &marg.sources {
        if !sources.iter().any(|t| t.members == s.members) {
            sources.push(s);
        }
    }
    if opts.absorb_nested {
        let all = sources.clone();
        sources.retain(|s| {
            !all.iter().any(|t| {
                t.members.len() > s.members.len() && s.members.iter().all(|v| t.members.contains(v))
            })
        });
    }
    let hidden_sources = sources
        .iter()
        .map(|s| HiddenSource {
            members: s.members.clone(),
            loadings: s
                .members
                .iter()
                .map(|&m| hidden_path_effect(&dag, &dag_effects, &hidden, s.vertex, marg.observed[m]))
                .collect(),
            noise: opts.noise,
        })
        .collect();

    let spec = LsemSpec::new(
        p_obs,
        marg.graph.directed().iter().copied(),
        effects,
        vec![opts.noise; p_obs],
        hidden_sources,
    )?
    .with_seed(Some(seed));

    Ok(RandomModel {
        spec,
        dag,
        dag_effects,
        hidden,
        observed: marg.observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn latent_dag_marginalizes_to_triple_and_pair() {
        let (dag, hidden) = crate::fixtures::latent_dag();
        let m = marginalize(&dag, &hidden, BowRemoval::DropParent).unwrap();
        assert_eq!(m.observed, vec![1, 2, 3, 5, 6]);
        let sizes: Vec<usize> = m.graph.multi().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2]);
        assert_eq!(m.graph, crate::fixtures::latent_dag_marginal());
    }

    #[test]
    fn latent_chain_reaches_through_hidden_vertices() {
        // a -> b (both hidden), a -> x, b -> y, b -> z
        let dag = MixedGraph::new(5, [(0, 1), (0, 2), (1, 3), (1, 4)], []).unwrap();
        let m = marginalize(&dag, &set(&[0, 1]), BowRemoval::DropParent).unwrap();
        let multi: Vec<Vec<usize>> = m.graph.multi().iter().cloned().collect();
        assert_eq!(multi, vec![vec![0, 1, 2], vec![1, 2]]);
    }

    #[test]
    fn no_hidden_vertices_is_identity() {
        let dag = MixedGraph::new(4, [(0, 1), (2, 3)], []).unwrap();
        let m = marginalize(&dag, &BTreeSet::new(), BowRemoval::DropParent).unwrap();
        assert_eq!(m.graph, dag);
        assert_eq!(m.observed, vec![0, 1, 2, 3]);
    }

    #[test]
    fn bow_removal_modes() {
        // hidden 0 -> {1, 2}, plus 1 -> 2
        let dag = MixedGraph::new(3, [(0, 1), (0, 2), (1, 2)], []).unwrap();
        let parent = marginalize(&dag, &set(&[0]), BowRemoval::DropParent).unwrap();
        assert!(parent.graph.multi().is_empty());
        assert_eq!(parent.graph.directed().len(), 1);
        let directed = marginalize(&dag, &set(&[0]), BowRemoval::DropDirected).unwrap();
        assert!(directed.graph.directed().is_empty());
        assert_eq!(directed.graph.multi().len(), 1);
    }

    #[test]
    fn rejects_hidden_with_observed_parent() {
        let dag = MixedGraph::new(3, [(0, 1), (1, 2)], []).unwrap();
        assert!(matches!(
            marginalize(&dag, &set(&[1]), BowRemoval::DropParent),
            Err(Error::HiddenWithObservedParent(2))
        ));
    }

    #[test]
    fn preset_densities() {
        let opts = GeneratorOptions::default();
        for e in [5, 8, 12] {
            let m = random_bowfree(7, e, 42, &opts).unwrap();
            assert_eq!(m.dag.directed().len(), e);
        }
        let empty = random_bowfree(7, 0, 1, &opts).unwrap();
        assert_eq!(empty.truth().p(), 7);
        assert!(empty.truth().multi().is_empty() && empty.truth().directed().is_empty());
        assert!(matches!(
            random_bowfree(7, 22, 1, &opts),
            Err(Error::EdgeCountOutOfRange { edges: 22, max: 21 })
        ));
    }

    #[test]
    fn generator_is_reproducible() {
        let opts = GeneratorOptions::default();
        let a = random_bowfree(7, 8, 9, &opts).unwrap();
        let b = random_bowfree(7, 8, 9, &opts).unwrap();
        assert_eq!(a.spec, b.spec);
    }

    #[test]
    fn loadings_are_the_hidden_coefficients() {
        let opts = GeneratorOptions::default();
        for seed in 0..50 {
            let m = random_bowfree(7, 8, seed, &opts).unwrap();
            for h in m.spec.hidden() {
                for &l in &h.loadings {
                    assert!((0.6..1.0).contains(&l.abs()), "loading {l}");
                }
            }
        }
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn generated_graphs_are_valid(seed in any::<u64>(), e in 0usize..=21) {
            let m = random_bowfree(7, e, seed, &GeneratorOptions::default()).unwrap();
            let g = m.truth();
            prop_assert!(g.is_acyclic());
            prop_assert!(g.is_bow_free());
            prop_assert!((4..=7).contains(&g.p()));
            for (_, _, b) in m.spec.effects().nonzero() {
                prop_assert!((0.6..1.0).contains(&b.abs()));
            }
        }
    }
}
