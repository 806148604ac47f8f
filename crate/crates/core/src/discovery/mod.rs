//! The recovery pipeline: a first stage supplies directed edges, effects and
//! bidirected pairs; the data are dedirected and standardized; a
//! cumulant-guided clique search merges bidirected pairs into
//! multidirected edges.

mod first_stage;
mod search;

pub use first_stage::{
    load_external_first_stage, oracle_first_stage, ExternalStage, FirstStage, FirstStageJson,
    FirstStageResult, OracleStage,
};
pub use search::{
    cumulant_test, find_multidirected, search_cliques, DiscoveredEdge, DiscoveryConfig, RelaxedTest,
    Reporting, TestOutcome, ZeroTest, EXACT_ZERO_THRESHOLD,
};

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::cumulant::{CumulantSource, PopulationCumulants, SampleCumulants};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::scalar::{Real, Scalar};
use crate::sim::{dedirect, default_labels, standardize_rows, Dataset, EffectsMatrix, LsemSpec};

/// Recovered graph and everything needed to explain it.
#[derive(Clone, Debug)]
pub struct MbangResult {
    pub graph: MixedGraph,
    pub b_hat: EffectsMatrix,
    pub edges: Vec<DiscoveredEdge>,
    pub labels: Vec<String>,
    pub config: DiscoveryConfig,
    pub warnings: Vec<String>,
}

impl MbangResult {
    fn assemble(
        stage: &FirstStageResult,
        edges: Vec<DiscoveredEdge>,
        labels: Vec<String>,
        config: DiscoveryConfig,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let graph = MixedGraph::new(
            stage.p(),
            stage.directed().iter().copied(),
            edges.iter().map(|e| e.members.clone()),
        )?;
        Ok(MbangResult {
            graph,
            b_hat: stage.b_hat().clone(),
            edges,
            labels,
            config,
            warnings,
        })
    }

    pub fn to_json(&self) -> DiscoveryReport {
        let graph = serde_json::to_value(&self.graph).expect("graph serializes");
        DiscoveryReport {
            p: self.graph.p(),
            directed: graph["directed"].clone(),
            multi: graph["multi"].clone(),
            b_hat: self.b_hat.clone(),
            labels: self.labels.clone(),
            config: self.config,
            diagnostics: self
                .edges
                .iter()
                .map(|e| EdgeDiagnostics {
                    edge: e.members.iter().map(|v| v + 1).collect(),
                    tests: e
                        .tests
                        .iter()
                        .map(|t| TestJson {
                            entry: t.entry.iter().map(|v| v + 1).collect(),
                            value: t.value,
                            relaxed: t.relaxed,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

/// Discovery output: graph JSON fields (`p`, `directed`, `multi`, 1-based)
/// plus the effects, configuration and per-edge test record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscoveryReport {
    pub p: usize,
    pub directed: serde_json::Value,
    pub multi: serde_json::Value,
    #[serde(rename = "B_hat")]
    pub b_hat: EffectsMatrix,
    pub labels: Vec<String>,
    pub config: DiscoveryConfig,
    pub diagnostics: Vec<EdgeDiagnostics>,
}

impl DiscoveryReport {
    pub fn graph(&self) -> Result<MixedGraph> {
        let v = serde_json::json!({"p": self.p, "directed": self.directed, "multi": self.multi});
        Ok(serde_json::from_value(v)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeDiagnostics {
    pub edge: Vec<usize>,
    /// One entry per vertex merged beyond the first pair.
    pub tests: Vec<TestJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestJson {
    pub entry: Vec<usize>,
    pub value: f64,
    pub relaxed: bool,
}

fn check_stage(stage: &FirstStageResult, p: usize) -> Result<()> {
    if stage.p() != p {
        return Err(Error::DimensionMismatch {
            context: "first stage vs data",
            expected: p,
            found: stage.p(),
        });
    }
    Ok(())
}

/// Full pipeline on observed data `y` (rows are variables).
pub fn run_mbang<T, S>(y: &Dataset<T>, stage: &S, cfg: &DiscoveryConfig) -> Result<MbangResult>
where
    T: Real,
    S: FirstStage<T> + ?Sized,
{
    cfg.validate()?;
    y.check_finite()?;
    let first = stage.estimate(y).map_err(|e| e.context("first stage failed"))?;
    check_stage(&first, y.p())?;
    let mut warnings = Vec::new();
    if cfg.zero_test == ZeroTest::Threshold && cfg.tolerance == 0.0 {
        warnings.push(
            "tolerance 0 on sample data: sample cumulants are almost surely nonzero, so every clique merges"
                .to_string(),
        );
    }
    let mut x = dedirect(y, first.b_hat())?;
    if cfg.standardize {
        x = standardize_rows(&x)?;
    }
    let source = SampleCumulants::new(&x);
    let edges = find_multidirected(&source, first.bidirected(), cfg)?;
    let labels = first.labels().map(<[String]>::to_vec).unwrap_or_else(|| y.labels().to_vec());
    MbangResult::assemble(&first, edges, labels, *cfg, warnings)
}

/// Search on a caller-supplied cumulant source, e.g. exact population
/// cumulants of already dedirected data.
pub fn run_mbang_on_cumulants<T, C>(source: &C, first: &FirstStageResult, cfg: &DiscoveryConfig) -> Result<MbangResult>
where
    T: Scalar,
    C: CumulantSource<T> + ?Sized,
{
    check_stage(first, source.p())?;
    let edges = find_multidirected(source, first.bidirected(), cfg)?;
    let labels = first.labels().map(<[String]>::to_vec).unwrap_or_else(|| default_labels(first.p()));
    MbangResult::assemble(first, edges, labels, *cfg, Vec::new())
}

/// Pipeline with population cumulants of the model dedirected by the first
/// stage's effects. In exact mode the cumulants are rational and
/// standardization is skipped: rescaling rows never changes which entries
/// vanish. In threshold mode they are `f64`, standardized if requested.
pub fn run_mbang_population(spec: &LsemSpec, first: &FirstStageResult, cfg: &DiscoveryConfig) -> Result<MbangResult> {
    cfg.validate()?;
    check_stage(first, spec.p())?;
    match cfg.zero_test {
        ZeroTest::Exact => {
            let pop = PopulationCumulants::<BigRational>::dedirected(spec, first.b_hat())?;
            run_mbang_on_cumulants(&pop, first, cfg)
        }
        ZeroTest::Threshold => {
            let mut pop = PopulationCumulants::<f64>::dedirected(spec, first.b_hat())?;
            if cfg.standardize {
                pop = pop.standardized()?;
            }
            run_mbang_on_cumulants(&pop, first, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sim::simulate;

    fn exact() -> DiscoveryConfig {
        DiscoveryConfig {
            zero_test: ZeroTest::Exact,
            ..DiscoveryConfig::default()
        }
    }

    #[test]
    fn population_pipeline_recovers_triple_and_pair() {
        let spec = fixtures::triple_and_pair_spec();
        let first = oracle_first_stage(&spec, 0.0, 0).unwrap();
        let r = run_mbang_population(&spec, &first, &exact()).unwrap();
        assert_eq!(r.graph, *spec.graph());
        let threshold = run_mbang_population(&spec, &first, &DiscoveryConfig::default()).unwrap();
        assert_eq!(threshold.graph, *spec.graph());
    }

    #[test]
    fn population_pipeline_on_four_vertex_models() {
        for spec in [fixtures::two_pairs_spec(), fixtures::shared_triple_spec()] {
            let first = oracle_first_stage(&spec, 0.0, 0).unwrap();
            let r = run_mbang_population(&spec, &first, &exact()).unwrap();
            assert_eq!(r.graph.multi(), spec.graph().multi());
        }
    }

    #[test]
    fn dag_gives_no_multidirected_edges() {
        let mut b = EffectsMatrix::zeros(3);
        b.set(0, 1, 0.9);
        b.set(1, 2, -0.7);
        let spec = LsemSpec::new(
            3,
            [(0, 1), (1, 2)],
            b,
            vec![crate::sim::NoiseLaw::UNIFORM_10; 3],
            vec![],
        )
        .unwrap();
        let y = simulate::<f64>(&spec, 2000, 1).unwrap();
        let r = run_mbang(&y, &OracleStage::new(spec.clone()), &DiscoveryConfig::default()).unwrap();
        assert!(r.graph.multi().is_empty());
        assert_eq!(r.graph.directed(), spec.graph().directed());
    }

    #[test]
    fn huge_tolerance_leaves_only_pairs() {
        let spec = fixtures::shared_triple_spec();
        let y = simulate::<f64>(&spec, 5000, 2).unwrap();
        let cfg = DiscoveryConfig {
            tolerance: 1e9,
            ..DiscoveryConfig::default()
        };
        let r = run_mbang(&y, &OracleStage::new(spec), &cfg).unwrap();
        let multi: Vec<Vec<usize>> = r.graph.multi().iter().cloned().collect();
        assert_eq!(multi, vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn zero_tolerance_warns_and_merges() {
        let spec = fixtures::two_pairs_spec();
        let y = simulate::<f64>(&spec, 500, 3).unwrap();
        let mut first = oracle_first_stage(&spec, 0.0, 0).unwrap();
        // a triangle the data do not support still merges at tolerance 0
        first = FirstStageResult::new(
            first.b_hat().clone(),
            first.directed().clone(),
            crate::graph::BidirectedGraph::new(4, [(1, 2), (2, 3), (1, 3)]).unwrap(),
        )
        .unwrap();
        let cfg = DiscoveryConfig {
            tolerance: 0.0,
            ..DiscoveryConfig::default()
        };
        let r = run_mbang(&y, &first, &cfg).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.graph.multi().iter().cloned().collect::<Vec<_>>(), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn stage_errors_carry_context() {
        let spec = fixtures::shared_triple_spec();
        let y = simulate::<f64>(&spec, 100, 2).unwrap();
        let stage = ExternalStage {
            path: "/nonexistent/first_stage.json".into(),
            strict: true,
        };
        let err = run_mbang(&y, &stage, &DiscoveryConfig::default()).unwrap_err();
        assert!(err.to_string().starts_with("first stage failed"));
        let wrong = oracle_first_stage(&fixtures::triple_and_pair_spec(), 0.0, 0).unwrap();
        assert!(matches!(
            run_mbang(&y, &wrong, &DiscoveryConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn report_json_shape() {
        let spec = fixtures::shared_triple_spec();
        let first = oracle_first_stage(&spec, 0.0, 0).unwrap();
        let r = run_mbang_population(&spec, &first, &exact()).unwrap();
        let report = r.to_json();
        let text = serde_json::to_string(&report).unwrap();
        assert!(text.contains(r#""multi":[[2,3,4]]"#));
        assert!(text.contains(r#""diagnostics":[{"edge":[2,3,4],"tests":[{"entry":[2,3,4]"#));
        let back: DiscoveryReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.graph().unwrap(), r.graph);
    }

    #[test]
    fn ecology_first_stage_groups_into_three_triples() {
        // With the population behaviour of three latent triples, the
        // forced-true search returns the maximal cliques of the seven pairs.
        let first = fixtures::ecology_first_stage();
        let edges = search_cliques(first.bidirected(), Reporting::Hereditary, |r, v| {
            let mut entry = r.to_vec();
            entry.push(v);
            Ok(TestOutcome {
                passed: true,
                entry,
                value: 1.0,
                relaxed: false,
            })
        })
        .unwrap();
        let labels = first.labels().unwrap();
        let named: Vec<Vec<&str>> = edges
            .iter()
            .map(|e| e.members.iter().map(|&v| labels[v].as_str()).collect())
            .collect();
        assert_eq!(
            named,
            vec![
                vec!["PlotProd", "SiteBiomass", "PlotSoilSuit"],
                vec!["SiteProd", "SiteBiomass", "SiteRich"],
                vec!["SiteProd", "SiteBiomass", "PlotSoilSuit"],
            ]
        );
    }
}
