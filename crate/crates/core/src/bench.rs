//! Simulation study: random bow-free models, simulated data, recovery, and
//! scoring against the truth.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::discovery::{
    load_external_first_stage, oracle_first_stage, run_mbang, run_mbang_population, DiscoveryConfig,
    FirstStageResult,
};
use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::sim::{random_bowfree, simulate, GeneratorOptions, NoiseLaw, RandomModel};

/// Where the directed structure and bidirected pairs come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageKind {
    /// The true model, effects optionally perturbed.
    Oracle {
        #[serde(default)]
        perturbation: f64,
    },
    /// One first-stage JSON file per trial, `trial_0000.json`, ... in `dir`.
    External {
        dir: PathBuf,
        #[serde(default)]
        strict: bool,
    },
}

impl Default for StageKind {
    fn default() -> Self {
        StageKind::Oracle { perturbation: 0.0 }
    }
}

/// Which cumulants drive the search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CumulantMode {
    /// Plug-in estimates from `n` simulated samples.
    #[default]
    Sample,
    /// Exact population cumulants of the generated model; `n` is ignored.
    Population,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    /// Vertices before marginalization.
    pub p_pre: usize,
    /// Directed edges before marginalization.
    pub edges: usize,
    #[serde(deserialize_with = "noise_field")]
    pub noise: NoiseLaw,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub stage: StageKind,
    pub cumulants: CumulantMode,
    pub discovery: DiscoveryConfig,
    /// `noise` here is overridden by the top-level `noise`.
    pub generator: GeneratorOptions,
    /// When set, each trial's spec and data are written here so an
    /// external first stage can be run on them.
    pub export_dir: Option<PathBuf>,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            p_pre: 7,
            edges: 5,
            noise: NoiseLaw::UNIFORM_10,
            n: 10_000,
            trials: 100,
            seed: 0,
            stage: StageKind::default(),
            cumulants: CumulantMode::Sample,
            discovery: DiscoveryConfig::default(),
            generator: GeneratorOptions::default(),
            export_dir: None,
        }
    }
}

/// Accepts either a table (`{law = "gamma", shape = 2, rate = 4}`) or a
/// short name (`"gamma"`, `"unif10"`, `"t(10)"`).
fn noise_field<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<NoiseLaw, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Field {
        Name(String),
        Law(NoiseLaw),
    }
    match Field::deserialize(d)? {
        Field::Name(s) => s.parse().map_err(serde::de::Error::custom),
        Field::Law(l) => Ok(l),
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_pre == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter("p_pre and trials must be positive".into()));
        }
        if self.cumulants == CumulantMode::Sample && self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        let max = self.p_pre * (self.p_pre - 1) / 2;
        if self.edges > max {
            return Err(Error::EdgeCountOutOfRange { edges: self.edges, max });
        }
        self.noise.validate()?;
        self.discovery.validate()?;
        if let StageKind::Oracle { perturbation } = self.stage {
            if !(perturbation.is_finite() && perturbation >= 0.0) {
                return Err(Error::InvalidParameter("perturbation must be finite and >= 0".into()));
            }
        }
        Ok(())
    }

    /// Seed of trial `t`, a SplitMix64 step away from the base seed so that
    /// neighbouring trials get unrelated streams.
    pub fn trial_seed(&self, t: usize) -> u64 {
        splitmix64(self.seed ^ (t as u64).wrapping_mul(0xD1B5_4A32_D192_ED03))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreMode {
    /// A true multidirected edge counts only if the same vertex set was reported.
    #[default]
    Exact,
    /// Compare the bidirected subdivisions pair by pair.
    Subdivision,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub total: usize,
    pub graph_exact: bool,
}

pub fn score(truth: &MixedGraph, recovered: &MixedGraph, mode: ScoreMode) -> Result<Score> {
    if truth.p() != recovered.p() {
        return Err(Error::DimensionMismatch {
            context: "scored graphs",
            expected: truth.p(),
            found: recovered.p(),
        });
    }
    let directed_match = truth.directed() == recovered.directed();
    Ok(match mode {
        ScoreMode::Exact => Score {
            correct: truth.multi().intersection(recovered.multi()).count(),
            total: truth.multi().len(),
            graph_exact: directed_match && truth.multi() == recovered.multi(),
        },
        ScoreMode::Subdivision => {
            let t: BTreeSet<_> = truth.bidirected_subdivision().pairs().into_iter().collect();
            let r: BTreeSet<_> = recovered.bidirected_subdivision().pairs().into_iter().collect();
            Score {
                correct: t.intersection(&r).count(),
                total: t.len(),
                graph_exact: directed_match && t == r,
            }
        }
    })
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub truth: MixedGraph,
    /// `None` when the trial failed; see `error`.
    pub recovered: Option<MixedGraph>,
    pub edge_correct: usize,
    pub edge_total: usize,
    pub graph_exact: bool,
    pub pairs_correct: usize,
    pub pairs_total: usize,
    /// The first stage returned the true directed edges and bidirected pairs.
    pub stage_exact: bool,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub failures: usize,
    pub graph_exact: usize,
    pub graph_exact_rate: f64,
    pub edge_correct: usize,
    pub edge_total: usize,
    /// `edge_correct / edge_total`; trials without true multidirected edges
    /// add nothing to either count. `None` if `edge_total` is 0.
    pub edge_rate: Option<f64>,
    pub pairs_correct: usize,
    pub pairs_total: usize,
    pub subdivision_rate: Option<f64>,
    pub stage_exact: usize,
    /// Exact-graph rate among trials whose first stage was exact.
    pub conditional_exact_rate: Option<f64>,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

impl Summary {
    pub fn from_outcomes(outcomes: &[TrialOutcome]) -> Self {
        let count = |f: fn(&TrialOutcome) -> bool| outcomes.iter().filter(|o| f(o)).count();
        let sum = |f: fn(&TrialOutcome) -> usize| outcomes.iter().map(f).sum::<usize>();
        let graph_exact = count(|o| o.graph_exact);
        let stage_exact = count(|o| o.stage_exact);
        let both = count(|o| o.stage_exact && o.graph_exact);
        let (edge_correct, edge_total) = (sum(|o| o.edge_correct), sum(|o| o.edge_total));
        let (pairs_correct, pairs_total) = (sum(|o| o.pairs_correct), sum(|o| o.pairs_total));
        Summary {
            trials: outcomes.len(),
            failures: count(|o| o.error.is_some()),
            graph_exact,
            graph_exact_rate: ratio(graph_exact, outcomes.len()).unwrap_or(0.0),
            edge_correct,
            edge_total,
            edge_rate: ratio(edge_correct, edge_total),
            pairs_correct,
            pairs_total,
            subdivision_rate: ratio(pairs_correct, pairs_total),
            stage_exact,
            conditional_exact_rate: ratio(both, stage_exact),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub config: TrialConfig,
    pub outcomes: Vec<TrialOutcome>,
    pub summary: Summary,
}

fn stage_matches(stage: &FirstStageResult, truth: &MixedGraph) -> bool {
    stage.directed() == truth.directed() && *stage.bidirected() == truth.bidirected_subdivision()
}

fn first_stage(cfg: &TrialConfig, t: usize, model: &RandomModel, seed: u64) -> Result<FirstStageResult> {
    match &cfg.stage {
        StageKind::Oracle { perturbation } => oracle_first_stage(&model.spec, *perturbation, seed),
        StageKind::External { dir, strict } => {
            let path = dir.join(format!("trial_{t:04}.json"));
            load_external_first_stage(&path, *strict).map(|(r, _)| r)
        }
    }
}

fn recover(cfg: &TrialConfig, t: usize, seed: u64, model: &RandomModel) -> Result<(MixedGraph, bool)> {
    let stage = first_stage(cfg, t, model, seed)?;
    let stage_exact = stage_matches(&stage, model.truth());
    let result = match cfg.cumulants {
        CumulantMode::Population => run_mbang_population(&model.spec, &stage, &cfg.discovery)?,
        CumulantMode::Sample => {
            let y = simulate::<f64>(&model.spec, cfg.n, seed)?;
            if let Some(dir) = &cfg.export_dir {
                export_trial(dir, t, model, &y)?;
            }
            run_mbang(&y, &stage, &cfg.discovery)?
        }
    };
    Ok((result.graph, stage_exact))
}

fn export_trial(dir: &std::path::Path, t: usize, model: &RandomModel, y: &crate::sim::Dataset<f64>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let spec = serde_json::to_string_pretty(&model.spec)?;
    std::fs::write(dir.join(format!("trial_{t:04}_spec.json")), spec)?;
    crate::io::write_dataset(y, &dir.join(format!("trial_{t:04}_data.csv")))
}

/// One trial: generate, recover, score. Errors after generation are kept in
/// the outcome rather than returned.
pub fn run_trial(cfg: &TrialConfig, t: usize) -> Result<TrialOutcome> {
    let seed = cfg.trial_seed(t);
    let opts = GeneratorOptions {
        noise: cfg.noise,
        ..cfg.generator.clone()
    };
    let model = random_bowfree(cfg.p_pre, cfg.edges, seed, &opts)?;
    let truth = model.truth().clone();
    let start = Instant::now();
    let attempt = recover(cfg, t, seed, &model);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut outcome = TrialOutcome {
        trial: t,
        seed,
        edge_total: truth.multi().len(),
        pairs_total: truth.bidirected_subdivision().pairs().len(),
        truth,
        recovered: None,
        edge_correct: 0,
        graph_exact: false,
        pairs_correct: 0,
        stage_exact: false,
        wall_ms,
        error: None,
    };
    match attempt.and_then(|(g, stage_exact)| {
        let exact = score(&outcome.truth, &g, ScoreMode::Exact)?;
        let sub = score(&outcome.truth, &g, ScoreMode::Subdivision)?;
        Ok((g, stage_exact, exact, sub))
    }) {
        Ok((g, stage_exact, exact, sub)) => {
            outcome.recovered = Some(g);
            outcome.edge_correct = exact.correct;
            outcome.graph_exact = exact.graph_exact;
            outcome.pairs_correct = sub.correct;
            outcome.stage_exact = stage_exact;
        }
        Err(e) => outcome.error = Some(e.to_string()),
    }
    Ok(outcome)
}

/// Runs every trial on the current rayon pool. Outcomes are in trial order
/// and do not depend on the number of workers.
pub fn run_benchmark(cfg: &TrialConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = Summary::from_outcomes(&outcomes);
    Ok(BenchReport {
        config: cfg.clone(),
        outcomes,
        summary,
    })
}

/// [`run_benchmark`] on a dedicated pool of `threads` workers.
pub fn run_benchmark_with_threads(cfg: &TrialConfig, threads: usize) -> Result<BenchReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_benchmark(cfg))
}

/// A cross product of sample sizes, densities and noise laws over a base
/// configuration. Empty lists keep the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub edges: Vec<usize>,
    pub n: Vec<usize>,
    pub noise: Vec<String>,
}

impl Grid {
    pub fn expand(&self, base: &TrialConfig) -> Result<Vec<TrialConfig>> {
        let noises: Vec<NoiseLaw> = if self.noise.is_empty() {
            vec![base.noise]
        } else {
            self.noise.iter().map(|s| s.parse()).collect::<Result<_>>()?
        };
        let edges = if self.edges.is_empty() { vec![base.edges] } else { self.edges.clone() };
        let ns = if self.n.is_empty() { vec![base.n] } else { self.n.clone() };
        let mut out = Vec::new();
        for &noise in &noises {
            for &e in &edges {
                for &n in &ns {
                    out.push(TrialConfig {
                        noise,
                        edges: e,
                        n,
                        ..base.clone()
                    });
                }
            }
        }
        Ok(out)
    }
}

pub const CSV_HEADER: &str = "trial,seed,n,edges,noise,edge_correct,edge_total,graph_exact,stage_exact,wall_ms";

/// Per-trial rows; `n` is empty for population runs.
pub fn write_trials_csv<W: Write>(report: &BenchReport, out: W) -> Result<()> {
    write_trials_csv_many(std::slice::from_ref(report), out)
}

pub fn write_trials_csv_many<W: Write>(reports: &[BenchReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(',')).map_err(csv_err)?;
    for report in reports {
        let cfg = &report.config;
        let n = match cfg.cumulants {
            CumulantMode::Sample => cfg.n.to_string(),
            CumulantMode::Population => String::new(),
        };
        for o in &report.outcomes {
            w.write_record([
                o.trial.to_string(),
                o.seed.to_string(),
                n.clone(),
                cfg.edges.to_string(),
                cfg.noise.to_string(),
                o.edge_correct.to_string(),
                o.edge_total.to_string(),
                o.graph_exact.to_string(),
                o.stage_exact.to_string(),
                format!("{:.3}", o.wall_ms),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Schema(format!("{other:?}")),
    }
}

/// Aggregate JSON: one object per configuration with its summary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AggregateEntry {
    pub edges: usize,
    pub n: Option<usize>,
    pub noise: String,
    pub seed: u64,
    pub summary: Summary,
}

impl From<&BenchReport> for AggregateEntry {
    fn from(r: &BenchReport) -> Self {
        AggregateEntry {
            edges: r.config.edges,
            n: (r.config.cumulants == CumulantMode::Sample).then_some(r.config.n),
            noise: r.config.noise.to_string(),
            seed: r.config.seed,
            summary: r.summary.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: usize, directed: &[(usize, usize)], multi: &[&[usize]]) -> MixedGraph {
        MixedGraph::from_one_based(p, directed.iter().copied(), multi.iter().map(|m| m.to_vec())).unwrap()
    }

    #[test]
    fn scoring_examples() {
        let truth = g(4, &[], &[&[2, 3, 4]]);
        let pairs = g(4, &[], &[&[2, 3], &[3, 4], &[2, 4]]);
        let s = score(&truth, &pairs, ScoreMode::Exact).unwrap();
        assert_eq!((s.correct, s.total, s.graph_exact), (0, 1, false));
        let s = score(&truth, &pairs, ScoreMode::Subdivision).unwrap();
        assert_eq!((s.correct, s.total), (3, 3));

        let truth = g(5, &[], &[&[1, 2], &[3, 4, 5]]);
        let s = score(&truth, &g(5, &[], &[&[1, 2]]), ScoreMode::Exact).unwrap();
        assert_eq!((s.correct, s.total, s.graph_exact), (1, 2, false));
        let s = score(&truth, &truth, ScoreMode::Exact).unwrap();
        assert_eq!((s.correct, s.total, s.graph_exact), (2, 2, true));
        assert!(score(&truth, &g(4, &[], &[]), ScoreMode::Exact).is_err());
    }

    #[test]
    fn directed_mismatch_is_not_exact() {
        let truth = g(3, &[(1, 2)], &[&[2, 3]]);
        let other = g(3, &[], &[&[2, 3]]);
        let s = score(&truth, &other, ScoreMode::Exact).unwrap();
        assert_eq!(s.correct, 1);
        assert!(!s.graph_exact);
    }

    #[test]
    fn no_edges_means_every_graph_is_exact() {
        let cfg = TrialConfig {
            edges: 0,
            trials: 5,
            n: 200,
            ..TrialConfig::default()
        };
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.summary.graph_exact_rate, 1.0);
        assert_eq!(r.summary.edge_rate, None);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = TrialConfig {
            trials: 6,
            n: 2000,
            edges: 8,
            seed: 17,
            ..TrialConfig::default()
        };
        let key = |r: &BenchReport| {
            r.outcomes
                .iter()
                .map(|o| (o.seed, o.recovered.clone(), o.graph_exact))
                .collect::<Vec<_>>()
        };
        let one = run_benchmark_with_threads(&cfg, 1).unwrap();
        let four = run_benchmark_with_threads(&cfg, 4).unwrap();
        assert_eq!(key(&one), key(&four));
        assert_eq!(one.summary, four.summary);
    }

    #[test]
    fn population_mode_is_exact_on_oracle_stage() {
        let cfg = TrialConfig {
            trials: 20,
            edges: 8,
            cumulants: CumulantMode::Population,
            discovery: DiscoveryConfig {
                zero_test: crate::discovery::ZeroTest::Exact,
                ..DiscoveryConfig::default()
            },
            ..TrialConfig::default()
        };
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.summary.failures, 0);
        assert_eq!(r.summary.stage_exact, 20);
        assert!(r.summary.graph_exact >= 19, "{:?}", r.summary);
    }

    #[test]
    fn summary_counts_are_plain_sums() {
        let truth = g(3, &[], &[&[1, 2]]);
        let mk = |exact: bool, correct: usize, stage: bool| TrialOutcome {
            trial: 0,
            seed: 0,
            truth: truth.clone(),
            recovered: None,
            edge_correct: correct,
            edge_total: 1,
            graph_exact: exact,
            pairs_correct: correct,
            pairs_total: 1,
            stage_exact: stage,
            wall_ms: 0.0,
            error: None,
        };
        let s = Summary::from_outcomes(&[mk(true, 1, true), mk(false, 0, true), mk(false, 1, false)]);
        assert_eq!(s.graph_exact, 1);
        assert!((s.graph_exact_rate - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.edge_rate, Some(2.0 / 3.0));
        assert_eq!(s.conditional_exact_rate, Some(0.5));
    }

    #[test]
    fn csv_and_toml() {
        let text = r#"
            edges = 8
            noise = "gamma"
            n = 500
            trials = 2
            seed = 3
            [discovery]
            tolerance = 0.1
            [stage]
            kind = "oracle"
            perturbation = 0.0
        "#;
        let cfg: TrialConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.noise, NoiseLaw::GAMMA_2_4);
        assert_eq!(cfg.discovery.tolerance, 0.1);
        assert!(cfg.discovery.standardize);
        let report = run_benchmark(&cfg).unwrap();
        let mut buf = Vec::new();
        write_trials_csv(&report, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let first = reader.records().next().unwrap().unwrap();
        assert_eq!(&first[0], "0");
        assert_eq!(&first[2], "500");
        assert_eq!(&first[4], "gamma(2,4)");
        assert!(toml::from_str::<TrialConfig>("bogus = 1").is_err());
    }

    #[test]
    fn grid_expansion() {
        let grid = Grid {
            edges: vec![5, 8, 12],
            n: vec![10_000, 25_000],
            noise: vec!["unif10".into(), "t10".into()],
        };
        let cfgs = grid.expand(&TrialConfig::default()).unwrap();
        assert_eq!(cfgs.len(), 12);
        assert_eq!(cfgs[0].noise, NoiseLaw::UNIFORM_10);
        assert_eq!(cfgs[11].noise, NoiseLaw::STUDENT_T_10);
        assert!(Grid { noise: vec!["cauchy".into()], ..Grid::default() }.expand(&TrialConfig::default()).is_err());
    }

    #[test]
    fn external_stage_files_are_read_per_trial() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TrialConfig {
            trials: 2,
            n: 1000,
            ..TrialConfig::default()
        };
        for t in 0..2 {
            let seed = cfg.trial_seed(t);
            let model = random_bowfree(cfg.p_pre, cfg.edges, seed, &cfg.generator).unwrap();
            let stage = oracle_first_stage(&model.spec, 0.0, 0).unwrap();
            let text = serde_json::to_string(&stage.to_json()).unwrap();
            std::fs::write(dir.path().join(format!("trial_{t:04}.json")), text).unwrap();
        }
        let external = TrialConfig {
            stage: StageKind::External {
                dir: dir.path().to_path_buf(),
                strict: true,
            },
            ..cfg.clone()
        };
        let a = run_benchmark(&cfg).unwrap();
        let b = run_benchmark(&external).unwrap();
        assert_eq!(a.summary, b.summary);

        let missing = TrialConfig {
            trials: 3,
            ..external
        };
        let r = run_benchmark(&missing).unwrap();
        assert_eq!(r.summary.failures, 1);
        assert!(r.outcomes[2].error.as_deref().unwrap().contains("trial_0002.json"));
    }
}
