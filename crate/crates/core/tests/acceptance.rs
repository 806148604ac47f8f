//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any failed.
//!
//! `cargo test -p mbang-core --test acceptance`

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use mbang_core::bench::{run_benchmark, CumulantMode, TrialConfig};
use mbang_core::cumulant::{CumulantSource, PopulationCumulants, SampleCumulants};
use mbang_core::discovery::{
    run_mbang, search_cliques, DiscoveryConfig, FirstStageResult, OracleStage, Reporting,
    TestOutcome, ZeroTest,
};
use mbang_core::fixtures;
use mbang_core::graph::{BidirectedGraph, VertexTuple};
use mbang_core::sim::{
    dedirect, random_bowfree, simulate, simulate_with_noise, EffectsMatrix, GeneratorOptions,
    HiddenSource, LsemSpec, NoiseLaw,
};
use mbang_core::Rational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(0.6..1.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Skewed gamma law with random shape and rate: every cumulant is nonzero
/// and the values differ from source to source.
fn generic_law(rng: &mut ChaCha8Rng) -> NoiseLaw {
    NoiseLaw::Gamma {
        shape: rng.random_range(0.5..4.0),
        rate: rng.random_range(0.5..2.0),
    }
}

/// Random acyclic, bow-free mixed graph on `p` vertices with a random
/// causal order, generic coefficients and noise.
fn random_mixed_spec(p: usize, rng: &mut ChaCha8Rng) -> LsemSpec {
    let mut order: Vec<usize> = (0..p).collect();
    for i in (1..p).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let mut directed = Vec::new();
    let mut b = EffectsMatrix::zeros(p);
    for a in 0..p {
        for c in a + 1..p {
            if rng.random_bool(0.4) {
                let (i, j) = (order[a], order[c]);
                directed.push((i, j));
                b.set(i, j, coefficient(rng));
            }
        }
    }
    let linked: BTreeSet<(usize, usize)> = directed.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    let mut hidden = Vec::new();
    for _ in 0..rng.random_range(0..=2) {
        let size = rng.random_range(2..=p.min(4));
        let mut members: Vec<usize> = (0..p).collect();
        for i in (1..p).rev() {
            members.swap(i, rng.random_range(0..=i));
        }
        members.truncate(size);
        members.sort_unstable();
        let bow = members
            .iter()
            .any(|&i| members.iter().any(|&j| i < j && linked.contains(&(i, j))));
        if bow {
            continue;
        }
        hidden.push(HiddenSource {
            loadings: members.iter().map(|_| coefficient(rng)).collect(),
            members,
            noise: generic_law(rng),
        });
    }
    let noise = (0..p).map(|_| generic_law(rng)).collect();
    LsemSpec::new(p, directed, b, noise, hidden).expect("constructed bow-free and acyclic")
}

fn subsets(p: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << p)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..p).filter(|&v| m & (1 << v) != 0).collect())
        .collect()
}

fn multi_trek_rule() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ee5);
    let (mut tuples, mut float_violations, mut exact_violations, mut with_trek) = (0, 0, 0, 0);
    for _ in 0..300 {
        let p = rng.random_range(2..=5);
        let spec = random_mixed_spec(p, &mut rng);
        let exact = PopulationCumulants::<Rational>::new(&spec).unwrap();
        let float = PopulationCumulants::<f64>::new(&spec).unwrap();
        for k in 2..=4 {
            for idx in subsets(p, k) {
                let trek = spec.graph().has_k_trek(&VertexTuple::new(idx.clone(), p).unwrap()).unwrap();
                let zero_exact = exact.cumulant(&idx).unwrap().is_zero();
                let zero_float = float.cumulant(&idx).unwrap().abs() <= 1e-9;
                tuples += 1;
                with_trek += usize::from(trek);
                exact_violations += usize::from(zero_exact == trek);
                float_violations += usize::from(zero_float == trek);
            }
        }
    }
    Verdict {
        pass: float_violations == 0 && exact_violations == 0,
        detail: format!(
            "{tuples} tuples ({with_trek} with a trek), violations: {float_violations} at |C| <= 1e-9, {exact_violations} in exact arithmetic"
        ),
    }
}

fn population_pipeline() -> Verdict {
    let exact = DiscoveryConfig {
        zero_test: ZeroTest::Exact,
        ..DiscoveryConfig::default()
    };
    let mut hits = 0;
    let mut failures = 0;
    for (edges, seed) in [(5, 101), (8, 202)] {
        let cfg = TrialConfig {
            p_pre: 7,
            edges,
            trials: 100,
            seed,
            cumulants: CumulantMode::Population,
            discovery: exact,
            ..TrialConfig::default()
        };
        // cycle through the four experiment laws
        for (i, law) in NoiseLaw::EXPERIMENT_LAWS.iter().enumerate() {
            let part = TrialConfig {
                noise: *law,
                trials: 25,
                seed: seed + i as u64,
                ..cfg.clone()
            };
            let r = run_benchmark(&part).unwrap();
            hits += r.summary.graph_exact;
            failures += r.summary.failures;
        }
    }
    let rate = hits as f64 / 200.0;
    Verdict {
        pass: rate >= 0.99,
        detail: format!("exact graph in {hits}/200 specs ({:.1}%), {failures} trial errors", rate * 100.0),
    }
}

fn estimator_convergence() -> Verdict {
    let spec = fixtures::shared_triple_spec();
    let target = PopulationCumulants::<f64>::new(&spec).unwrap().cumulant(&[1, 2, 3]).unwrap();
    let errors: Vec<f64> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let y = simulate::<f64>(&spec, 200_000, 1000 + seed).unwrap();
            let c = SampleCumulants::new(&y).cumulant(&[1, 2, 3]).unwrap();
            (c - target).abs() / target.abs()
        })
        .collect();
    let ok = errors.iter().filter(|&&e| e <= 0.10).count();
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    Verdict {
        pass: ok >= 9,
        detail: format!("{ok}/10 seeds within 10% of {target}, worst relative error {worst:.4}"),
    }
}

fn multi_of(spec: &LsemSpec, n: usize, seed: u64, cfg: &DiscoveryConfig) -> BTreeSet<Vec<usize>> {
    let y = simulate::<f64>(spec, n, seed).unwrap();
    run_mbang(&y, &OracleStage::new(spec.clone()), cfg).unwrap().graph.multi().clone()
}

/// The true bidirected graph of the two-pairs model is the path 2-3-4, so no
/// triple is ever proposed and the criterion is decided on that path. As a
/// harder side measurement the search also gets a triangle with a spurious
/// 2-4 pair, where only the cumulant test keeps 2, 3, 4 apart. With the
/// relaxed test the fourth-order fallback entries are noisy enough under
/// chi-squared sources to merge the triangle on some seeds; the strict test
/// shows the third-order entry alone. Neither count affects the verdict.
fn four_vertex_discrimination() -> Verdict {
    let cfg = DiscoveryConfig::default();
    let two_pairs = fixtures::two_pairs_spec();
    let triple = fixtures::shared_triple_spec();
    let want_pairs = BTreeSet::from([vec![1, 2], vec![2, 3]]);
    let want_triple = BTreeSet::from([vec![1, 2, 3]]);
    let triangle = FirstStageResult::new(
        two_pairs.effects().clone(),
        two_pairs.graph().directed().clone(),
        BidirectedGraph::new(4, [(1, 2), (2, 3), (1, 3)]).unwrap(),
    )
    .unwrap();
    let unmerged = |y: &mbang_core::Dataset<f64>, cfg: &DiscoveryConfig| {
        let g = run_mbang(y, &triangle, cfg).unwrap().graph;
        g.multi().iter().all(|h| h.len() == 2)
    };
    let results: Vec<[bool; 4]> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let y = simulate::<f64>(&two_pairs, 50_000, 2000 + seed).unwrap();
            let on_path = run_mbang(&y, &OracleStage::new(two_pairs.clone()), &cfg).unwrap();
            [
                *on_path.graph.multi() == want_pairs,
                multi_of(&triple, 50_000, 3000 + seed, &cfg) == want_triple,
                unmerged(&y, &cfg),
                unmerged(&y, &cfg.strict()),
            ]
        })
        .collect();
    let count = |i: usize| results.iter().filter(|r| r[i]).count();
    let (pairs_ok, triple_ok) = (count(0), count(1));
    Verdict {
        pass: pairs_ok >= 18 && triple_ok >= 18,
        detail: format!(
            "two latent pairs recovered on {pairs_ok}/20 seeds, latent triple on {triple_ok}/20; \
             spurious triangle left unmerged on {}/20 (relaxed) and {}/20 (strict)",
            count(2),
            count(3)
        ),
    }
}

fn consistency_trend() -> Verdict {
    let mut rates = Vec::new();
    for n in [10_000, 25_000, 50_000] {
        let cfg = TrialConfig {
            p_pre: 7,
            edges: 5,
            noise: NoiseLaw::UNIFORM_10,
            n,
            trials: 50,
            seed: 5,
            ..TrialConfig::default()
        };
        rates.push(run_benchmark(&cfg).unwrap().summary.graph_exact_rate);
    }
    let monotone = rates.windows(2).all(|w| w[0] <= w[1]);
    Verdict {
        pass: monotone && rates[2] >= 0.85,
        detail: format!(
            "exact-graph rate {:.2} / {:.2} / {:.2} at n = 10000 / 25000 / 50000",
            rates[0], rates[1], rates[2]
        ),
    }
}

fn exhaustive_maximal_cliques(bg: &BidirectedGraph) -> Vec<Vec<usize>> {
    let p = bg.p();
    let cliques: Vec<Vec<usize>> = (1u32..1 << p)
        .map(|m| (0..p).filter(|&v| m & (1 << v) != 0).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() >= 2 && bg.is_clique(s))
        .collect();
    let mut out: Vec<Vec<usize>> = cliques
        .iter()
        .filter(|s| !cliques.iter().any(|t| t.len() > s.len() && s.iter().all(|v| t.contains(v))))
        .cloned()
        .collect();
    out.sort();
    out
}

fn degeneration() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0c4);
    let mut mismatches = 0;
    let mut cliques = 0;
    for _ in 0..100 {
        let p = rng.random_range(1..=8);
        let density = rng.random_range(0.1..0.9);
        let pairs: Vec<(usize, usize)> = (0..p)
            .flat_map(|i| (i + 1..p).map(move |j| (i, j)))
            .filter(|_| rng.random_bool(density))
            .collect();
        let bg = BidirectedGraph::new(p, pairs).unwrap();
        let forced = search_cliques(&bg, Reporting::Hereditary, |r, v| {
            Ok(TestOutcome {
                passed: true,
                entry: r.iter().copied().chain([v]).collect(),
                value: 1.0,
                relaxed: false,
            })
        })
        .unwrap();
        let forced: Vec<Vec<usize>> = forced.into_iter().map(|e| e.members).collect();
        let truth = exhaustive_maximal_cliques(&bg);
        cliques += truth.len();
        mismatches += usize::from(forced != truth || bg.maximal_cliques() != truth);
    }
    Verdict {
        pass: mismatches == 0,
        detail: format!("{mismatches}/100 graphs differ from exhaustive enumeration ({cliques} maximal cliques)"),
    }
}

fn symmetric_relaxation() -> Verdict {
    let spec = fixtures::symmetric_triple_spec();
    let relaxed = DiscoveryConfig::default();
    let strict = DiscoveryConfig::default().strict();
    let triple = vec![1, 2, 3];
    let results: Vec<(bool, bool)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let y = simulate::<f64>(&spec, 50_000, 4000 + seed).unwrap();
            let stage = OracleStage::new(spec.clone());
            let with = run_mbang(&y, &stage, &relaxed).unwrap();
            let without = run_mbang(&y, &stage, &strict).unwrap();
            (with.graph.multi().contains(&triple), !without.graph.multi().contains(&triple))
        })
        .collect();
    let found = results.iter().filter(|r| r.0).count();
    let missed = results.iter().filter(|r| r.1).count();
    let both = results.iter().filter(|r| r.0 && r.1).count();
    Verdict {
        pass: both >= 18,
        detail: format!("recovered with relaxed test on {found}/20, missed with strict on {missed}/20, both on {both}/20"),
    }
}

fn dedirect_identity() -> Verdict {
    let mut worst = 0.0f64;
    let mut exact_mismatches = 0;
    for seed in 0..50u64 {
        let opts = GeneratorOptions {
            noise: NoiseLaw::EXPERIMENT_LAWS[seed as usize % 4],
            ..GeneratorOptions::default()
        };
        let model = random_bowfree(7, [5, 8, 12][seed as usize % 3], seed, &opts).unwrap();
        let sim = simulate_with_noise::<f64>(&model.spec, 2000, seed).unwrap();
        let x = dedirect(&sim.data, model.spec.effects()).unwrap();
        for (a, b) in x.rows().zip(sim.noise.rows()) {
            for (u, v) in a.iter().zip(b) {
                worst = worst.max((u - v).abs());
            }
        }
        let exact = simulate_with_noise::<Rational>(&model.spec, 50, seed).unwrap();
        exact_mismatches += usize::from(dedirect(&exact.data, model.spec.effects()).unwrap() != exact.noise);
    }
    Verdict {
        pass: worst <= 1e-10 && exact_mismatches == 0,
        detail: format!("max |X - eps| = {worst:.2e} in f64; {exact_mismatches}/50 mismatches in exact arithmetic"),
    }
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 multi-trek rule", multi_trek_rule),
        ("2 population-oracle pipeline", population_pipeline),
        ("3 cumulant estimator convergence", estimator_convergence),
        ("4 two pairs vs latent triple", four_vertex_discrimination),
        ("5 finite-sample consistency", consistency_trend),
        ("6 degeneration to Bron-Kerbosch", degeneration),
        ("7 symmetric-noise relaxation", symmetric_relaxation),
        ("8 dedirect identity", dedirect_identity),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let status = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!("{status} [{name}] {} ({:.1}s)", v.detail, start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
