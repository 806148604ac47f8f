use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cumulant::CumulantSource;
use crate::error::{Error, Result};
use crate::graph::BidirectedGraph;
use crate::scalar::Scalar;

/// Threshold used in place of the tolerance when testing population
/// cumulants for exact zeros.
pub const EXACT_ZERO_THRESHOLD: f64 = 1e-9;

/// Fallback check when the entry `C_{R,v}` looks like zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxedTest {
    /// Only `C_{R,v}` is consulted.
    Off,
    /// Also `C_{R,v,j}` for every `j` in `R`.
    #[default]
    Listing,
    /// Also `C_{R,v,j}` for every `j` in `R ∪ {v}`.
    Prose,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroTest {
    /// `|C| > tolerance` counts as nonzero.
    #[default]
    Threshold,
    /// `|C| > 1e-9`, meant for population cumulants.
    Exact,
}

/// When a clique is reported.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reporting {
    /// Candidate and excluded sets of a child call keep only vertices that
    /// pass the cumulant test against the enlarged clique. A clique is
    /// reported when nothing can extend it, so a triangle whose triple
    /// entry vanishes comes out as its three pairs.
    #[default]
    Hereditary,
    /// Plain `P ∩ N(v)`, `Q ∩ N(v)` with the test gating the recursion.
    /// A clique with an adjacent vertex that fails the test is never
    /// reported, nor are its sub-cliques.
    Listing,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    pub tolerance: f64,
    pub standardize: bool,
    pub relaxed: RelaxedTest,
    pub zero_test: ZeroTest,
    pub reporting: Reporting,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            tolerance: 0.05,
            standardize: true,
            relaxed: RelaxedTest::Listing,
            zero_test: ZeroTest::Threshold,
            reporting: Reporting::Hereditary,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be finite and >= 0, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        match self.zero_test {
            ZeroTest::Threshold => self.tolerance,
            ZeroTest::Exact => EXACT_ZERO_THRESHOLD,
        }
    }

    pub fn strict(mut self) -> Self {
        self.relaxed = RelaxedTest::Off;
        self
    }
}

/// The entry that decided a cumulant test. On success it is the first entry
/// above threshold; on failure the largest entry examined.
#[derive(Clone, Debug, PartialEq)]
pub struct TestOutcome {
    pub passed: bool,
    /// 0-based, sorted.
    pub entry: Vec<usize>,
    pub value: f64,
    pub relaxed: bool,
}

/// Whether `v` may join the clique `R`: is `C_{R,v}` nonzero, or with the
/// relaxed test, one of the entries with a repeated index.
pub fn cumulant_test<T, C>(source: &C, r: &[usize], v: usize, cfg: &DiscoveryConfig) -> Result<TestOutcome>
where
    T: Scalar,
    C: CumulantSource<T> + ?Sized,
{
    let threshold = T::from_param(cfg.threshold());
    let mut best: Option<(Vec<usize>, T, bool)> = None;
    let mut check = |entry: Vec<usize>, relaxed: bool| -> Result<Option<TestOutcome>> {
        let value = source.cumulant(&entry)?.abs();
        let mut sorted = entry;
        sorted.sort_unstable();
        if value > threshold {
            return Ok(Some(TestOutcome {
                passed: true,
                entry: sorted,
                value: value.to_f64_lossy(),
                relaxed,
            }));
        }
        if best.as_ref().is_none_or(|(_, b, _)| value > *b) {
            best = Some((sorted, value, relaxed));
        }
        Ok(None)
    };

    let mut base = r.to_vec();
    base.push(v);
    if let Some(hit) = check(base.clone(), false)? {
        return Ok(hit);
    }
    let repeats: &[usize] = match cfg.relaxed {
        RelaxedTest::Off => &[],
        RelaxedTest::Listing => r,
        RelaxedTest::Prose => &base,
    };
    for &j in repeats {
        let mut entry = base.clone();
        entry.push(j);
        if let Some(hit) = check(entry, true)? {
            return Ok(hit);
        }
    }
    let (entry, value, relaxed) = best.expect("at least one entry examined");
    Ok(TestOutcome {
        passed: false,
        entry,
        value: value.to_f64_lossy(),
        relaxed,
    })
}

/// A reported multidirected edge with the tests that admitted each vertex
/// beyond the first two.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscoveredEdge {
    pub members: Vec<usize>,
    pub tests: Vec<TestOutcome>,
}

/// Bron–Kerbosch without pivoting in which a vertex joins the clique `R`
/// only if `test(R, v)` passes. `test` is consulted only for `|R| >= 2`:
/// single bidirected pairs are taken from the first stage as given.
///
/// Edges come back sorted, each with its members ascending.
pub fn search_cliques<F>(bg: &BidirectedGraph, reporting: Reporting, mut test: F) -> Result<Vec<DiscoveredEdge>>
where
    F: FnMut(&[usize], usize) -> Result<TestOutcome>,
{
    let mut search = Search {
        bg,
        reporting,
        test: &mut test,
        found: BTreeMap::new(),
    };
    let candidates = (0..bg.p()).map(|v| (v, None)).collect();
    search.expand(&mut Vec::new(), &mut Vec::new(), candidates, Vec::new())?;
    Ok(search
        .found
        .into_iter()
        .map(|(members, tests)| DiscoveredEdge { members, tests })
        .collect())
}

/// Multidirected edges from cumulants of the dedirected data.
pub fn find_multidirected<T, C>(source: &C, bg: &BidirectedGraph, cfg: &DiscoveryConfig) -> Result<Vec<DiscoveredEdge>>
where
    T: Scalar,
    C: CumulantSource<T> + ?Sized,
{
    cfg.validate()?;
    if source.p() != bg.p() {
        return Err(Error::DimensionMismatch {
            context: "bidirected graph vs data",
            expected: source.p(),
            found: bg.p(),
        });
    }
    if bg.is_empty() {
        return Ok(Vec::new());
    }
    search_cliques(bg, cfg.reporting, |r, v| cumulant_test(source, r, v, cfg))
}

type Candidate = (usize, Option<TestOutcome>);

struct Search<'a, F> {
    bg: &'a BidirectedGraph,
    reporting: Reporting,
    test: &'a mut F,
    found: BTreeMap<Vec<usize>, Vec<TestOutcome>>,
}

impl<F> Search<'_, F>
where
    F: FnMut(&[usize], usize) -> Result<TestOutcome>,
{
    fn run_test(&mut self, r: &[usize], v: usize) -> Result<Option<TestOutcome>> {
        if r.len() < 2 {
            return Ok(None);
        }
        (self.test)(r, v).map(Some)
    }

    fn report(&mut self, r: &[usize], trail: &[TestOutcome]) {
        if r.len() < 2 {
            return;
        }
        let mut key = r.to_vec();
        key.sort_unstable();
        self.found.entry(key).or_insert_with(|| trail.to_vec());
    }

    /// Keeps the members of `set` adjacent to `v`, and in hereditary mode
    /// only those passing the test against `r` (which already contains `v`).
    fn restrict(&mut self, r: &[usize], v: usize, set: &[Candidate]) -> Result<Vec<Candidate>> {
        let mut out = Vec::new();
        for (w, _) in set {
            if !self.bg.contains(v, *w) {
                continue;
            }
            match self.reporting {
                Reporting::Listing => out.push((*w, None)),
                Reporting::Hereditary => match self.run_test(r, *w)? {
                    Some(o) if !o.passed => {}
                    outcome => out.push((*w, outcome)),
                },
            }
        }
        Ok(out)
    }

    fn expand(
        &mut self,
        r: &mut Vec<usize>,
        trail: &mut Vec<TestOutcome>,
        mut p: Vec<Candidate>,
        mut q: Vec<Candidate>,
    ) -> Result<()> {
        if p.is_empty() && q.is_empty() {
            self.report(r, trail);
            return Ok(());
        }
        while !p.is_empty() {
            let (v, admitted) = p.remove(0);
            if self.bg.neighbors(v).is_empty() {
                continue;
            }
            let outcome = match self.reporting {
                Reporting::Hereditary => admitted,
                Reporting::Listing => self.run_test(r, v)?,
            };
            if outcome.as_ref().is_none_or(|o| o.passed) {
                r.push(v);
                let pushed = outcome.is_some();
                if let Some(o) = outcome {
                    trail.push(o);
                }
                let p_next = self.restrict(r, v, &p)?;
                let q_next = self.restrict(r, v, &q)?;
                self.expand(r, trail, p_next, q_next)?;
                if pushed {
                    trail.pop();
                }
                r.pop();
            }
            q.push((v, None));
        }
        Ok(())
    }
}
