use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BidirectedGraph, MixedGraph};
use crate::sim::{Dataset, EffectsMatrix, LsemSpec};

/// Directed structure, effect estimates and bidirected pairs handed to the
/// multidirected-edge search.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstStageResult {
    b_hat: EffectsMatrix,
    directed: BTreeSet<(usize, usize)>,
    bidirected: BidirectedGraph,
    labels: Option<Vec<String>>,
}

impl FirstStageResult {
    /// Validates dimensions, support of `b_hat`, acyclicity and bow-freeness.
    pub fn new(
        b_hat: EffectsMatrix,
        directed: BTreeSet<(usize, usize)>,
        bidirected: BidirectedGraph,
    ) -> Result<Self> {
        let r = Self::unchecked_bows(b_hat, directed, bidirected)?;
        if let Some(&(i, j)) = r.bows().first() {
            return Err(Error::Bow { parent: i + 1, child: j + 1 });
        }
        Ok(r)
    }

    /// Like [`FirstStageResult::new`] but tolerates bows; see [`Self::bows`].
    pub fn unchecked_bows(
        b_hat: EffectsMatrix,
        directed: BTreeSet<(usize, usize)>,
        bidirected: BidirectedGraph,
    ) -> Result<Self> {
        let p = b_hat.p();
        if bidirected.p() != p {
            return Err(Error::DimensionMismatch {
                context: "bidirected graph",
                expected: p,
                found: bidirected.p(),
            });
        }
        let graph = MixedGraph::new(p, directed.iter().copied(), [])?;
        if !graph.is_acyclic() {
            return Err(Error::Cyclic);
        }
        for (i, j, _) in b_hat.nonzero() {
            if !directed.contains(&(i, j)) {
                return Err(Error::Schema(format!(
                    "B[{}][{}] is nonzero but {} -> {} is not listed as directed",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        Ok(FirstStageResult {
            b_hat,
            directed,
            bidirected,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p() {
            return Err(Error::DimensionMismatch {
                context: "first-stage labels",
                expected: self.p(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.b_hat.p()
    }

    pub fn b_hat(&self) -> &EffectsMatrix {
        &self.b_hat
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn bidirected(&self) -> &BidirectedGraph {
        &self.bidirected
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Directed edges whose endpoints are also joined by a bidirected edge.
    pub fn bows(&self) -> Vec<(usize, usize)> {
        self.directed
            .iter()
            .copied()
            .filter(|&(i, j)| self.bidirected.contains(i, j))
            .collect()
    }

    /// Mixed graph with the bidirected pairs as 2-directed edges.
    pub fn graph(&self) -> MixedGraph {
        MixedGraph::new(
            self.p(),
            self.directed.iter().copied(),
            self.bidirected.pairs().into_iter().map(|(i, j)| vec![i, j]),
        )
        .expect("validated on construction")
    }

    pub fn to_json(&self) -> FirstStageJson {
        FirstStageJson {
            p: self.p(),
            directed: self.directed.iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            bidirected: self.bidirected.pairs().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            b: self.b_hat.clone(),
            labels: self.labels.clone(),
        }
    }

    /// Parses the JSON schema. In strict mode a bow is an error; otherwise
    /// it is reported in the returned warnings and the result is kept.
    pub fn from_json(raw: FirstStageJson, strict: bool) -> Result<(Self, Vec<String>)> {
        let p = raw.p;
        if raw.b.p() != p {
            return Err(Error::DimensionMismatch {
                context: "first-stage B",
                expected: p,
                found: raw.b.p(),
            });
        }
        let dec = |v: usize| {
            if v == 0 || v > p {
                Err(Error::VertexOutOfRange { vertex: v, p })
            } else {
                Ok(v - 1)
            }
        };
        let directed = raw
            .directed
            .iter()
            .map(|&[i, j]| Ok((dec(i)?, dec(j)?)))
            .collect::<Result<BTreeSet<_>>>()?;
        let pairs = raw
            .bidirected
            .iter()
            .map(|&[i, j]| Ok((dec(i)?, dec(j)?)))
            .collect::<Result<Vec<_>>>()?;
        let bg = BidirectedGraph::new(p, pairs)?;
        let mut result = Self::unchecked_bows(raw.b, directed, bg)?;
        if let Some(labels) = raw.labels {
            result = result.with_labels(labels)?;
        }
        let mut warnings = Vec::new();
        for (i, j) in result.bows() {
            if strict {
                return Err(Error::Bow { parent: i + 1, child: j + 1 });
            }
            warnings.push(format!(
                "bow between {} and {}: directed and bidirected edge both present",
                i + 1,
                j + 1
            ));
        }
        Ok((result, warnings))
    }
}

/// `{"p": p, "directed": [[i,j],...], "bidirected": [[i,j],...], "B": [[...],...]}`
/// with 1-based vertices and optional `"labels"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FirstStageJson {
    pub p: usize,
    #[serde(default)]
    pub directed: Vec<[usize; 2]>,
    #[serde(default)]
    pub bidirected: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    pub b: EffectsMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// True effects and the bidirected subdivision of the true multidirected
/// edges. With `perturbation > 0` every nonzero effect gets independent
/// uniform noise in `[-perturbation, perturbation]`.
pub fn oracle_first_stage(spec: &LsemSpec, perturbation: f64, seed: u64) -> Result<FirstStageResult> {
    if !(perturbation.is_finite() && perturbation >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "perturbation must be finite and >= 0, got {perturbation}"
        )));
    }
    let mut b_hat = spec.effects().clone();
    if perturbation > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, j, b) in spec.effects().nonzero().collect::<Vec<_>>() {
            b_hat.set(i, j, b + rng.random_range(-perturbation..=perturbation));
        }
    }
    FirstStageResult::new(
        b_hat,
        spec.graph().directed().clone(),
        spec.graph().bidirected_subdivision(),
    )
}

/// Reads and validates a first-stage file.
pub fn load_external_first_stage(path: &Path, strict: bool) -> Result<(FirstStageResult, Vec<String>)> {
    let ctx = || format!("first-stage file {}", path.display());
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(ctx()))?;
    let raw: FirstStageJson = serde_json::from_str(&text).map_err(|e| Error::from(e).context(ctx()))?;
    FirstStageResult::from_json(raw, strict).map_err(|e| e.context(ctx()))
}

/// Anything that produces directed structure, effects and bidirected pairs
/// for a dataset.
pub trait FirstStage<T> {
    fn estimate(&self, data: &Dataset<T>) -> Result<FirstStageResult>;
}

impl<T> FirstStage<T> for FirstStageResult {
    fn estimate(&self, _data: &Dataset<T>) -> Result<FirstStageResult> {
        Ok(self.clone())
    }
}

/// Ground truth from a known model.
#[derive(Clone, Debug)]
pub struct OracleStage {
    pub spec: LsemSpec,
    pub perturbation: f64,
    pub seed: u64,
}

impl OracleStage {
    pub fn new(spec: LsemSpec) -> Self {
        OracleStage {
            spec,
            perturbation: 0.0,
            seed: 0,
        }
    }
}

impl<T> FirstStage<T> for OracleStage {
    fn estimate(&self, _data: &Dataset<T>) -> Result<FirstStageResult> {
        oracle_first_stage(&self.spec, self.perturbation, self.seed)
    }
}

/// Precomputed output of an external procedure, read from disk on demand.
#[derive(Clone, Debug)]
pub struct ExternalStage {
    pub path: PathBuf,
    pub strict: bool,
}

impl<T> FirstStage<T> for ExternalStage {
    fn estimate(&self, _data: &Dataset<T>) -> Result<FirstStageResult> {
        load_external_first_stage(&self.path, self.strict).map(|(r, _)| r)
    }
}
