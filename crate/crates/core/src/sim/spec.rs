use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MixedGraph;
use crate::sim::noise::NoiseLaw;

pub const EFFECTS_CONVENTION: &str =
    "B[i][j] is the direct effect of vertex i on vertex j (row = cause); Y = (I - B^T)^-1 eps";

/// Square matrix of direct effects, `get(i, j)` = effect of `i` on `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EffectsMatrix {
    p: usize,
    values: Vec<f64>,
}

impl EffectsMatrix {
    pub fn zeros(p: usize) -> Self {
        EffectsMatrix {
            p,
            values: vec![0.0; p * p],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let p = rows.len();
        let mut values = Vec::with_capacity(p * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "effects matrix row",
                    expected: p,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite effect".into()));
            }
            values.extend(row);
        }
        Ok(EffectsMatrix { p, values })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[from * self.p + to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.values[from * self.p + to] = value;
    }

    /// Nonzero entries `(from, to, value)` in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(move |(k, &v)| (k / self.p, k % self.p, v))
    }

    /// For each target `j`, the nonzero `(from, value)` pairs in ascending
    /// `from` order. Simulation and dedirection both sum in this order.
    pub fn incoming(&self) -> Vec<Vec<(usize, f64)>> {
        let mut inc = vec![Vec::new(); self.p];
        for (i, j, v) in self.nonzero() {
            inc[j].push((i, v));
        }
        inc
    }

    pub fn max_abs_diff(&self, other: &EffectsMatrix) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.p.max(1)).map(<[f64]>::to_vec).take(self.p).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for EffectsMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        EffectsMatrix::from_rows(rows)
    }
}

impl From<EffectsMatrix> for Vec<Vec<f64>> {
    fn from(m: EffectsMatrix) -> Self {
        m.to_rows()
    }
}

/// One latent parent of a multidirected edge. `members` are 0-based,
/// ascending, with `loadings` aligned to them.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenSource {
    pub members: Vec<usize>,
    pub loadings: Vec<f64>,
    pub noise: NoiseLaw,
}

/// A linear SEM on a bow-free acyclic mixed graph: `Y = B^T Y + eps`, with
/// `eps_i` = own noise + sum of loading * hidden source over the hidden
/// sources that touch `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecJson", into = "SpecJson")]
pub struct LsemSpec {
    graph: MixedGraph,
    effects: EffectsMatrix,
    noise: Vec<NoiseLaw>,
    hidden: Vec<HiddenSource>,
    seed: Option<u64>,
}

impl LsemSpec {
    pub fn new<D>(
        p: usize,
        directed: D,
        effects: EffectsMatrix,
        noise: Vec<NoiseLaw>,
        hidden: Vec<HiddenSource>,
    ) -> Result<Self>
    where
        D: IntoIterator<Item = (usize, usize)>,
    {
        if effects.p() != p {
            return Err(Error::DimensionMismatch {
                context: "effects matrix",
                expected: p,
                found: effects.p(),
            });
        }
        if noise.len() != p {
            return Err(Error::DimensionMismatch {
                context: "observed noise laws",
                expected: p,
                found: noise.len(),
            });
        }
        let mut hidden_sorted = Vec::with_capacity(hidden.len());
        for h in hidden {
            if h.members.len() != h.loadings.len() {
                return Err(Error::DimensionMismatch {
                    context: "hidden loadings",
                    expected: h.members.len(),
                    found: h.loadings.len(),
                });
            }
            if h.loadings.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("non-finite loading".into()));
            }
            h.noise.validate()?;
            let mut pairs: Vec<(usize, f64)> =
                h.members.iter().copied().zip(h.loadings.iter().copied()).collect();
            pairs.sort_by_key(|&(v, _)| v);
            if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::DegenerateEdge(h.members.iter().map(|v| v + 1).collect()));
            }
            hidden_sorted.push(HiddenSource {
                members: pairs.iter().map(|&(v, _)| v).collect(),
                loadings: pairs.iter().map(|&(_, l)| l).collect(),
                noise: h.noise,
            });
        }
        for law in &noise {
            law.validate()?;
        }
        let graph = MixedGraph::new(p, directed, hidden_sorted.iter().map(|h| h.members.clone()))?;
        for (i, j, _) in effects.nonzero() {
            if !graph.has_directed(i, j) {
                return Err(Error::Schema(format!(
                    "B[{}][{}] is nonzero but {} -> {} is not an edge",
                    i + 1,
                    j + 1,
                    i + 1,
                    j + 1
                )));
            }
        }
        if !graph.is_acyclic() {
            return Err(Error::Cyclic);
        }
        if let Some((i, j)) = graph.find_bow() {
            return Err(Error::Bow { parent: i + 1, child: j + 1 });
        }
        Ok(LsemSpec {
            graph,
            effects,
            noise,
            hidden: hidden_sorted,
            seed: None,
        })
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn effects(&self) -> &EffectsMatrix {
        &self.effects
    }

    pub fn noise(&self) -> &[NoiseLaw] {
        &self.noise
    }

    pub fn hidden(&self) -> &[HiddenSource] {
        &self.hidden
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// All independent sources: observed noises first, then hidden ones.
    pub fn source_laws(&self) -> impl Iterator<Item = &NoiseLaw> {
        self.noise.iter().chain(self.hidden.iter().map(|h| &h.noise))
    }
}

#[derive(Serialize, Deserialize)]
struct HiddenJson {
    members: Vec<usize>,
    loadings: Vec<f64>,
    noise: NoiseLaw,
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    #[serde(default)]
    convention: Option<String>,
    p: usize,
    #[serde(default)]
    directed: Vec<[usize; 2]>,
    #[serde(rename = "B")]
    effects: EffectsMatrix,
    noise: Vec<NoiseLaw>,
    #[serde(default)]
    hidden: Vec<HiddenJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl TryFrom<SpecJson> for LsemSpec {
    type Error = Error;

    fn try_from(raw: SpecJson) -> Result<Self> {
        let p = raw.p;
        let dec = |v: usize| v.checked_sub(1).ok_or(Error::VertexOutOfRange { vertex: v, p });
        let directed = raw
            .directed
            .iter()
            .map(|&[i, j]| Ok((dec(i)?, dec(j)?)))
            .collect::<Result<Vec<_>>>()?;
        let hidden = raw
            .hidden
            .into_iter()
            .map(|h| {
                Ok(HiddenSource {
                    members: h.members.into_iter().map(dec).collect::<Result<_>>()?,
                    loadings: h.loadings,
                    noise: h.noise,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LsemSpec::new(p, directed, raw.effects, raw.noise, hidden)?.with_seed(raw.seed))
    }
}

impl From<LsemSpec> for SpecJson {
    fn from(s: LsemSpec) -> Self {
        SpecJson {
            convention: Some(EFFECTS_CONVENTION.to_string()),
            p: s.p(),
            directed: s.graph.directed().iter().map(|&(i, j)| [i + 1, j + 1]).collect(),
            effects: s.effects,
            noise: s.noise,
            hidden: s
                .hidden
                .into_iter()
                .map(|h| HiddenJson {
                    members: h.members.iter().map(|v| v + 1).collect(),
                    loadings: h.loadings,
                    noise: h.noise,
                })
                .collect(),
            seed: s.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_chain() -> LsemSpec {
        let mut b = EffectsMatrix::zeros(3);
        b.set(0, 1, 0.8);
        LsemSpec::new(
            3,
            [(0, 1)],
            b,
            vec![NoiseLaw::UNIFORM_10; 3],
            vec![HiddenSource {
                members: vec![2, 1],
                loadings: vec![0.5, -0.7],
                noise: NoiseLaw::GAMMA_2_4,
            }],
        )
        .unwrap()
    }

    #[test]
    fn members_sorted_with_loadings() {
        let s = two_chain();
        assert_eq!(s.hidden()[0].members, vec![1, 2]);
        assert_eq!(s.hidden()[0].loadings, vec![-0.7, 0.5]);
    }

    #[test]
    fn json_round_trip_states_convention() {
        let s = two_chain();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("row = cause"));
        assert!(text.contains(r#""law":"gamma""#));
        let back: LsemSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut b = EffectsMatrix::zeros(2);
        b.set(1, 0, 0.5);
        let off_support = LsemSpec::new(2, [(0, 1)], b, vec![NoiseLaw::UNIFORM_10; 2], vec![]);
        assert!(matches!(off_support, Err(Error::Schema(_))));

        let cyclic = LsemSpec::new(
            2,
            [(0, 1), (1, 0)],
            EffectsMatrix::zeros(2),
            vec![NoiseLaw::UNIFORM_10; 2],
            vec![],
        );
        assert!(matches!(cyclic, Err(Error::Cyclic)));

        let bow = LsemSpec::new(
            2,
            [(0, 1)],
            EffectsMatrix::zeros(2),
            vec![NoiseLaw::UNIFORM_10; 2],
            vec![HiddenSource {
                members: vec![0, 1],
                loadings: vec![1.0, 1.0],
                noise: NoiseLaw::UNIFORM_10,
            }],
        );
        assert!(matches!(bow, Err(Error::Bow { parent: 1, child: 2 })));

        let bad_law = LsemSpec::new(
            1,
            [],
            EffectsMatrix::zeros(1),
            vec![NoiseLaw::Gamma { shape: 0.0, rate: 1.0 }],
            vec![],
        );
        assert!(matches!(bad_law, Err(Error::InvalidParameter(_))));
    }
}
