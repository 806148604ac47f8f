use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cumulant::moments::{multi_indices, SampleCumulants};
use crate::cumulant::{CumulantSource, MAX_ORDER};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::Dataset;

/// Symmetric order-`k` tensor stored once per sorted multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantTensor<T> {
    order: usize,
    p: usize,
    entries: BTreeMap<Vec<usize>, T>,
}

fn check_tensor_order(k: usize) -> Result<()> {
    if !(2..=MAX_ORDER).contains(&k) {
        return Err(Error::UnsupportedOrder { order: k, max: MAX_ORDER });
    }
    Ok(())
}

impl<T: Scalar> CumulantTensor<T> {
    /// Every sorted multi-index of order `k` evaluated through `source`.
    pub fn from_source<C: CumulantSource<T> + ?Sized>(source: &C, k: usize) -> Result<Self> {
        check_tensor_order(k)?;
        Self::from_indices(source, k, multi_indices(source.p(), k))
    }

    /// Only the listed indices (any order within each index).
    pub fn from_indices<C, I>(source: &C, k: usize, indices: I) -> Result<Self>
    where
        C: CumulantSource<T> + ?Sized,
        I: IntoIterator<Item = Vec<usize>>,
    {
        check_tensor_order(k)?;
        let mut entries = BTreeMap::new();
        for mut idx in indices {
            if idx.len() != k {
                return Err(Error::DimensionMismatch {
                    context: "tensor index length",
                    expected: k,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= source.p()) {
                return Err(Error::VertexOutOfRange { vertex: bad + 1, p: source.p() });
            }
            idx.sort_unstable();
            let v = source.cumulant(&idx)?;
            entries.insert(idx, v);
        }
        Ok(CumulantTensor {
            order: k,
            p: source.p(),
            entries,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Entry at any permutation of a stored index.
    pub fn get(&self, idx: &[usize]) -> Option<&T> {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &T)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> TensorJson {
        TensorJson {
            order: self.order,
            p: self.p,
            entries: self
                .entries
                .iter()
                .map(|(idx, v)| TensorEntry {
                    idx: idx.iter().map(|i| i + 1).collect(),
                    value: v.to_f64_lossy(),
                })
                .collect(),
        }
    }
}

/// Plug-in sample cumulant tensor of order `k` (rows are centered first).
pub fn sample_cumulant_tensor<T: Scalar>(data: &Dataset<T>, k: usize) -> Result<CumulantTensor<T>> {
    check_tensor_order(k)?;
    CumulantTensor::from_source(&SampleCumulants::new(data), k)
}

/// `{"order": k, "p": p, "entries": [{"idx": [...], "value": x}, ...]}`
/// with 1-based, sorted indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub order: usize,
    pub p: usize,
    pub entries: Vec<TensorEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub idx: Vec<usize>,
    pub value: f64,
}
