use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::cumulant::tensor::CumulantTensor;
use crate::cumulant::{CumulantSource, MAX_ORDER};
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::sim::{EffectsMatrix, LsemSpec, NoiseLaw};

/// Exact cumulants of an LSEM by multilinearity.
///
/// The model is written as `Y = M s` with `s` the vector of independent
/// sources (one own noise per observed vertex, then one per hidden source).
/// Then `C_{i_1..i_k} = sum_s kappa_k(s) prod_l M[i_l][s]`.
pub struct PopulationCumulants<T> {
    /// `mixing[i][s]`: total effect of source `s` on observed vertex `i`.
    mixing: Vec<Vec<T>>,
    laws: Vec<NoiseLaw>,
    kappa: RefCell<BTreeMap<usize, Vec<T>>>,
}

impl<T: Scalar> PopulationCumulants<T> {
    /// Cumulants of the observed vector `Y`.
    pub fn new(spec: &LsemSpec) -> Result<Self> {
        let p = spec.p();
        let n_sources = p + spec.hidden().len();
        let order = spec.graph().topological_order().ok_or(Error::Cyclic)?;
        let incoming = spec.effects().incoming();

        let mut direct = vec![vec![T::zero(); n_sources]; p];
        for (i, row) in direct.iter_mut().enumerate() {
            row[i] = T::one();
        }
        for (k, h) in spec.hidden().iter().enumerate() {
            for (&v, &l) in h.members.iter().zip(&h.loadings) {
                direct[v][p + k] = direct[v][p + k].clone() + T::from_param(l);
            }
        }
        let mut mixing = direct;
        for &j in &order {
            for &(i, b) in &incoming[j] {
                let b = T::from_param(b);
                let parent = mixing[i].clone();
                for (m, a) in mixing[j].iter_mut().zip(parent) {
                    *m = m.clone() + b.clone() * a;
                }
            }
        }
        Ok(PopulationCumulants {
            mixing,
            laws: spec.source_laws().copied().collect(),
            kappa: RefCell::default(),
        })
    }

    /// Cumulants of `X = Y - B_hat^T Y`, the data after removing the given
    /// direct effects. With the true effects only hidden-source mixing remains.
    pub fn dedirected(spec: &LsemSpec, b_hat: &EffectsMatrix) -> Result<Self> {
        if b_hat.p() != spec.p() {
            return Err(Error::DimensionMismatch {
                context: "estimated effects",
                expected: spec.p(),
                found: b_hat.p(),
            });
        }
        let y = Self::new(spec)?;
        let incoming = b_hat.incoming();
        let mut mixing = y.mixing.clone();
        for (j, inc) in incoming.iter().enumerate() {
            for &(i, b) in inc {
                let b = T::from_param(b);
                for (m, a) in mixing[j].iter_mut().zip(&y.mixing[i]) {
                    *m = m.clone() - b.clone() * a.clone();
                }
            }
        }
        Ok(PopulationCumulants {
            mixing,
            laws: y.laws,
            kappa: RefCell::default(),
        })
    }

    pub fn mixing(&self) -> &[Vec<T>] {
        &self.mixing
    }

    fn source_cumulants(&self, k: usize) -> Result<Vec<T>> {
        if let Some(v) = self.kappa.borrow().get(&k) {
            return Ok(v.clone());
        }
        let v: Vec<T> = self.laws.iter().map(|l| l.cumulant::<T>(k)).collect::<Result<_>>()?;
        self.kappa.borrow_mut().insert(k, v.clone());
        Ok(v)
    }
}

impl<T: Real> PopulationCumulants<T> {
    /// Rescales every coordinate to unit variance, the population analogue
    /// of standardizing data rows.
    pub fn standardized(mut self) -> Result<Self> {
        for i in 0..self.mixing.len() {
            let var = self.cumulant(&[i, i])?;
            if var.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::ZeroVariance(i + 1));
            }
            let sd = var.sqrt();
            for m in &mut self.mixing[i] {
                *m = *m / sd;
            }
        }
        Ok(self)
    }
}

impl<T: Scalar> CumulantSource<T> for PopulationCumulants<T> {
    fn p(&self) -> usize {
        self.mixing.len()
    }

    fn cumulant(&self, idx: &[usize]) -> Result<T> {
        if idx.is_empty() || idx.len() > MAX_ORDER {
            return Err(Error::UnsupportedOrder { order: idx.len(), max: MAX_ORDER });
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.p()) {
            return Err(Error::VertexOutOfRange { vertex: bad + 1, p: self.p() });
        }
        let kappa = self.source_cumulants(idx.len())?;
        let mut total = T::zero();
        for (s, ks) in kappa.iter().enumerate() {
            if ks.is_zero() {
                continue;
            }
            let prod = idx
                .iter()
                .fold(ks.clone(), |acc, &i| acc * self.mixing[i][s].clone());
            total = total + prod;
        }
        Ok(total)
    }
}

/// Full population cumulant tensor of order `k` for the observed vector.
pub fn population_cumulant_tensor<T: Scalar>(spec: &LsemSpec, k: usize) -> Result<CumulantTensor<T>> {
    CumulantTensor::from_source(&PopulationCumulants::<T>::new(spec)?, k)
}
