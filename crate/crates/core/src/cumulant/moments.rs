use std::cell::RefCell;
use std::collections::HashMap;

use crate::cumulant::partitions::set_partitions;
use crate::cumulant::{CumulantSource, MAX_ORDER};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::Dataset;

/// Anything that can answer `E[prod_j Z_{idx_j}]` for a sorted multi-index.
pub trait MomentSource<T> {
    fn moment(&self, idx: &[usize]) -> Result<T>;
}

/// Precomputed moments keyed by sorted multi-index.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<T> {
    entries: HashMap<Vec<usize>, T>,
}

impl<T: Scalar> Default for MomentTable<T> {
    fn default() -> Self {
        MomentTable {
            entries: HashMap::new(),
        }
    }
}

impl<T: Scalar> MomentTable<T> {
    pub fn insert(&mut self, mut idx: Vec<usize>, value: T) {
        idx.sort_unstable();
        self.entries.insert(idx, value);
    }

    pub fn get(&self, idx: &[usize]) -> Option<&T> {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.entries.get(&key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<T: Scalar> MomentSource<T> for MomentTable<T> {
    fn moment(&self, idx: &[usize]) -> Result<T> {
        self.get(idx)
            .cloned()
            .ok_or_else(|| Error::MissingMoment(idx.iter().map(|v| v + 1).collect()))
    }
}

/// Nondecreasing multi-indices of length `k` over `0..p`, lexicographic.
pub fn multi_indices(p: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(p: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..p {
            cur.push(v);
            rec(p, k, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Mean over samples of the product of the indexed rows.
pub(crate) fn empirical_moment<T: Scalar>(data: &Dataset<T>, idx: &[usize]) -> T {
    let rows: Vec<&[T]> = idx.iter().map(|&i| data.row(i)).collect();
    let mut sum = T::zero();
    for s in 0..data.n() {
        let prod = rows[1..]
            .iter()
            .fold(rows[0][s].clone(), |acc, r| acc * r[s].clone());
        sum = sum + prod;
    }
    sum / T::from_int(data.n() as i64)
}

/// Plug-in moments of every sorted multi-index of order `1..=k_max`.
pub fn sample_moments<T: Scalar>(data: &Dataset<T>, k_max: usize) -> Result<MomentTable<T>> {
    if data.n() == 0 || data.p() == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(1..=MAX_ORDER).contains(&k_max) {
        return Err(Error::UnsupportedOrder { order: k_max, max: MAX_ORDER });
    }
    let mut table = MomentTable::default();
    for k in 1..=k_max {
        for idx in multi_indices(data.p(), k) {
            let m = empirical_moment(data, &idx);
            table.entries.insert(idx, m);
        }
    }
    Ok(table)
}

fn check_order(idx: &[usize]) -> Result<()> {
    if idx.is_empty() || idx.len() > MAX_ORDER {
        return Err(Error::UnsupportedOrder { order: idx.len(), max: MAX_ORDER });
    }
    Ok(())
}

fn partition_sum<T, M>(m: &M, idx: &[usize], skip_singletons: bool) -> Result<T>
where
    T: Scalar,
    M: MomentSource<T> + ?Sized,
{
    check_order(idx)?;
    let mut total = T::zero();
    let mut block_idx = Vec::with_capacity(idx.len());
    for partition in set_partitions(idx.len())? {
        if skip_singletons && partition.iter().any(|b| b.len() == 1) {
            continue;
        }
        let blocks = partition.len() as i64;
        let coefficient = (1..blocks).product::<i64>() * if blocks % 2 == 0 { -1 } else { 1 };
        let mut term = T::from_int(coefficient);
        for block in partition {
            block_idx.clear();
            block_idx.extend(block.iter().map(|&pos| idx[pos]));
            block_idx.sort_unstable();
            term = term * m.moment(&block_idx)?;
        }
        total = total + term;
    }
    Ok(total)
}

/// `sum over partitions (A_1..A_L) of (-1)^(L-1) (L-1)! prod_l E[prod_{j in A_l} Z_j]`.
pub fn cumulant_from_moments<T, M>(m: &M, idx: &[usize]) -> Result<T>
where
    T: Scalar,
    M: MomentSource<T> + ?Sized,
{
    partition_sum(m, idx, false)
}

/// The same sum restricted to partitions without singleton blocks; equal to
/// [`cumulant_from_moments`] when every mean is zero.
pub fn cumulant_from_moments_zero_mean<T, M>(m: &M, idx: &[usize]) -> Result<T>
where
    T: Scalar,
    M: MomentSource<T> + ?Sized,
{
    partition_sum(m, idx, true)
}

/// Lazily evaluated, memoized sample cumulants of a dataset. Rows are
/// centered once on construction; only the entries a caller asks for are
/// ever computed.
pub struct SampleCumulants<T> {
    data: Dataset<T>,
    moments: RefCell<HashMap<Vec<usize>, T>>,
    cumulants: RefCell<HashMap<Vec<usize>, T>>,
}

impl<T: Scalar> SampleCumulants<T> {
    pub fn new(data: &Dataset<T>) -> Self {
        SampleCumulants {
            data: data.centered(),
            moments: RefCell::default(),
            cumulants: RefCell::default(),
        }
    }

    pub fn data(&self) -> &Dataset<T> {
        &self.data
    }
}

impl<T: Scalar> MomentSource<T> for SampleCumulants<T> {
    fn moment(&self, idx: &[usize]) -> Result<T> {
        if let Some(v) = self.moments.borrow().get(idx) {
            return Ok(v.clone());
        }
        if let Some(&bad) = idx.iter().find(|&&i| i >= self.data.p()) {
            return Err(Error::VertexOutOfRange { vertex: bad + 1, p: self.data.p() });
        }
        let v = empirical_moment(&self.data, idx);
        self.moments.borrow_mut().insert(idx.to_vec(), v.clone());
        Ok(v)
    }
}

impl<T: Scalar> CumulantSource<T> for SampleCumulants<T> {
    fn p(&self) -> usize {
        self.data.p()
    }

    fn cumulant(&self, idx: &[usize]) -> Result<T> {
        let mut key = idx.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cumulants.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = cumulant_from_moments(self, &key)?;
        self.cumulants.borrow_mut().insert(key, v.clone());
        Ok(v)
    }
}
