use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// A `p x n` observation matrix: one row per variable, one column per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    p: usize,
    n: usize,
    /// Row-major, `values[i * n + s]`.
    values: Vec<T>,
    labels: Vec<String>,
}

pub fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|v| v.to_string()).collect()
}

impl<T: Scalar> Dataset<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let p = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if p == 0 || n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut values = Vec::with_capacity(p * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "dataset row length",
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Ok(Dataset {
            p,
            n,
            values,
            labels: default_labels(p),
        })
    }

    /// Zero-initialized matrix; used by simulation and transforms.
    pub(crate) fn zeros(p: usize, n: usize) -> Self {
        Dataset {
            p,
            n,
            values: vec![T::zero(); p * n],
            labels: default_labels(p),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.p {
            return Err(Error::DimensionMismatch {
                context: "dataset labels",
                expected: self.p,
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn get(&self, i: usize, s: usize) -> &T {
        &self.values[i * self.n + s]
    }

    pub(crate) fn set(&mut self, i: usize, s: usize, v: T) {
        self.values[i * self.n + s] = v;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.n)
    }

    pub fn row_means(&self) -> Vec<T> {
        let n = T::from_int(self.n as i64);
        self.rows()
            .map(|r| r.iter().cloned().fold(T::zero(), |a, b| a + b) / n.clone())
            .collect()
    }

    /// Subtracts each row's empirical mean.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        for (i, mean) in self.row_means().into_iter().enumerate() {
            for x in out.row_mut(i) {
                *x = x.clone() - mean.clone();
            }
        }
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Dataset<U> {
        Dataset {
            p: self.p,
            n: self.n,
            values: self.values.iter().map(f).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Keeps only the first `n` samples.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n {
            return Err(Error::DimensionMismatch {
                context: "truncation length",
                expected: self.n,
                found: n,
            });
        }
        let rows = self.rows().map(|r| r[..n].to_vec()).collect();
        Dataset::from_rows(rows)?.with_labels(self.labels.clone())
    }
}

impl<T: Real> Dataset<T> {
    pub fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows().enumerate() {
            if let Some(col) = row.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: i + 1, col: col + 1 });
            }
        }
        Ok(())
    }

    /// Population standard deviation (divisor `n`) of every row.
    pub fn row_std(&self) -> Vec<T> {
        let n = T::from_int(self.n as i64);
        self.rows()
            .zip(self.row_means())
            .map(|(r, m)| {
                let ss = r.iter().fold(T::zero(), |a, &x| a + (x - m) * (x - m));
                (ss / n).sqrt()
            })
            .collect()
    }
}

/// Divides each row by its empirical standard deviation.
pub fn standardize_rows<T: Real>(x: &Dataset<T>) -> Result<Dataset<T>> {
    let sds = x.row_std();
    let mut out = x.clone();
    for (i, sd) in sds.into_iter().enumerate() {
        if sd.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) || !sd.is_finite() {
            return Err(Error::ZeroVariance(i + 1));
        }
        for v in out.row_mut(i) {
            *v = *v / sd;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardize_examples() {
        let d = Dataset::from_rows(vec![vec![-1.0, 1.0], vec![-2.0, 2.0]]).unwrap();
        let s = standardize_rows(&d).unwrap();
        assert_eq!(s.row(0), &[-1.0, 1.0]);
        assert_eq!(s.row(1), &[-1.0, 1.0]);
        let again = standardize_rows(&s).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn standardize_rejects_constant_rows() {
        let d = Dataset::from_rows(vec![vec![1.0, 2.0], vec![3.0, 3.0]]).unwrap();
        assert!(matches!(standardize_rows(&d), Err(Error::ZeroVariance(2))));
    }

    #[test]
    fn ragged_and_empty() {
        assert!(matches!(
            Dataset::<f64>::from_rows(vec![]),
            Err(Error::EmptyDataset)
        ));
        assert!(Dataset::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn centering() {
        let d = Dataset::from_rows(vec![vec![1.0, 2.0, 6.0]]).unwrap();
        assert_eq!(d.centered().row(0), &[-2.0, -1.0, 3.0]);
    }

    use proptest::prelude::*;

    proptest! {
        #[test]
        fn standardized_rows_have_unit_sd(
            rows in proptest::collection::vec(
                proptest::collection::vec(-100.0f64..100.0, 20), 1..5)
        ) {
            let d = Dataset::from_rows(rows).unwrap();
            prop_assume!(d.row_std().iter().all(|&s| s > 1e-6));
            let s = standardize_rows(&d).unwrap();
            for sd in s.row_std() {
                prop_assert!((sd - 1.0).abs() < 1e-9);
            }
            let twice = standardize_rows(&s).unwrap();
            for (a, b) in twice.rows().zip(s.rows()) {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
