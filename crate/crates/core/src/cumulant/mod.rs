//! Cumulant tensors: the partition-sum estimator on plug-in moments and an
//! exact population oracle for LSEMs.

mod moments;
mod partitions;
mod population;
mod tensor;

pub use moments::{
    cumulant_from_moments, cumulant_from_moments_zero_mean, multi_indices, sample_moments,
    MomentSource, MomentTable, SampleCumulants,
};
pub use partitions::{set_partitions, Partition};
pub use population::{population_cumulant_tensor, PopulationCumulants};
pub use tensor::{sample_cumulant_tensor, CumulantTensor, TensorEntry, TensorJson};

use crate::error::Result;

/// Highest cumulant order supported anywhere in the crate.
pub const MAX_ORDER: usize = 8;

/// Random-access cumulant entries of a `p`-dimensional vector. Indices may
/// come in any order and may repeat.
pub trait CumulantSource<T> {
    fn p(&self) -> usize;

    fn cumulant(&self, idx: &[usize]) -> Result<T>;
}

impl<T, C: CumulantSource<T> + ?Sized> CumulantSource<T> for &C {
    fn p(&self) -> usize {
        (**self).p()
    }

    fn cumulant(&self, idx: &[usize]) -> Result<T> {
        (**self).cumulant(idx)
    }
}
