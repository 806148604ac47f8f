//! Recovery of acyclic mixed graphs with multidirected edges from
//! non-Gaussian linear structural equation model data.
//!
//! The numeric core is generic over [`Scalar`]: `f64` for data, `f32` where
//! memory matters, and [`Rational`] for exact population cumulants and
//! bit-exact dedirection checks.

pub mod bench;
pub mod cumulant;
pub mod discovery;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod scalar;
pub mod sim;

pub use cumulant::{CumulantSource, CumulantTensor, PopulationCumulants, SampleCumulants, MAX_ORDER};
pub use discovery::{
    run_mbang, run_mbang_population, DiscoveryConfig, FirstStage, FirstStageResult, MbangResult,
};
pub use error::{Error, Result};
pub use graph::{BidirectedGraph, MixedGraph, TrekWitness, VertexTuple};
pub use scalar::{Real, Scalar};
pub use sim::{Dataset, EffectsMatrix, LsemSpec, NoiseLaw};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type DatasetExact = Dataset<Rational>;

pub type SampleCumulants64 = SampleCumulants<f64>;
pub type PopulationCumulants64 = PopulationCumulants<f64>;
pub type PopulationCumulantsExact = PopulationCumulants<Rational>;
