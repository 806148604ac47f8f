//! Numeric traits the algebra is written against.
//!
//! [`Scalar`] covers everything that only needs ring operations plus exact
//! conversion from `f64` parameters: moment products, partition sums, total
//! effect propagation and the population cumulant oracle. It is implemented
//! for `f32`, `f64` and [`BigRational`], the latter giving exact zero tests.
//!
//! [`Real`] adds `Float` for code that needs square roots or NaN checks
//! (row standardization, sample statistics).

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Exact or nearest representation of an `f64` parameter.
    fn from_param(x: f64) -> Self;

    fn from_int(x: i64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn from_param(x: f64) -> Self {
        x
    }

    fn from_int(x: i64) -> Self {
        x as f64
    }
}

impl Scalar for f32 {
    fn from_param(x: f64) -> Self {
        x as f32
    }

    fn from_int(x: i64) -> Self {
        x as f32
    }
}

impl Scalar for BigRational {
    /// Panics on non-finite input; every caller validates parameters first.
    fn from_param(x: f64) -> Self {
        BigRational::from_float(x).expect("finite parameter")
    }

    fn from_int(x: i64) -> Self {
        BigRational::from_integer(BigInt::from(x))
    }
}

pub trait Real: Scalar + Float + Copy {}

impl Real for f64 {}
impl Real for f32 {}
