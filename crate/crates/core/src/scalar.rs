//! Scalar abstraction shared by the discrete engine.
//!
//! Probabilities, disclosure degrees and currency values all flow through the
//! same matrix pipeline, so the pipeline is written once against [`Scalar`]
//! and instantiated for `f32`, `f64` and exact big rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Exact rational scalar. Decimal inputs are recovered from their `f64`
/// encoding by continued fractions, so `0.6` becomes `3/5`.
pub type Exact = BigRational;

pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Signed + Send + Sync + 'static
{
    /// Converts a decimal literal. For exact types this recovers the shortest
    /// rational whose `f64` rounding equals `v`.
    fn from_decimal(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite_value(&self) -> bool;

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn in_unit_interval(&self) -> bool {
        *self >= Self::zero() && *self <= Self::one()
    }
}

impl Scalar for f64 {
    fn from_decimal(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for f32 {
    fn from_decimal(v: f64) -> Self {
        v as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    fn from_decimal(v: f64) -> Self {
        if v.is_zero() {
            return Self::zero();
        }
        match Ratio::<i64>::approximate_float(v) {
            Some(r) if r.to_f64() == Some(v) => {
                BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
            }
            // Values outside the i64 continued-fraction range keep their binary expansion.
            _ => BigRational::from_float(v).expect("finite decimal"),
        }
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite_value(&self) -> bool {
        true
    }
}

/// `sum(values)` without requiring `std::iter::Sum` on the scalar.
pub fn sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    values.into_iter().fold(T::zero(), |acc, v| acc + v)
}
