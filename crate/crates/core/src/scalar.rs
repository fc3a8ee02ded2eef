//! Scalar abstraction for coordinates and filter values.
//!
//! The geometric pipeline is generic over the scalar: the default path runs
//! on [`Exact`] (64-bit rationals) so that equal filter values compare equal
//! and window boundaries in the vectorization are decided without rounding.
//! `f64` works everywhere too, and plain integers are enough for the
//! combinatorial parts (reduction, vectorization), which never divide.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Requirements on coordinate / filter-value scalars.
///
/// `PartialOrd` rather than `Ord` so `f64` qualifies; filter values are
/// built from finite coordinates and are never NaN.
pub trait Scalar:
    Num + Signed + PartialOrd + Clone + Debug + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    fn from_index(i: usize) -> Self {
        Self::from_usize(i).expect("index representable in scalar")
    }
}

impl<T> Scalar for T where
    T: Num
        + Signed
        + PartialOrd
        + Clone
        + Debug
        + ToPrimitive
        + FromPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Exact rational scalar used by the default pipeline.
pub type Exact = num_rational::Rational64;

/// Total-order comparison for scalars that are never NaN by construction.
pub(crate) fn cmp_scalar<S: Scalar>(a: &S, b: &S) -> std::cmp::Ordering {
    a.partial_cmp(b).expect("filter values admit a total order")
}
