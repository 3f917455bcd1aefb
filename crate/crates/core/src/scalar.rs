//! Scalar abstraction for the numeric core. f32 or f64; the crate-root
//! aliases pin f64, which the file formats and CLI use.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

pub trait Scalar:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Display
    + Debug
    + FromStr
    + Default
    + Send
    + Sync
    + serde::Serialize
    + serde::de::DeserializeOwned
    + 'static
{
    fn cast(v: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(v).expect("f64 convertible")
    }
    fn cast_usize(v: usize) -> Self {
        <Self as num_traits::FromPrimitive>::from_usize(v).expect("usize convertible")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
