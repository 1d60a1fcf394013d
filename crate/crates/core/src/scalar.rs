//! Scalar backends: exact rationals and `f64`.
//!
//! Every computation is generic over [`Scalar`]; a run picks one backend via
//! [`ScalarMode`] and never mixes the two.

use std::fmt::Debug;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Default comparison tolerance in float mode.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Resolution of the uniform draw used for Born sampling: `k / 2^53`.
pub const DRAW_BITS: u32 = 53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Exact,
    Float,
}

impl ScalarMode {
    pub fn name(self) -> &'static str {
        match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float => "float",
        }
    }
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + 'static
{
    const MODE: ScalarMode;

    fn from_ratio(num: i64, den: i64) -> Self;

    fn from_u64(v: u64) -> Self {
        Self::from_ratio(v as i64, 1)
    }

    fn to_f64(&self) -> f64;

    /// Nearest representable value; exact for every finite float in exact mode.
    fn from_f64_lossy(v: f64) -> Self;

    /// Exact zero test in exact mode; `|x| <= tol` in float mode.
    fn is_negligible(&self, tol: f64) -> bool;

    /// Equality in exact mode; absolute difference `<= tol` in float mode.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Whether the uniform draw `k / 2^53` falls strictly below `self`.
    fn exceeds_draw(&self, k: u64) -> bool;

    fn abs_val(&self) -> Self;

    fn feed_hash<H: Hasher>(&self, state: &mut H);

    /// `"p/q"` (or `"p"`) for rationals, shortest round-trip decimal for floats.
    fn render(&self) -> String;

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self;
        }
        acc
    }
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(BigRational::zero)
    }

    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn exceeds_draw(&self, k: u64) -> bool {
        // k / 2^53 < num / den  <=>  k * den < num * 2^53   (den > 0)
        let lhs = BigInt::from(k) * self.denom();
        let rhs = self.numer() << DRAW_BITS as usize;
        lhs < rhs
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn feed_hash<H: Hasher>(&self, state: &mut H) {
        self.hash(state);
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_f64_lossy(v: f64) -> Self {
        v
    }

    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }

    fn exceeds_draw(&self, k: u64) -> bool {
        (k as f64) / ((1u64 << DRAW_BITS) as f64) < *self
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn feed_hash<H: Hasher>(&self, state: &mut H) {
        // +0.0 and -0.0 compare equal and must hash equal
        let v = if *self == 0.0 { 0.0f64 } else { *self };
        v.to_bits().hash(state);
    }

    fn render(&self) -> String {
        format!("{self:?}")
    }
}
