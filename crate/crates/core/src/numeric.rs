//! Arithmetic regimes: exact rationals, saturating fixed point with a
//! constant bit budget, and fixed point whose integer width grows with the
//! input length.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{NumericError, ParseError};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Signed fixed-point format with `int_bits` integer and `frac_bits`
/// fractional bits. Representable values are `k · 2^-F` with
/// `-2^I <= k·2^-F <= 2^I - 2^-F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixedFormat {
    int_bits: u32,
    frac_bits: u32,
}

impl FixedFormat {
    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self, NumericError> {
        if int_bits == 0 || int_bits + frac_bits > 62 {
            return Err(NumericError::BadFormat { int_bits, frac_bits });
        }
        Ok(Self { int_bits, frac_bits })
    }

    pub fn int_bits(self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    pub fn max_raw(self) -> i64 {
        (1i64 << (self.int_bits + self.frac_bits)) - 1
    }

    pub fn min_raw(self) -> i64 {
        -(1i64 << (self.int_bits + self.frac_bits))
    }

    fn saturate(self, raw: i128) -> i64 {
        raw.clamp(i128::from(self.min_raw()), i128::from(self.max_raw())) as i64
    }

    /// Nearest grid point (ties to even), saturated to the range.
    pub fn quantize(self, q: &Rational) -> i64 {
        let scaled = q.numer() << self.frac_bits as usize;
        let denom = q.denom();
        let (mut quot, rem) = scaled.div_mod_floor(denom);
        let twice = &rem << 1usize;
        if twice > *denom || (twice == *denom && quot.is_odd()) {
            quot += 1;
        }
        let lo = BigInt::from(self.min_raw());
        let hi = BigInt::from(self.max_raw());
        quot.clamp(lo, hi).to_i64().expect("clamped into i64 range")
    }

    pub fn to_rational(self, raw: i64) -> Rational {
        Rational::new(BigInt::from(raw), BigInt::one() << self.frac_bits as usize)
    }

    pub fn add(self, a: i64, b: i64) -> i64 {
        self.saturate(i128::from(a) + i128::from(b))
    }

    /// Exact product rounded half-to-even onto the grid, then saturated.
    pub fn mul(self, a: i64, b: i64) -> i64 {
        let prod = i128::from(a) * i128::from(b);
        let f = self.frac_bits;
        if f == 0 {
            return self.saturate(prod);
        }
        let quot = prod >> f;
        let rem = prod - (quot << f);
        let half = 1i128 << (f - 1);
        let rounded = if rem > half || (rem == half && quot & 1 == 1) {
            quot + 1
        } else {
            quot
        };
        self.saturate(rounded)
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fixed:{}:{}", self.int_bits, self.frac_bits)
    }
}

/// Arithmetic regime requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NumericMode {
    Exact,
    Fixed(FixedFormat),
    /// Fixed point with `ceil(log2(n + 2)) + headroom` integer bits on inputs
    /// of length `n`. `headroom: None` defers to the model's own estimate.
    LogPrecision {
        frac_bits: u32,
        headroom: Option<u32>,
    },
}

/// A mode with its width settled for one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResolvedMode {
    Exact,
    Fixed(FixedFormat),
}

impl fmt::Display for ResolvedMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => f.write_str("exact"),
            Self::Fixed(fmt) => fmt.fmt(f),
        }
    }
}

/// `ceil(log2(x))` for `x >= 1`.
fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

impl NumericMode {
    pub fn fixed(int_bits: u32, frac_bits: u32) -> Result<Self, NumericError> {
        Ok(Self::Fixed(FixedFormat::new(int_bits, frac_bits)?))
    }

    pub fn log_precision(frac_bits: u32, headroom: Option<u32>) -> Self {
        Self::LogPrecision { frac_bits, headroom }
    }

    /// Integer bits used by `LogPrecision` on inputs of length `len`.
    pub fn log_int_bits(len: usize, headroom: u32) -> u32 {
        ceil_log2(len as u128 + 2) + headroom
    }

    /// Settles the width for an input of length `len`; `auto_headroom`
    /// fills in `LogPrecision { headroom: None }`.
    pub fn resolve(self, len: usize, auto_headroom: u32) -> Result<ResolvedMode, NumericError> {
        Ok(match self {
            Self::Exact => ResolvedMode::Exact,
            Self::Fixed(f) => ResolvedMode::Fixed(f),
            Self::LogPrecision { frac_bits, headroom } => {
                let h = headroom.unwrap_or(auto_headroom);
                ResolvedMode::Fixed(FixedFormat::new(Self::log_int_bits(len, h), frac_bits)?)
            }
        })
    }

    /// Fractional bits, if the mode has a fixed grid.
    pub fn frac_bits(self) -> Option<u32> {
        match self {
            Self::Exact => None,
            Self::Fixed(f) => Some(f.frac_bits()),
            Self::LogPrecision { frac_bits, .. } => Some(frac_bits),
        }
    }

    pub fn is_constant_width(self) -> bool {
        matches!(self, Self::Fixed(_))
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact => f.write_str("exact"),
            Self::Fixed(fmt) => fmt.fmt(f),
            Self::LogPrecision {
                frac_bits,
                headroom: Some(h),
            } => write!(f, "logp:{frac_bits}:{h}"),
            Self::LogPrecision {
                frac_bits,
                headroom: None,
            } => write!(f, "logp:{frac_bits}:auto"),
        }
    }
}

impl FromStr for NumericMode {
    type Err = ParseError;

    /// `exact`, `fixed:I:F`, `logp:F[:H|:auto]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| ParseError::Syntax {
            pos: 0,
            msg: format!("bad numeric mode `{s}`: {msg}"),
        };
        let num = |t: &str| t.parse::<u32>().map_err(|_| bad("expected an unsigned integer"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["exact"] => Ok(Self::Exact),
            ["fixed", i, f] => Self::fixed(num(i)?, num(f)?).map_err(|e| bad(&e.to_string())),
            ["logp", f] | ["logp", f, "auto"] => Ok(Self::log_precision(num(f)?, None)),
            ["logp", f, h] => Ok(Self::log_precision(num(f)?, Some(num(h)?))),
            _ => Err(bad("expected exact, fixed:I:F or logp:F:H")),
        }
    }
}

/// Operations the model executor needs from a value domain.
pub trait Arithmetic {
    type Value: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Value;
    fn lift(&self, q: &Rational) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn relu(&self, a: &Self::Value) -> Self::Value;
    fn is_zero(&self, a: &Self::Value) -> bool;
    fn to_numeric(&self, a: &Self::Value) -> Numeric;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactArith;

impl Arithmetic for ExactArith {
    type Value = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn lift(&self, q: &Rational) -> Rational {
        q.clone()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn relu(&self, a: &Rational) -> Rational {
        if a.is_negative() {
            Rational::zero()
        } else {
            a.clone()
        }
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn to_numeric(&self, a: &Rational) -> Numeric {
        Numeric::Exact(a.clone())
    }
}

/// Exact rationals kept as `i64` ratios while they fit, promoted to
/// arbitrary precision on overflow. Same results as [`ExactArith`], much
/// cheaper on the short runs that exhaustive checks consist of.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompactExact;

#[derive(Debug, Clone)]
pub enum CompactRational {
    Small(Ratio<i64>),
    Big(Rational),
}

impl CompactRational {
    fn from_big(q: Rational) -> Self {
        match (q.numer().to_i64(), q.denom().to_i64()) {
            (Some(n), Some(d)) => Self::Small(Ratio::new_raw(n, d)),
            _ => Self::Big(q),
        }
    }

    pub fn to_big(&self) -> Rational {
        match self {
            Self::Small(r) => Rational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Self::Big(q) => q.clone(),
        }
    }
}

impl PartialEq for CompactRational {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Small(a), Self::Small(b)) => a == b,
            _ => self.to_big() == other.to_big(),
        }
    }
}

impl Arithmetic for CompactExact {
    type Value = CompactRational;

    fn zero(&self) -> CompactRational {
        CompactRational::Small(Ratio::zero())
    }
    fn lift(&self, q: &Rational) -> CompactRational {
        CompactRational::from_big(q.clone())
    }
    fn add(&self, a: &CompactRational, b: &CompactRational) -> CompactRational {
        if let (CompactRational::Small(x), CompactRational::Small(y)) = (a, b) {
            if let Some(r) = x.checked_add(y) {
                return CompactRational::Small(r);
            }
        }
        CompactRational::from_big(a.to_big() + b.to_big())
    }
    fn mul(&self, a: &CompactRational, b: &CompactRational) -> CompactRational {
        if let (CompactRational::Small(x), CompactRational::Small(y)) = (a, b) {
            if let Some(r) = x.checked_mul(y) {
                return CompactRational::Small(r);
            }
        }
        CompactRational::from_big(a.to_big() * b.to_big())
    }
    fn relu(&self, a: &CompactRational) -> CompactRational {
        let negative = match a {
            CompactRational::Small(r) => r.is_negative(),
            CompactRational::Big(q) => q.is_negative(),
        };
        if negative {
            self.zero()
        } else {
            a.clone()
        }
    }
    fn is_zero(&self, a: &CompactRational) -> bool {
        match a {
            CompactRational::Small(r) => r.is_zero(),
            CompactRational::Big(q) => q.is_zero(),
        }
    }
    fn to_numeric(&self, a: &CompactRational) -> Numeric {
        Numeric::Exact(a.to_big())
    }
}

impl Arithmetic for FixedFormat {
    type Value = i64;

    fn zero(&self) -> i64 {
        0
    }
    fn lift(&self, q: &Rational) -> i64 {
        self.quantize(q)
    }
    fn add(&self, a: &i64, b: &i64) -> i64 {
        FixedFormat::add(*self, *a, *b)
    }
    fn mul(&self, a: &i64, b: &i64) -> i64 {
        FixedFormat::mul(*self, *a, *b)
    }
    fn relu(&self, a: &i64) -> i64 {
        (*a).max(0)
    }
    fn is_zero(&self, a: &i64) -> bool {
        *a == 0
    }
    fn to_numeric(&self, a: &i64) -> Numeric {
        Numeric::Fixed { raw: *a, format: *self }
    }
}

/// A value tagged with its arithmetic regime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Numeric {
    Exact(Rational),
    /// `raw · 2^-F`, always within the format's range.
    Fixed {
        raw: i64,
        format: FixedFormat,
    },
}

impl Numeric {
    /// `q` in the given regime, rounded and saturated when fixed.
    pub fn from_rational(q: &Rational, mode: ResolvedMode) -> Self {
        match mode {
            ResolvedMode::Exact => Self::Exact(q.clone()),
            ResolvedMode::Fixed(format) => Self::Fixed {
                raw: format.quantize(q),
                format,
            },
        }
    }

    pub fn to_rational(&self) -> Rational {
        match self {
            Self::Exact(q) => q.clone(),
            Self::Fixed { raw, format } => format.to_rational(*raw),
        }
    }

    pub fn mode(&self) -> ResolvedMode {
        match self {
            Self::Exact(_) => ResolvedMode::Exact,
            Self::Fixed { format, .. } => ResolvedMode::Fixed(*format),
        }
    }

    fn binary(
        &self,
        other: &Self,
        exact: impl Fn(&Rational, &Rational) -> Rational,
        fixed: impl Fn(FixedFormat, i64, i64) -> i64,
    ) -> Result<Self, NumericError> {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => Ok(Self::Exact(exact(a, b))),
            (Self::Fixed { raw: a, format: fa }, Self::Fixed { raw: b, format: fb }) if fa == fb => Ok(Self::Fixed {
                raw: fixed(*fa, *a, *b),
                format: *fa,
            }),
            _ => Err(NumericError::ModeMismatch(
                self.mode().to_string(),
                other.mode().to_string(),
            )),
        }
    }

    /// Sum, saturated when fixed.
    pub fn add(&self, other: &Self) -> Result<Self, NumericError> {
        self.binary(other, |a, b| a + b, FixedFormat::add)
    }

    /// Product, rounded half-to-even then saturated when fixed.
    pub fn mul(&self, other: &Self) -> Result<Self, NumericError> {
        self.binary(other, |a, b| a * b, FixedFormat::mul)
    }

    pub fn relu(&self) -> Self {
        match self {
            Self::Exact(q) => Self::Exact(ExactArith.relu(q)),
            Self::Fixed { raw, format } => Self::Fixed {
                raw: (*raw).max(0),
                format: *format,
            },
        }
    }
}

impl fmt::Display for Numeric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

impl PartialOrd for Numeric {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => a.partial_cmp(b),
            (Self::Fixed { raw: a, format: fa }, Self::Fixed { raw: b, format: fb }) if fa == fb => a.partial_cmp(b),
            _ => None,
        }
    }
}
