//! Working-precision context and small helpers over MPFR/MPC values.

use rug::float::Constant;
use rug::{Assign, Complex, Float};
use serde::{Deserialize, Serialize};

const LOG2_10: f64 = std::f64::consts::LOG2_10;
const GUARD_BITS: u32 = 32;

/// Number of significant decimal digits D used for all extended-precision work.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(Precision::DEFAULT_DIGITS)
    }
}

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 60;
    pub const MIN_DIGITS: u32 = 16;

    pub fn new(digits: u32) -> Self {
        Precision { digits: digits.max(Self::MIN_DIGITS) }
    }

    pub fn digits(self) -> u32 {
        self.digits
    }

    /// Binary precision: ceil(D log2 10) plus guard bits.
    pub fn bits(self) -> u32 {
        (self.digits as f64 * LOG2_10).ceil() as u32 + GUARD_BITS
    }

    /// A copy with `extra` more decimal digits.
    pub fn raised(self, extra: u32) -> Self {
        Precision::new(self.digits + extra)
    }

    pub fn real<T>(self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.bits(), v)
    }

    pub fn complex<T>(self, v: T) -> Complex
    where
        Complex: Assign<T>,
    {
        Complex::with_val(self.bits(), v)
    }

    pub fn zero(self) -> Float {
        Float::new(self.bits())
    }

    pub fn czero(self) -> Complex {
        Complex::new(self.bits())
    }

    /// 10^(offset - D) as a machine number.
    pub fn tol(self, offset: i32) -> f64 {
        10f64.powi(offset - self.digits as i32)
    }

    pub fn pi(self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }

    /// Parses a decimal literal at this precision.
    pub fn parse(self, s: &str) -> Option<Float> {
        Float::parse(s.trim()).ok().map(|p| Float::with_val(self.bits(), p))
    }
}

/// Modulus of a complex number as an MPFR float.
pub fn cabs(z: &Complex) -> Float {
    Float::with_val(z.prec().0, z.abs_ref())
}

/// Modulus as f64 (saturates to infinity).
pub fn cabs_f64(z: &Complex) -> f64 {
    cabs(z).to_f64()
}

/// Formats a float with `digits` significant decimal digits.
pub fn fmt_float(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_f64().to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}

/// Splits an MPC value into two f64 parts.
pub fn to_c64(z: &Complex) -> (f64, f64) {
    (z.real().to_f64(), z.imag().to_f64())
}
