//! Exact half-integer arithmetic.
//!
//! Angular-momentum labels such as `j`, `m` and the magnetic charge `eg` take
//! values in `Z/2`. They are stored as doubled integers so that index
//! bookkeeping never suffers floating-point drift.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IsoError, Result};

/// A value in `Z/2`, stored as twice its value.
///
/// Serialized as its text form, e.g. `"3/2"` or `"-1"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HalfInt {
    /// Twice the represented value.
    pub twice_value: i64,
}

impl HalfInt {
    /// Zero.
    pub const ZERO: HalfInt = HalfInt { twice_value: 0 };
    /// One half.
    pub const HALF: HalfInt = HalfInt { twice_value: 1 };
    /// One.
    pub const ONE: HalfInt = HalfInt { twice_value: 2 };

    /// Builds the value `twice / 2`.
    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice_value: twice }
    }

    /// Builds an integer value.
    pub const fn int(n: i64) -> Self {
        HalfInt { twice_value: 2 * n }
    }

    /// Converts a float that is an exact multiple of 1/2.
    pub fn from_f64(x: f64) -> Result<Self> {
        let t = 2.0 * x;
        if (t - t.round()).abs() > 1e-12 || !t.is_finite() {
            return Err(IsoError::Domain(format!("{x} is not a multiple of 1/2")));
        }
        Ok(HalfInt { twice_value: t.round() as i64 })
    }

    /// Floating-point value.
    pub fn value(self) -> f64 {
        self.twice_value as f64 / 2.0
    }

    /// True when the value is an integer.
    pub fn is_integer(self) -> bool {
        self.twice_value % 2 == 0
    }

    /// Absolute value.
    pub fn abs(self) -> Self {
        HalfInt { twice_value: self.twice_value.abs() }
    }

    /// Integer value; errors for proper half-integers.
    pub fn to_int(self) -> Result<i64> {
        if self.is_integer() {
            Ok(self.twice_value / 2)
        } else {
            Err(IsoError::Domain(format!("{self} is not an integer")))
        }
    }

    /// The list `-j, -j+1, ..., j` of projections for this `j`.
    pub fn projections(self) -> Vec<HalfInt> {
        (0..=self.twice_value)
            .map(|k| HalfInt::from_twice(-self.twice_value + 2 * k))
            .collect()
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice_value + o.twice_value)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice_value - o.twice_value)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice_value)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice_value / 2)
        } else {
            write!(f, "{}/2", self.twice_value)
        }
    }
}

impl FromStr for HalfInt {
    type Err = IsoError;

    /// Accepts `"3"`, `"-1/2"`, `"5/2"` or a decimal such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n: i64 = num
                .trim()
                .parse()
                .map_err(|_| IsoError::Parse(format!("bad half-integer numerator in '{s}'")))?;
            match den.trim() {
                "2" => Ok(HalfInt::from_twice(n)),
                "1" => Ok(HalfInt::int(n)),
                _ => Err(IsoError::Parse(format!("'{s}' must have denominator 1 or 2"))),
            }
        } else {
            let x: f64 = s
                .parse()
                .map_err(|_| IsoError::Parse(format!("cannot parse '{s}' as a half-integer")))?;
            HalfInt::from_f64(x)
        }
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for HalfInt {
    type Error = IsoError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Phase `(-1)^x` for a half-integer exponent, read as `exp(i pi x)`.
///
/// For integer `x` this is the ordinary sign. For half-integer `x` the branch
/// `exp(i pi x)` is the one produced by the reflection
/// `(theta, phi) -> (pi - theta, phi + pi)` acting on `D`-functions.
pub fn parity_phase(x: HalfInt) -> num_complex::Complex64 {
    let t = x.twice_value.rem_euclid(4);
    match t {
        0 => num_complex::Complex64::new(1.0, 0.0),
        1 => num_complex::Complex64::new(0.0, 1.0),
        2 => num_complex::Complex64::new(-1.0, 0.0),
        _ => num_complex::Complex64::new(0.0, -1.0),
    }
}

/// Sign `(-1)^n` for an integer-valued half-integer.
pub fn sign_pow(x: HalfInt) -> Result<f64> {
    let n = x.to_int()?;
    Ok(if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "1/2", "-3/2", "7/2", "3"] {
            let h: HalfInt = s.parse().unwrap();
            assert_eq!(h.to_string(), s);
        }
        assert_eq!("1.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(3));
        assert!("0.3".parse::<HalfInt>().is_err());
        assert!("1/3".parse::<HalfInt>().is_err());
    }

    #[test]
    fn arithmetic_is_closed() {
        let a = HalfInt::from_twice(3);
        let b = HalfInt::from_twice(-1);
        assert_eq!(a + b, HalfInt::ONE);
        assert_eq!(a - b, HalfInt::int(2));
        assert_eq!(-a, HalfInt::from_twice(-3));
        assert!(b < a);
    }

    #[test]
    fn projections_cover_multiplet() {
        let p = HalfInt::from_twice(3).projections();
        assert_eq!(p.len(), 4);
        assert_eq!(p[0], HalfInt::from_twice(-3));
        assert_eq!(p[3], HalfInt::from_twice(3));
    }

    #[test]
    fn parity_phase_matches_integer_signs() {
        assert_eq!(parity_phase(HalfInt::int(3)).re, -1.0);
        assert_eq!(parity_phase(HalfInt::int(-2)).re, 1.0);
        assert_eq!(parity_phase(HalfInt::HALF).im, 1.0);
    }
}
