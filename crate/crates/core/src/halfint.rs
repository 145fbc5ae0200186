//! Exact half-integer quantum numbers.
//!
//! A [`HalfInt`] stores twice its value, so `j = 3/2` is held as `3`. All
//! arithmetic on angular-momentum labels stays in the integers.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct HalfInt {
    twice: i64,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt { twice }
    }

    pub const fn from_int(n: i64) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i64 {
        self.twice
    }

    pub const fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// The integer value, if this is one.
    pub const fn as_integer(self) -> Option<i64> {
        if self.is_integer() {
            Some(self.twice / 2)
        } else {
            None
        }
    }

    pub fn to_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn abs(self) -> Self {
        HalfInt { twice: self.twice.abs() }
    }
}

/// True iff `(j, m)` labels a state: `j ≥ 0`, `|m| ≤ j` and `j - m` integral.
pub fn is_valid_pair(j: HalfInt, m: HalfInt) -> bool {
    j.twice >= 0 && m.twice.abs() <= j.twice && (j.twice - m.twice) % 2 == 0
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + rhs.twice }
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - rhs.twice }
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}/2", self.twice),
        }
    }
}

impl From<HalfInt> for String {
    fn from(h: HalfInt) -> String {
        h.to_string()
    }
}

impl TryFrom<String> for HalfInt {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

/// Accepts `"3"`, `"-1/2"`, `"3/2"`, `"0.5"`, `"-1.5"`.
impl FromStr for HalfInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::ParseHalfInt(s.to_string());
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i64 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInt::from_int(num)),
                "2" => Ok(HalfInt::from_twice(num)),
                _ => Err(bad()),
            }
        } else if t.contains('.') {
            // Halves are exact in binary floating point.
            let x: f64 = t.parse().map_err(|_| bad())?;
            let twice = 2.0 * x;
            if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > 2f64.powi(52) {
                return Err(bad());
            }
            Ok(HalfInt::from_twice(twice as i64))
        } else {
            let n: i64 = t.parse().map_err(|_| bad())?;
            Ok(HalfInt::from_int(n))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!("1/2".parse::<HalfInt>().unwrap(), HalfInt::HALF);
        assert_eq!("0.5".parse::<HalfInt>().unwrap(), HalfInt::HALF);
        assert_eq!("-3/2".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-3));
        assert_eq!("-1.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-3));
        assert_eq!("-.5".parse::<HalfInt>().unwrap(), HalfInt::from_twice(-1));
        assert_eq!("2".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
        assert_eq!("2.0".parse::<HalfInt>().unwrap(), HalfInt::from_int(2));
        assert_eq!("4/1".parse::<HalfInt>().unwrap(), HalfInt::from_int(4));
        assert!("1/3".parse::<HalfInt>().is_err());
        assert!("0.25".parse::<HalfInt>().is_err());
        assert!("abc".parse::<HalfInt>().is_err());
    }

    #[test]
    fn display_roundtrip() {
        for twice in -9..=9 {
            let h = HalfInt::from_twice(twice);
            assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
        }
        assert_eq!(HalfInt::from_twice(-1).to_string(), "-1/2");
    }

    #[test]
    fn pair_validity() {
        let h = HalfInt::from_twice;
        assert!(is_valid_pair(h(1), h(-1)));
        assert!(is_valid_pair(h(2), h(0)));
        assert!(!is_valid_pair(h(2), h(1)));
        assert!(!is_valid_pair(h(1), h(3)));
        assert!(!is_valid_pair(h(-2), h(0)));
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = HalfInt::from_twice(3);
        let b = HalfInt::from_twice(1);
        assert_eq!(a + b, HalfInt::from_int(2));
        assert_eq!(a - b, HalfInt::ONE);
        assert_eq!(-a, HalfInt::from_twice(-3));
    }
}
