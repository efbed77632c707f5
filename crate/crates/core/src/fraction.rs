//! Exact rationals for statistics and percentages.
//!
//! Values are kept as reduced `i64` ratios; decimal text is only produced at
//! the edges (6 places for statistics, whole percent for coverage).

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fraction(pub Ratio<i64>);

impl Fraction {
    pub fn new(num: i64, den: i64) -> Self {
        Fraction(Ratio::new(num, den))
    }

    pub fn from_int(n: i64) -> Self {
        Fraction(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Fraction(Ratio::zero())
    }

    pub fn one() -> Self {
        Fraction::from_int(1)
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }

    /// Half-up (away from zero on ties) rounding to `places` decimals.
    pub fn to_decimal(&self, places: u32) -> String {
        let scale = 10i128.pow(places);
        let num = self.numer() as i128;
        let den = self.denom() as i128;
        let scaled = num.abs() * scale;
        let mut q = scaled / den;
        if (scaled % den) * 2 >= den {
            q += 1;
        }
        let sign = if num < 0 && q != 0 { "-" } else { "" };
        if places == 0 {
            return format!("{sign}{q}");
        }
        let int = q / scale;
        let frac = q % scale;
        format!("{sign}{int}.{frac:0width$}", width = places as usize)
    }

    /// `100 * self`, rounded half-up to an integer.
    pub fn percent_rounded(&self) -> i64 {
        let hundred = Fraction(self.0 * Ratio::from_integer(100));
        hundred.to_decimal(0).parse().expect("integer text")
    }

    pub fn abs(&self) -> Self {
        Fraction(self.0.abs())
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl std::ops::Add for Fraction {
    type Output = Fraction;
    fn add(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Fraction {
    type Output = Fraction;
    fn sub(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 - rhs.0)
    }
}

impl std::ops::Mul for Fraction {
    type Output = Fraction;
    fn mul(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 * rhs.0)
    }
}

impl std::ops::Div for Fraction {
    type Output = Fraction;
    fn div(self, rhs: Fraction) -> Fraction {
        Fraction(self.0 / rhs.0)
    }
}

#[derive(Serialize, Deserialize)]
struct FractionRepr {
    num: i64,
    den: i64,
    decimal: String,
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FractionRepr {
            num: self.numer(),
            den: self.denom(),
            decimal: self.to_decimal(6),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Fraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FractionRepr::deserialize(d)?;
        if r.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Fraction::new(r.num, r.den))
    }
}
