//! Exact rational scalars, used for grid breakpoints and sample coordinates.
//!
//! Serialized form is a string, `"num/den"` or plain `"num"`, so that JSON
//! round-trips stay exact.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rat(Ratio<i64>);

impl Rat {
    pub fn new(num: i64, den: i64) -> Result<Self, Error> {
        if den == 0 {
            return Err(Error::Invalid(format!("rational {num}/0 has zero denominator")));
        }
        Ok(Rat(Ratio::new(num, den)))
    }

    pub fn int(n: i64) -> Self {
        Rat(Ratio::from_integer(n))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn sup(a: Rat, b: Rat) -> Rat {
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn inf(a: Rat, b: Rat) -> Rat {
        if a <= b {
            a
        } else {
            b
        }
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::int(n)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |_| Error::Invalid(format!("cannot parse rational from {s:?}"));
        match s.split_once('/') {
            None => Ok(Rat::int(s.trim().parse::<i64>().map_err(bad)?)),
            Some((n, d)) => {
                let num = n.trim().parse::<i64>().map_err(bad)?;
                let den = d.trim().parse::<i64>().map_err(bad)?;
                Rat::new(num, den)
            }
        }
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
