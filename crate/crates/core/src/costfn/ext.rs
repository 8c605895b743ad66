use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Rational;

/// A value of the extended reals restricted to rationals: `-inf < finite < +inf`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtValue {
    NegInf,
    Finite(Rational),
    PosInf,
}

impl ExtValue {
    pub fn int(n: i64) -> Self {
        ExtValue::Finite(Rational::from_int(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtValue::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// Adds a finite amount; infinities absorb it.
    pub fn plus(&self, r: &Rational) -> ExtValue {
        match self {
            ExtValue::Finite(v) => ExtValue::Finite(v + r),
            other => other.clone(),
        }
    }

    /// `None` for the undefined sum `+inf + -inf`.
    pub fn checked_add(&self, other: &ExtValue) -> Option<ExtValue> {
        use ExtValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => None,
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (NegInf, _) | (_, NegInf) => Some(NegInf),
        }
    }
}

impl From<Rational> for ExtValue {
    fn from(r: Rational) -> Self {
        ExtValue::Finite(r)
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtValue::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
        }
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &ExtValue {
    type Output = ExtValue;

    /// Panics on `+inf + -inf`; callers never form that sum.
    fn add(self, rhs: &ExtValue) -> ExtValue {
        self.checked_add(rhs).expect("undefined sum +inf + -inf")
    }
}

impl Neg for &ExtValue {
    type Output = ExtValue;
    fn neg(self) -> ExtValue {
        match self {
            ExtValue::NegInf => ExtValue::PosInf,
            ExtValue::PosInf => ExtValue::NegInf,
            ExtValue::Finite(r) => ExtValue::Finite(-r),
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::NegInf => f.write_str("-inf"),
            ExtValue::PosInf => f.write_str("+inf"),
            ExtValue::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtValue {
    type Err = super::ParseRationalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" => Ok(ExtValue::PosInf),
            "-inf" => Ok(ExtValue::NegInf),
            t => Ok(ExtValue::Finite(t.parse()?)),
        }
    }
}

impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order() {
        let v = [ExtValue::PosInf, ExtValue::int(3), ExtValue::NegInf, ExtValue::int(-2)];
        let mut s = v.to_vec();
        s.sort();
        assert_eq!(s, vec![ExtValue::NegInf, ExtValue::int(-2), ExtValue::int(3), ExtValue::PosInf]);
    }

    #[test]
    fn absorption() {
        assert_eq!(ExtValue::PosInf.plus(&Rational::from_int(-5)), ExtValue::PosInf);
        assert_eq!(&ExtValue::int(2) + &ExtValue::NegInf, ExtValue::NegInf);
        assert!(ExtValue::PosInf.checked_add(&ExtValue::NegInf).is_none());
    }
}
