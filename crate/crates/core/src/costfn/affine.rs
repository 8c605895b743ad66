use std::fmt;

use serde::{Deserialize, Serialize};

use super::Rational;

/// `ν ↦ slope·ν + intercept`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineFn {
    pub slope: Rational,
    pub intercept: Rational,
}

impl AffineFn {
    pub fn new(slope: Rational, intercept: Rational) -> Self {
        AffineFn { slope, intercept }
    }

    pub fn ints(slope: i64, intercept: i64) -> Self {
        AffineFn::new(Rational::from_int(slope), Rational::from_int(intercept))
    }

    pub fn constant(c: Rational) -> Self {
        AffineFn::new(Rational::zero(), c)
    }

    /// The line through `(a, fa)` and `(b, fb)`; `a != b`.
    pub fn through(a: &Rational, fa: &Rational, b: &Rational, fb: &Rational) -> Self {
        let slope = (fb - fa) / (b - a);
        let intercept = fa - &slope * a;
        AffineFn { slope, intercept }
    }

    pub fn eval(&self, nu: &Rational) -> Rational {
        &self.slope * nu + &self.intercept
    }

    pub fn shifted(&self, k: &Rational) -> AffineFn {
        AffineFn::new(self.slope.clone(), &self.intercept + k)
    }

    /// Abscissa where the two lines meet, if their slopes differ.
    pub fn intersection(&self, other: &AffineFn) -> Option<Rational> {
        if self.slope == other.slope {
            return None;
        }
        Some((&other.intercept - &self.intercept) / (&self.slope - &other.slope))
    }

    /// Precomposition with `ν ↦ lo + scale·ν`.
    pub fn compose_affine(&self, lo: &Rational, scale: &Rational) -> AffineFn {
        AffineFn::new(&self.slope * scale, self.eval(lo))
    }
}

impl fmt::Display for AffineFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intercept.is_negative() {
            write!(f, "{}*x-{}", self.slope, self.intercept.abs())
        } else {
            write!(f, "{}*x+{}", self.slope, self.intercept)
        }
    }
}

impl fmt::Debug for AffineFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
