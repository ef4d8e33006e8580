//! DBM cell values: exact rationals extended with `+∞`.

use std::fmt;
use std::ops::Add;

use crate::rational::Rational;

/// An element of ℚ ∪ {+∞}. There is no `-∞`: every operation the domain
/// needs is a min, a max, an addition or a halving.
///
/// The derived order puts every finite value below `Inf`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(Rational),
    Inf,
}

impl Bound {
    pub fn zero() -> Bound {
        Bound::Finite(Rational::zero())
    }

    pub fn int(n: i64) -> Bound {
        Bound::Finite(Rational::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Bound {
        Bound::Finite(Rational::new(n, d))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Bound::Inf)
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            Bound::Inf => None,
        }
    }

    pub fn into_finite(self) -> Option<Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            Bound::Inf => None,
        }
    }

    /// Exact sum; `Inf` absorbs.
    pub fn add(&self, other: &Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Inf,
        }
    }

    pub fn add_rational(&self, c: &Rational) -> Bound {
        match self {
            Bound::Finite(a) => Bound::Finite(a + c),
            Bound::Inf => Bound::Inf,
        }
    }

    /// Exact division by two; `Inf / 2 = Inf`.
    pub fn half(&self) -> Bound {
        match self {
            Bound::Finite(a) => Bound::Finite(a.half()),
            Bound::Inf => Bound::Inf,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Bound::Finite(r) if r.is_negative())
    }
}

impl From<Rational> for Bound {
    fn from(r: Rational) -> Bound {
        Bound::Finite(r)
    }
}

impl From<Option<Rational>> for Bound {
    fn from(r: Option<Rational>) -> Bound {
        r.map_or(Bound::Inf, Bound::Finite)
    }
}

impl From<Option<&Rational>> for Bound {
    fn from(r: Option<&Rational>) -> Bound {
        r.map_or(Bound::Inf, |r| Bound::Finite(r.clone()))
    }
}

impl Add for Bound {
    type Output = Bound;
    fn add(self, rhs: Bound) -> Bound {
        Bound::add(&self, &rhs)
    }
}

impl Add<&Bound> for &Bound {
    type Output = Bound;
    fn add(self, rhs: &Bound) -> Bound {
        Bound::add(self, rhs)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(r) => write!(f, "{r}"),
            Bound::Inf => f.write_str("+inf"),
        }
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Sum of two bounds.
pub fn bound_add(a: &Bound, b: &Bound) -> Bound {
    a.add(b)
}

/// Half of a bound.
pub fn bound_half(a: &Bound) -> Bound {
    a.half()
}
