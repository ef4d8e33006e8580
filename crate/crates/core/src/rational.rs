//! Exact rational numbers.
//!
//! Values that fit in `i64` numerator/denominator are kept in a machine-word
//! representation; anything larger is promoted to arbitrary precision. The
//! representation is canonical: a value is stored as `Small` whenever it fits,
//! so structural equality coincides with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

/// An exact rational number in reduced form with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_small(Ratio::from_integer(n))
    }

    /// `numer / denom`. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        match (numer.checked_neg(), denom.checked_neg()) {
            (Some(_), Some(_)) => Self::from_small(Ratio::new(numer, denom)),
            _ => Self::from_big(BigRational::new(numer.into(), denom.into())),
        }
    }

    fn from_small(r: Ratio<i64>) -> Self {
        // i64::MIN has no negation; keep it out of the small form.
        if *r.numer() == i64::MIN || *r.denom() == i64::MIN {
            return Rational(Repr::Big(BigRational::new(
                (*r.numer()).into(),
                (*r.denom()).into(),
            )));
        }
        Rational(Repr::Small(r))
    }

    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => {
                // already reduced by BigRational
                Rational(Repr::Small(Ratio::new_raw(n, d)))
            }
            _ => Rational(Repr::Big(r)),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => BigRational::new_raw((*r.numer()).into(), (*r.denom()).into()),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.numer()).into(),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => (*r.denom()).into(),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    /// True for integers divisible by two.
    pub fn is_even_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer() && r.numer().is_even(),
            Repr::Big(r) => r.is_integer() && r.numer().is_even(),
        }
    }

    pub fn floor(&self) -> Rational {
        match &self.0 {
            Repr::Small(r) => Self::from_small(r.floor()),
            Repr::Big(r) => Self::from_big(r.floor()),
        }
    }

    pub fn ceil(&self) -> Rational {
        match &self.0 {
            Repr::Small(r) => Self::from_small(r.ceil()),
            Repr::Big(r) => Self::from_big(r.ceil()),
        }
    }

    pub fn half(&self) -> Rational {
        match &self.0 {
            Repr::Small(r) => {
                let (n, d) = (*r.numer(), *r.denom());
                if n % 2 == 0 {
                    Self::from_small(Ratio::new_raw(n / 2, d))
                } else if let Some(d2) = d.checked_mul(2) {
                    Self::from_small(Ratio::new_raw(n, d2))
                } else {
                    Self::from_big(self.to_big() / BigRational::from_integer(2.into()))
                }
            }
            Repr::Big(r) => Self::from_big(r / BigRational::from_integer(2.into())),
        }
    }

    pub fn double(&self) -> Rational {
        self.clone() + self.clone()
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Lossy conversion, for display and timing statistics only.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational::from_big(r)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        &self + &rhs
    }
}

impl Add<&Rational> for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if a.is_integer() && b.is_integer() {
                if let Some(s) = i64::checked_add(*a.numer(), *b.numer()) {
                    return Rational::from_small(Ratio::from_integer(s));
                }
            } else if let Some(s) = a.checked_add(b) {
                return Rational::from_small(s);
            }
        }
        Rational::from_big(self.to_big() + rhs.to_big())
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        &self - &rhs
    }
}

impl Sub<&Rational> for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
            if let Some(s) = a.checked_sub(b) {
                return Rational::from_small(s);
            }
        }
        Rational::from_big(self.to_big() - rhs.to_big())
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match self.0 {
            Repr::Small(r) => Rational::from_small(-r),
            Repr::Big(r) => Rational::from_big(-r),
        }
    }
}

impl Rational {
    pub fn checked_mul_int(&self, k: i64) -> Rational {
        if let Repr::Small(r) = &self.0 {
            if let Some(p) = r.checked_mul(&Ratio::from_integer(k)) {
                return Rational::from_small(p);
            }
        }
        Rational::from_big(self.to_big() * BigRational::from_integer(k.into()))
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(p) = a.checked_mul(b) {
                return Rational::from_small(p);
            }
        }
        Rational::from_big(self.to_big() * other.to_big())
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &Rational) -> Rational {
        assert!(!other.is_zero(), "division by zero");
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(q) = a.checked_div(b) {
                return Rational::from_small(q);
            }
        }
        Rational::from_big(self.to_big() / other.to_big())
    }

    pub fn is_positive(&self) -> bool {
        !self.is_negative() && !self.is_zero()
    }

    pub fn one() -> Rational {
        Rational(Repr::Small(Ratio::one()))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Small(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `-p`, `+p`, `p/q` and `-p/q` with decimal integers.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::BadNumber(s.to_string());
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let digits_ok = |t: &str| {
            let t = t.strip_prefix(['-', '+']).unwrap_or(t);
            !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
        };
        if !digits_ok(num) {
            return Err(bad());
        }
        let n: BigInt = num.trim_start_matches('+').parse().map_err(|_| bad())?;
        let d: BigInt = match den {
            Some(d) if d.bytes().all(|b| b.is_ascii_digit()) && !d.is_empty() => {
                d.parse().map_err(|_| bad())?
            }
            Some(_) => return Err(bad()),
            None => BigInt::one(),
        };
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}
