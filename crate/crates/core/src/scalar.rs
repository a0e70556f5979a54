//! Exact arithmetic in the 2-local integers.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// A 2-adic valuation, with `Inf` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Val {
    Fin(u32),
    Inf,
}

impl Val {
    pub fn finite(self) -> Option<u32> {
        match self {
            Val::Fin(k) => Some(k),
            Val::Inf => None,
        }
    }

    pub fn is_inf(self) -> bool {
        self == Val::Inf
    }

    pub fn plus(self, k: u32) -> Val {
        match self {
            Val::Fin(a) => Val::Fin(a + k),
            Val::Inf => Val::Inf,
        }
    }
}

impl Add for Val {
    type Output = Val;
    fn add(self, rhs: Val) -> Val {
        match (self, rhs) {
            (Val::Fin(a), Val::Fin(b)) => Val::Fin(a + b),
            _ => Val::Inf,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Fin(k) => write!(f, "{k}"),
            Val::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for Val {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Val::Fin(k) => s.serialize_u32(*k),
            Val::Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Val {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(k) => Ok(Val::Fin(k)),
            Raw::S(s) if s == "inf" => Ok(Val::Inf),
            Raw::S(s) => Err(serde::de::Error::custom(format!("bad valuation {s:?}"))),
        }
    }
}

/// An element of Z_(2): a rational number with odd positive denominator,
/// always kept in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    den: BigInt,
}

fn val2_int(n: &BigInt) -> Val {
    if n.is_zero() {
        Val::Inf
    } else {
        Val::Fin(n.trailing_zeros().unwrap_or(0) as u32)
    }
}

impl Dyadic {
    pub fn new(num: BigInt, den: BigInt) -> Result<Dyadic, Error> {
        if den.is_zero() || den.is_even() {
            return Err(Error::EvenDenominator(format!("{num}/{den}")));
        }
        let (num, den) = if den.is_negative() { (-num, -den) } else { (num, den) };
        let g = num.gcd(&den);
        if g.is_one() {
            Ok(Dyadic { num, den })
        } else {
            Ok(Dyadic { num: num / &g, den: den / &g })
        }
    }

    pub fn zero() -> Dyadic {
        Dyadic { num: BigInt::zero(), den: BigInt::one() }
    }

    pub fn one() -> Dyadic {
        Dyadic::from(1)
    }

    /// 2^k.
    pub fn pow2(k: u32) -> Dyadic {
        Dyadic { num: BigInt::one() << k as usize, den: BigInt::one() }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn val2(&self) -> Val {
        val2_int(&self.num)
    }

    /// The odd part `u` in `self = 2^val2 * u`. Zero maps to zero.
    pub fn unit_part(&self) -> Dyadic {
        match self.val2() {
            Val::Inf => Dyadic::zero(),
            Val::Fin(k) => Dyadic { num: &self.num >> k as usize, den: self.den.clone() },
        }
    }

    /// Exact quotient when it stays 2-integral, `None` otherwise (or on division by zero).
    pub fn checked_div(&self, rhs: &Dyadic) -> Option<Dyadic> {
        if rhs.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Dyadic::zero());
        }
        if self.val2() < rhs.val2() {
            return None;
        }
        let num = &self.num * &rhs.den;
        let den = &self.den * &rhs.num;
        let k = val2_int(&den).finite().unwrap_or(0) as usize;
        Some(Dyadic::new(num >> k, den >> k).expect("odd after removing powers of two"))
    }

    /// Multiply by 2^k.
    pub fn shl(&self, k: u32) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { num: &self.num << k as usize, den: self.den.clone() }
    }

    /// Divide by 2^k; caller guarantees k ≤ val2.
    pub fn shr(&self, k: u32) -> Dyadic {
        debug_assert!(self.val2() >= Val::Fin(k));
        Dyadic { num: &self.num >> k as usize, den: self.den.clone() }
    }

    /// Residue modulo 2^k as an integer in [0, 2^k).
    pub fn residue(&self, k: u32) -> BigInt {
        let m = BigInt::one() << k as usize;
        let inv = mod_inverse(&self.den.mod_floor(&m), &m);
        (&self.num * inv).mod_floor(&m)
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    if m.is_one() {
        return BigInt::zero();
    }
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Dyadic {
        Dyadic { num: BigInt::from(n), den: BigInt::one() }
    }
}

impl From<BigInt> for Dyadic {
    fn from(n: BigInt) -> Dyadic {
        Dyadic { num: n, den: BigInt::one() }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.den.is_one() && rhs.den.is_one() {
            return Dyadic { num: &self.num + &rhs.num, den: BigInt::one() };
        }
        Dyadic::new(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
            .expect("product of odd denominators is odd")
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.den.is_one() && rhs.den.is_one() {
            return Dyadic { num: &self.num * &rhs.num, den: BigInt::one() };
        }
        Dyadic::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("odd denominators")
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, den: self.den.clone() }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Dyadic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Dyadic, Error> {
        let bad = || Error::Parse(format!("not a 2-local rational: {s:?}"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        Dyadic::new(n, d)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", self.num, self.den))
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(Dyadic::from(12).val2(), Val::Fin(2));
        assert_eq!(Dyadic::zero().val2(), Val::Inf);
        assert_eq!("8/3".parse::<Dyadic>().unwrap().val2(), Val::Fin(3));
    }

    #[test]
    fn arithmetic() {
        let a: Dyadic = "1/3".parse().unwrap();
        let b: Dyadic = "2/3".parse().unwrap();
        assert_eq!(&a + &b, Dyadic::one());
        assert_eq!(&Dyadic::from(2) * &a, b);
        assert_eq!((&Dyadic::from(2) * &Dyadic::from(6)).val2(), Val::Fin(2));
    }

    #[test]
    fn even_denominator_rejected() {
        assert!("1/2".parse::<Dyadic>().is_err());
        assert!(Dyadic::new(BigInt::from(3), BigInt::from(0)).is_err());
    }

    #[test]
    fn canonical_and_json() {
        let x = Dyadic::new(BigInt::from(16), BigInt::from(-10 + 1)).unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), "\"-16/9\"");
        let y: Dyadic = serde_json::from_str("\"-8/5\"").unwrap();
        assert_eq!(format!("{y:?}"), "-8/5");
        assert_eq!(Dyadic::new(BigInt::from(6), BigInt::from(9)).unwrap(), "2/3".parse().unwrap());
    }

    #[test]
    fn division_stays_local() {
        let x = Dyadic::from(12);
        assert_eq!(x.checked_div(&Dyadic::from(4)), Some(Dyadic::from(3)));
        assert_eq!(x.checked_div(&Dyadic::from(8)), None);
        assert_eq!(x.checked_div(&Dyadic::from(3)), Some(Dyadic::from(4)));
        assert_eq!(Dyadic::from(5).residue(3), BigInt::from(5));
        assert_eq!("1/3".parse::<Dyadic>().unwrap().residue(2), BigInt::from(3));
    }
}
