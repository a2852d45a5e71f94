//! Exact Gaussian rationals `a + b i` with `a, b` in ℚ.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Gq {
    pub re: BigRational,
    pub im: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid gaussian literal `{0}`")]
pub struct ParseGqError(pub String);

impl Gq {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Gq { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        Gq { re, im: BigRational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Gq::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Gq::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn complex(re: (i64, i64), im: (i64, i64)) -> Self {
        Gq {
            re: BigRational::new(BigInt::from(re.0), BigInt::from(re.1)),
            im: BigRational::new(BigInt::from(im.0), BigInt::from(im.1)),
        }
    }

    pub fn i() -> Self {
        Gq { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn zero() -> Self {
        Gq::default()
    }

    pub fn one() -> Self {
        Gq::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Gq { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "inverse of zero");
        Gq { re: &self.re / &n, im: -(&self.im / &n) }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Gq { re: &self.re * q, im: &self.im * q }
    }

    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

fn fmt_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Gq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rat(&self.re));
        }
        let im = if self.im.is_one() {
            "i".to_string()
        } else if (-self.im.clone()).is_one() {
            "-i".to_string()
        } else {
            format!("{} i", fmt_rat(&self.im))
        };
        if self.re.is_zero() {
            return write!(f, "{im}");
        }
        if self.im.is_negative() {
            write!(f, "{}{}", fmt_rat(&self.re), im)
        } else {
            write!(f, "{}+{}", fmt_rat(&self.re), im)
        }
    }
}

fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let valid = |t: &str, signed: bool| {
        let t = if signed { t.strip_prefix(['+', '-']).unwrap_or(t) } else { t };
        !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(n, true) || !valid(d, false) {
        return None;
    }
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Parses the imaginary coefficient written before a trailing `i`.
fn parse_im(s: &str) -> Option<BigRational> {
    match s.trim() {
        "" | "+" => Some(BigRational::one()),
        "-" => Some(-BigRational::one()),
        t => parse_rat(t),
    }
}

impl FromStr for Gq {
    type Err = ParseGqError;

    fn from_str(src: &str) -> Result<Self, Self::Err> {
        let err = || ParseGqError(src.to_string());
        let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err());
        }
        let Some(body) = s.strip_suffix('i') else {
            return parse_rat(&s).map(Gq::real).ok_or_else(err);
        };
        // Split at the last sign that is not leading.
        let split = body
            .char_indices()
            .filter(|&(k, c)| k > 0 && (c == '+' || c == '-'))
            .map(|(k, _)| k)
            .next_back();
        match split {
            Some(k) => {
                let re = parse_rat(&body[..k]).ok_or_else(err)?;
                let im = parse_im(&body[k..]).ok_or_else(err)?;
                Ok(Gq { re, im })
            }
            None => Ok(Gq { re: BigRational::zero(), im: parse_im(body).ok_or_else(err)? }),
        }
    }
}

impl Serialize for Gq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Gq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) => Ok(Gq::int(n)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl From<i64> for Gq {
    fn from(n: i64) -> Self {
        Gq::int(n)
    }
}

impl From<BigRational> for Gq {
    fn from(q: BigRational) -> Self {
        Gq::real(q)
    }
}

impl<'a> Add<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn add(self, o: &Gq) -> Gq {
        Gq { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn sub(self, o: &Gq) -> Gq {
        Gq { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a Gq> for &'a Gq {
    type Output = Gq;
    fn mul(self, o: &Gq) -> Gq {
        Gq {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a Gq> for &'a Gq {
    type Output = Gq;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: &Gq) -> Gq {
        self * &o.inv()
    }
}

impl Neg for &Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl Neg for Gq {
    type Output = Gq;
    fn neg(self) -> Gq {
        Gq { re: -self.re, im: -self.im }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Gq> for Gq {
            type Output = Gq;
            fn $f(self, o: Gq) -> Gq { (&self).$f(&o) }
        }
        impl<'a> $tr<&'a Gq> for Gq {
            type Output = Gq;
            fn $f(self, o: &Gq) -> Gq { (&self).$f(o) }
        }
        impl<'a> $tr<Gq> for &'a Gq {
            type Output = Gq;
            fn $f(self, o: Gq) -> Gq { self.$f(&o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl AddAssign<&Gq> for Gq {
    fn add_assign(&mut self, o: &Gq) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl SubAssign<&Gq> for Gq {
    fn sub_assign(&mut self, o: &Gq) {
        self.re -= &o.re;
        self.im -= &o.im;
    }
}

impl std::iter::Sum for Gq {
    fn sum<I: Iterator<Item = Gq>>(iter: I) -> Gq {
        iter.fold(Gq::zero(), |acc, x| acc + x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print_round_trip() {
        for s in ["0", "3", "-2/3", "1/2+3/4 i", "1-i", "i", "-i", "5/7 i", "-1/2-2 i"] {
            let q: Gq = s.parse().unwrap();
            let back: Gq = q.to_string().parse().unwrap();
            assert_eq!(q, back, "{s}");
        }
        assert_eq!("1/2+3/4 i".parse::<Gq>().unwrap(), Gq::complex((1, 2), (3, 4)));
        assert_eq!("2/4".parse::<Gq>().unwrap().to_string(), "1/2");
        assert_eq!(Gq::complex((1, 1), (-1, 1)).to_string(), "1-i");
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "abc", "1/0", "1//2", "2 i i", "1+", "++1"] {
            assert!(s.parse::<Gq>().is_err(), "{s}");
        }
    }

    #[test]
    fn field_operations() {
        let a = Gq::complex((1, 1), (2, 1));
        let b = Gq::complex((-3, 2), (1, 5));
        assert_eq!(&(&a * &b) / &b, a);
        assert_eq!(&a - &a, Gq::zero());
        assert_eq!(&Gq::i() * &Gq::i(), Gq::int(-1));
        assert!((&a * &a.inv()).is_one());
    }
}
