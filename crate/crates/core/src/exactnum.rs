//! Exact arithmetic in Q and real quadratic fields Q(sqrt D).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("square root of negative value {0}")]
    Domain(String),
    #[error("cannot combine values from Q(sqrt {0}) and Q(sqrt {1})")]
    FieldMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Value `a + b*sqrt(d)`. Canonical: `b == 0` iff `d == 0`.
///
/// Arithmetic operators panic when both operands are irrational over different
/// fields; use the `try_*` methods where that can legitimately happen.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    a: Rational,
    b: Rational,
    d: u64,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            a: Rational::zero(),
            b: Rational::zero(),
            d: 0,
        }
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Self {
        Scalar::rational(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Scalar::rational(rat(n, d))
    }

    pub fn rational(a: Rational) -> Self {
        Scalar {
            a,
            b: Rational::zero(),
            d: 0,
        }
    }

    /// Builds `a + b*sqrt(d)`. `d` must be square-free (1 is folded into `a`).
    pub fn new(a: Rational, b: Rational, d: u64) -> Self {
        if d == 1 {
            return Scalar::rational(a + b);
        }
        if b.is_zero() || d == 0 {
            Scalar::rational(a)
        } else {
            Scalar { a, b, d }
        }
    }

    /// `sqrt(d)` for square-free `d`.
    pub fn sqrt_of(d: u64) -> Self {
        Scalar::new(Rational::zero(), Rational::one(), d)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// Radicand of the field, 0 for rational values.
    pub fn field(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<&Rational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.to_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|n| n.to_i64())
    }

    pub fn is_integer(&self) -> bool {
        self.to_integer().is_some()
    }

    /// Floating approximation. Only for display-free diagnostics and oracles.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.d == 0 {
            a
        } else {
            a + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
        }
    }

    pub fn conj(&self) -> Self {
        Scalar {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// Field norm `a^2 - b^2 d`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(BigInt::from(self.d))
    }

    /// Exact sign of `a + b*sqrt(d)`.
    pub fn signum(&self) -> i32 {
        let sa = rsign(&self.a);
        let sb = rsign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: compare a^2 with b^2 d.
        match rsign(&self.norm()) {
            0 => 0,
            1 => sa,
            _ => sb,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    fn join(&self, o: &Scalar) -> Result<u64, NumError> {
        match (self.d, o.d) {
            (0, d) | (d, 0) => Ok(d),
            (x, y) if x == y => Ok(x),
            (x, y) => Err(NumError::FieldMismatch(x, y)),
        }
    }

    pub fn try_add(&self, o: &Scalar) -> Result<Scalar, NumError> {
        let d = self.join(o)?;
        Ok(Scalar::new(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn try_sub(&self, o: &Scalar) -> Result<Scalar, NumError> {
        self.try_add(&-o)
    }

    pub fn try_mul(&self, o: &Scalar) -> Result<Scalar, NumError> {
        let d = self.join(o)?;
        let dr = Rational::from_integer(BigInt::from(d));
        Ok(Scalar::new(
            &self.a * &o.a + &self.b * &o.b * dr,
            &self.a * &o.b + &self.b * &o.a,
            d,
        ))
    }

    pub fn inv(&self) -> Result<Scalar, NumError> {
        if self.is_zero() {
            return Err(NumError::DivisionByZero);
        }
        let n = self.norm();
        Ok(Scalar::new(&self.a / &n, -(&self.b / &n), self.d))
    }

    pub fn try_div(&self, o: &Scalar) -> Result<Scalar, NumError> {
        self.try_mul(&o.inv()?)
    }

    pub fn scale(&self, r: &Rational) -> Scalar {
        Scalar::new(&self.a * r, &self.b * r, self.d)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut acc = Scalar::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        if self.d == 0 {
            return self.a.floor().to_integer();
        }
        // |b| sqrt(d) = sqrt(u/v) = sqrt(u v)/v
        let bb = &self.b * &self.b * Rational::from_integer(BigInt::from(self.d));
        let uv = bb.numer() * bb.denom();
        let s = uv.sqrt();
        let approx = if self.b.is_positive() {
            &self.a + Rational::new(s, bb.denom().clone())
        } else {
            &self.a - Rational::new(s, bb.denom().clone())
        };
        let mut c = approx.floor().to_integer();
        loop {
            let diff = self - &Scalar::rational(Rational::from_integer(c.clone()));
            if diff.is_negative() {
                c -= 1;
                continue;
            }
            let next = self - &Scalar::rational(Rational::from_integer(&c + 1));
            if next.signum() >= 0 {
                c += 1;
                continue;
            }
            return c;
        }
    }

    /// Nearest integer to `self * 10^places` with ties to even.
    fn round_scaled(&self, places: u32) -> BigInt {
        let scale = Rational::from_integer(BigInt::from(10u32).pow(places));
        let y = self.scale(&scale);
        let fl = y.floor();
        let frac = &y - &Scalar::rational(Rational::from_integer(fl.clone()));
        match (&frac - &Scalar::frac(1, 2)).signum() {
            1 => fl + 1,
            -1 => fl,
            _ if fl.is_even() => fl,
            _ => fl + 1,
        }
    }

    /// Decimal rendering with `places` fractional digits, round-half-even,
    /// trailing zeros (and a bare point) dropped: 16.333, 88.2, 21.
    pub fn to_decimal(&self, places: u32) -> String {
        let n = self.round_scaled(places);
        if n.is_zero() {
            return "0".to_string();
        }
        let neg = n.sign() == Sign::Minus;
        let digits = n.abs().to_string();
        let p = places as usize;
        let padded = if digits.len() <= p {
            format!("{}{}", "0".repeat(p + 1 - digits.len()), digits)
        } else {
            digits
        };
        let (int_part, frac_part) = padded.split_at(padded.len() - p);
        let frac_part = frac_part.trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(int_part);
        if !frac_part.is_empty() {
            out.push('.');
            out.push_str(frac_part);
        }
        out
    }

    pub fn render3(&self) -> String {
        self.to_decimal(3)
    }
}

fn rsign(r: &Rational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::rational(r)
    }
}

impl From<&Rational> for Scalar {
    fn from(r: &Rational) -> Self {
        Scalar::rational(r.clone())
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if !self.a.is_zero() {
            write!(f, "{}", self.a)?;
            if self.b.is_positive() {
                write!(f, "+")?;
            }
        }
        if self.b == Rational::one() {
            write!(f, "sqrt({})", self.d)
        } else if self.b == -Rational::one() {
            write!(f, "-sqrt({})", self.d)
        } else {
            write!(f, "{}*sqrt({})", self.b, self.d)
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                self.$try(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);
binop!(Div, div, try_div);

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = &*self - o;
    }
}

impl MulAssign<&Scalar> for Scalar {
    fn mul_assign(&mut self, o: &Scalar) {
        *self = &*self * o;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

/// Writes `n = r^2 * s` with `s` square-free; returns `(r, s)`.
pub fn square_free_part(n: &BigUint) -> (BigUint, BigUint) {
    if n.is_zero() {
        return (BigUint::zero(), BigUint::zero());
    }
    let root = n.sqrt();
    if &root * &root == *n {
        return (root, BigUint::one());
    }
    let mut m = n.clone();
    let mut r = BigUint::one();
    let mut s = BigUint::one();
    let mut p = BigUint::from(2u32);
    // Trial division up to the cube root; the cofactor is then 1, a prime,
    // a prime square or a product of two distinct primes.
    while &p * &p * &p <= m {
        let pp = &p * &p;
        while (&m % &pp).is_zero() {
            m /= &pp;
            r *= &p;
        }
        if (&m % &p).is_zero() {
            m /= &p;
            s *= &p;
        }
        p += 1u32;
    }
    let q = m.sqrt();
    if &q * &q == m && !m.is_one() {
        r *= q;
    } else {
        s *= m;
    }
    (r, s)
}

/// Square root of a nonnegative rational as `r` or `r*sqrt(D)`.
pub fn sqrt_exact(x: &Rational) -> Result<Scalar, NumError> {
    if x.is_negative() {
        return Err(NumError::Domain(x.to_string()));
    }
    if x.is_zero() {
        return Ok(Scalar::zero());
    }
    // sqrt(p/q) = sqrt(p q)/q
    let pq = (x.numer() * x.denom()).to_biguint().expect("positive");
    let (r, s) = square_free_part(&pq);
    let coeff = Rational::new(BigInt::from(r), x.denom().clone());
    match s.to_u64() {
        Some(1) => Ok(Scalar::rational(coeff)),
        Some(d) => Ok(Scalar::new(Rational::zero(), coeff, d)),
        None => panic!("radicand {s} exceeds the supported range"),
    }
}

/// Square root within Q, if there is one.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Rational::new(n, d))
}

pub fn is_perfect_square(x: &Rational) -> bool {
    rational_sqrt(x).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_exact(&rat_int(4)).unwrap(), Scalar::int(2));
        assert_eq!(sqrt_exact(&rat(60, 15)).unwrap(), Scalar::int(2));
        let s5 = sqrt_exact(&rat_int(5)).unwrap();
        assert_eq!(
            (s5.a().clone(), s5.b().clone(), s5.field()),
            (rat_int(0), rat_int(1), 5)
        );
        assert_eq!(
            sqrt_exact(&rat(1, 8)).unwrap(),
            Scalar::new(rat_int(0), rat(1, 4), 2)
        );
        assert!(matches!(sqrt_exact(&rat_int(-1)), Err(NumError::Domain(_))));
    }

    #[test]
    fn perfect_squares() {
        assert!(is_perfect_square(&(rat_int(84) + rat_int(16))));
        assert!(is_perfect_square(&(rat_int(80) + rat(64, 9))));
        let k = 4;
        assert!(!is_perfect_square(&rat_int(k * k + 12 * k + 4)));
        assert!(!is_perfect_square(&rat_int(-4)));
    }

    #[test]
    fn square_free() {
        let (r, s) = square_free_part(&BigUint::from(72u32));
        assert_eq!((r, s), (BigUint::from(6u32), BigUint::from(2u32)));
        let (r, s) = square_free_part(&BigUint::from(49u32 * 11));
        assert_eq!((r, s), (BigUint::from(7u32), BigUint::from(11u32)));
        let (r, s) = square_free_part(&BigUint::from(101u32 * 101 * 3));
        assert_eq!((r, s), (BigUint::from(101u32), BigUint::from(3u32)));
    }

    #[test]
    fn sign_of_conjugates() {
        let phi = Scalar::new(rat(-1, 2), rat(1, 2), 5);
        assert!(phi.is_positive());
        assert!(phi.conj().is_negative());
        assert_eq!((&phi * &phi.conj()), Scalar::int(-1));
        assert_eq!(Scalar::new(rat_int(3), rat_int(-2), 2).signum(), 1);
        assert_eq!(Scalar::new(rat_int(2), rat_int(-2), 2).signum(), -1);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Scalar::frac(49, 3).render3(), "16.333");
        assert_eq!(Scalar::frac(441, 5).render3(), "88.2");
        assert_eq!(Scalar::int(21).render3(), "21");
        assert_eq!(Scalar::frac(1849, 7).render3(), "264.143");
        assert_eq!(Scalar::frac(225, 16).render3(), "14.062");
        assert_eq!(Scalar::frac(75, 16).render3(), "4.688");
        assert_eq!(Scalar::frac(-1, 2000).render3(), "0");
        assert_eq!(Scalar::frac(-3, 2000).render3(), "-0.002");
        assert_eq!(Scalar::frac(-15, 1).render3(), "-15");
        assert_eq!(Scalar::sqrt_of(2).render3(), "1.414");
        assert_eq!(Scalar::new(rat(-1, 2), rat(1, 2), 5).render3(), "0.618");
        assert_eq!(Scalar::new(rat(-1, 2), rat(-1, 2), 5).render3(), "-1.618");
    }

    #[test]
    fn display_exact() {
        assert_eq!(
            Scalar::new(rat(-1, 2), rat(1, 2), 5).to_string(),
            "-1/2+1/2*sqrt(5)"
        );
        assert_eq!(Scalar::sqrt_of(2).to_string(), "sqrt(2)");
        assert_eq!(Scalar::frac(7, 3).to_string(), "7/3");
    }

    #[test]
    fn mixed_fields_rejected() {
        let x = Scalar::sqrt_of(2);
        let y = Scalar::sqrt_of(3);
        assert_eq!(x.try_add(&y), Err(NumError::FieldMismatch(2, 3)));
        assert_eq!(x.try_add(&Scalar::int(1)).unwrap().field(), 2);
    }
}
