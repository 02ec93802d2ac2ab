//! Dense univariate polynomials over Q and Q(sqrt D), Sturm root isolation.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exactnum::{Rational, Scalar};

/// Coefficients in ascending degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly(Vec<Rational>);

impl RatPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        RatPoly(c)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_scalar(&self, x: &Scalar) -> Scalar {
        self.0.iter().rev().fold(Scalar::zero(), |acc, c| {
            &acc * x + Scalar::rational(c.clone())
        })
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    pub fn div_rem(&self, div: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let mut rem = self.0.clone();
        let dd = div.degree();
        let lead = div.lead();
        if rem.len() < div.0.len() {
            return (RatPoly::new(vec![]), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = &rem[k + dd] / &lead;
            if !c.is_zero() {
                for (t, dc) in div.0.iter().enumerate() {
                    rem[k + t] -= &c * dc;
                }
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn monic(&self) -> RatPoly {
        let l = self.lead();
        RatPoly::new(self.0.iter().map(|c| c / &l).collect())
    }

    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    pub fn is_square_free(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }

    fn neg(&self) -> RatPoly {
        RatPoly(self.0.iter().map(|c| -c).collect())
    }

    /// Bound on the absolute value of all roots (Cauchy).
    pub fn root_bound(&self) -> Rational {
        let l = self.lead().abs();
        let m = self.0[..self.degree()]
            .iter()
            .map(|c| c.abs() / &l)
            .max()
            .unwrap_or_else(Rational::zero);
        m + Rational::one()
    }
}

pub struct Sturm(Vec<RatPoly>);

impl Sturm {
    pub fn new(p: &RatPoly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        while !chain.last().unwrap().is_zero() {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        Sturm(chain)
    }

    fn variations(&self, x: &Rational) -> usize {
        let mut last = 0i32;
        let mut v = 0;
        for p in &self.0 {
            let s = p.eval(x);
            let s = if s.is_positive() {
                1
            } else if s.is_negative() {
                -1
            } else {
                0
            };
            if s != 0 {
                if last != 0 && s != last {
                    v += 1;
                }
                last = s;
            }
        }
        v
    }

    /// Number of distinct real roots in (a, b].
    pub fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.variations(a) - self.variations(b)
    }
}

/// Disjoint intervals (lo, hi] of width below `eps`, one per real root, ascending.
pub fn isolate_roots(p: &RatPoly, eps: &Rational) -> Vec<(Rational, Rational)> {
    let sturm = Sturm::new(p);
    let r = p.root_bound();
    let two = Rational::from_integer(BigInt::from(2));
    let mut stack = vec![(-r.clone(), r)];
    let mut out = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n == 1 {
            let (mut lo, mut hi) = (lo, hi);
            while &hi - &lo >= *eps {
                let mid = (&lo + &hi) / &two;
                if sturm.count(&lo, &mid) == 1 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            out.push((lo, hi));
            continue;
        }
        let mid = (&lo + &hi) / &two;
        // Upper half pushed first so that roots come out ascending.
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out
}

/// Polynomial with coefficients in Q(sqrt D), ascending degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarPoly(Vec<Scalar>);

impl ScalarPoly {
    pub fn new(mut c: Vec<Scalar>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        ScalarPoly(c)
    }

    pub fn constant(c: Scalar) -> Self {
        ScalarPoly::new(vec![c])
    }

    pub fn x() -> Self {
        ScalarPoly::new(vec![Scalar::zero(), Scalar::one()])
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.0
            .iter()
            .rev()
            .fold(Scalar::zero(), |acc, c| &acc * x + c)
    }

    pub fn mul_x(&self) -> Self {
        let mut c = vec![Scalar::zero()];
        c.extend(self.0.iter().cloned());
        ScalarPoly::new(c)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        ScalarPoly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, o: &ScalarPoly) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Scalar::zero();
        ScalarPoly::new(
            (0..n)
                .map(|k| self.0.get(k).unwrap_or(&z) - o.0.get(k).unwrap_or(&z))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, rat_int};

    fn poly(c: &[i64]) -> RatPoly {
        RatPoly::new(c.iter().map(|&x| rat_int(x)).collect())
    }

    #[test]
    fn division_and_gcd() {
        // (x-1)(x-2)(x+3)
        let p = poly(&[6, -7, 0, 1]);
        let (q, r) = p.div_rem(&poly(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(q, poly(&[-6, 1, 1]));
        assert!(p.is_square_free());
        let sq = poly(&[1, -2, 1]);
        assert!(!sq.is_square_free());
    }

    #[test]
    fn sturm_isolation_of_golden_ratio_roots() {
        // x^2 + x - 1 has roots (-1 +- sqrt5)/2
        let p = poly(&[-1, 1, 1]);
        let iv = isolate_roots(&p, &rat(1, 100));
        assert_eq!(iv.len(), 2);
        assert!(iv[0].1 < rat_int(-1) && iv[1].0 > rat_int(0));
        for (lo, hi) in iv {
            assert!(&hi - &lo < rat(1, 100));
        }
    }

    #[test]
    fn rational_roots_land_on_boundaries() {
        let p = poly(&[0, -1, 0, 1]);
        let iv = isolate_roots(&p, &rat(1, 10));
        assert_eq!(iv.len(), 3);
    }
}
