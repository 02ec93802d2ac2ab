use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use scheme_forge::exactnum::{rat, Scalar};

const FIELDS: [u64; 4] = [0, 2, 5, 13];

fn scalar_in(d: u64) -> impl Strategy<Value = Scalar> {
    (-60i64..60, 1i64..12, -60i64..60, 1i64..12).prop_map(move |(an, ad, bn, bd)| {
        if d == 0 {
            Scalar::frac(an, ad)
        } else {
            Scalar::new(rat(an, ad), rat(bn, bd), d)
        }
    })
}

fn triple() -> impl Strategy<Value = (Scalar, Scalar, Scalar)> {
    prop::sample::select(FIELDS.to_vec())
        .prop_flat_map(|d| (scalar_in(d), scalar_in(d), scalar_in(d)))
}

const SCALE_DIGITS: u32 = 40;

/// Bracket for `x * 10^k * N` with N = 10^40, from integer square roots.
fn bracket(x: &Scalar, k: u32) -> (BigInt, BigInt) {
    let n = BigInt::from(10).pow(SCALE_DIGITS);
    let s = BigInt::from(10).pow(k);
    let a: BigRational = x.a() * BigRational::from_integer(&s * &n);
    let b: BigRational = x.b() * BigRational::from_integer(s);
    let root: BigInt = (BigInt::from(x.field()) * &n * &n).sqrt();
    let lo_r: BigInt = if b.is_negative() {
        &root + 1
    } else {
        root.clone()
    };
    let hi_r: BigInt = if b.is_negative() { root } else { root + 1 };
    let lo: BigRational = a.clone() + &b * BigRational::from_integer(lo_r);
    let hi: BigRational = a + b * BigRational::from_integer(hi_r);
    (lo.floor().to_integer(), hi.ceil().to_integer())
}

fn oracle_sign(x: &Scalar) -> i32 {
    let (lo, hi) = bracket(x, 0);
    if lo.is_positive() {
        1
    } else if hi.is_negative() {
        -1
    } else {
        assert!(
            x.a().is_zero() && x.b().is_zero(),
            "unresolved bracket for {x}"
        );
        0
    }
}

/// Round-half-even of 1000 x, then plain decimal formatting.
fn oracle_render3(x: &Scalar) -> String {
    let n = if x.field() == 0 {
        let y = x.a() * BigRational::from_integer(BigInt::from(1000));
        let (q, r) = y.numer().div_mod_floor(y.denom());
        let twice = r * 2;
        if twice > *y.denom() || (twice == *y.denom() && q.is_odd()) {
            q + 1
        } else {
            q
        }
    } else {
        // no ties off the rationals: the bracket fixes floor(1000x + 1/2)
        let big = BigInt::from(10).pow(SCALE_DIGITS);
        let half: BigInt = &big / BigInt::from(2);
        let (lo, hi) = bracket(x, 3);
        let a: BigInt = (lo + &half).div_floor(&big);
        let b: BigInt = (hi + &half).div_floor(&big);
        assert_eq!(a, b, "bracket too wide for {x}");
        a
    };
    if n.is_zero() {
        return "0".into();
    }
    let sign = if n.is_negative() { "-" } else { "" };
    let (q, r) = n.abs().div_rem(&BigInt::from(1000));
    let frac = format!("{r:03}");
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{q}")
    } else {
        format!("{sign}{q}.{frac}")
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn field_axioms((x, y, z) in triple()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!((&x + &y) + &z, &x + (&y + &z));
        prop_assert_eq!((&x * &y) * &z, &x * (&y * &z));
        prop_assert_eq!(&x * (&y + &z), &x * &y + &x * &z);
        prop_assert_eq!(&x - &x, Scalar::zero());
        prop_assert_eq!(&x + &Scalar::zero(), x.clone());
        prop_assert_eq!(&x * &Scalar::one(), x.clone());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.inv().unwrap(), Scalar::one());
            prop_assert_eq!(&(&y / &x) * &x, y.clone());
        } else {
            prop_assert!(x.inv().is_err());
        }
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert_eq!((&x * &y).conj(), x.conj() * y.conj());
        prop_assert_eq!(Scalar::rational(x.norm()), &x * &x.conj());
    }

    #[test]
    fn ordering_and_sign_match_oracle((x, y, _z) in triple()) {
        prop_assert_eq!(x.signum(), oracle_sign(&x));
        let diff = &x - &y;
        prop_assert_eq!(x.cmp(&y) as i32, oracle_sign(&diff));
        prop_assert_eq!(x.abs().signum() >= 0, true);
        let big = BigInt::from(10).pow(SCALE_DIGITS);
        let (lo, hi) = bracket(&x, 0);
        if x.field() == 0 {
            prop_assert_eq!(x.floor(), x.a().floor().to_integer());
        } else {
            let f = lo.div_floor(&big);
            prop_assert_eq!(&f, &hi.div_floor(&big));
            prop_assert_eq!(x.floor(), f);
        }
    }

    #[test]
    fn render3_matches_oracle((x, _y, _z) in triple()) {
        prop_assert_eq!(x.render3(), oracle_render3(&x));
    }

    #[test]
    fn render3_halves_round_to_even(n in -200000i64..200000) {
        // n/2000 hits exact thousandth halves whenever n is odd
        let x = Scalar::frac(n, 2000);
        prop_assert_eq!(x.render3(), oracle_render3(&x));
    }
}

#[test]
fn mixed_fields_are_rejected() {
    let a = Scalar::sqrt_of(2);
    let b = Scalar::sqrt_of(5);
    assert!(a.try_add(&b).is_err());
    assert!(a.try_mul(&b).is_err());
    assert_eq!(a.try_add(&Scalar::int(3)).unwrap().field(), 2);
}

#[test]
fn fixed_renderings() {
    assert_eq!(Scalar::frac(225, 16).render3(), "14.062");
    assert_eq!(Scalar::frac(75, 16).render3(), "4.688");
    assert_eq!(Scalar::frac(49, 3).render3(), "16.333");
    assert_eq!(Scalar::frac(441, 5).render3(), "88.2");
    assert_eq!((Scalar::int(1) + Scalar::sqrt_of(5)).render3(), "3.236");
}
