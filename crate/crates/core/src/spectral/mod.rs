//! Primitive idempotents, eigenmatrices, Krein parameters and
//! metric/cometric orderings.

pub mod poly;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exactnum::{square_free_part, Rational, Scalar};
use crate::schemes::IntersectionTensor;
use poly::{isolate_roots, RatPoly, ScalarPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("unsupported splitting field: {0}")]
    UnsupportedField(String),
    #[error("negative Krein parameter q^{h}_{{{i},{j}}} = {value}")]
    KreinViolation {
        h: usize,
        i: usize,
        j: usize,
        value: String,
    },
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// Which number fields the eigenvalue computation may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FieldPolicy {
    #[default]
    Auto,
    /// Reject anything irrational.
    Rational,
    /// Require Q(sqrt D) for this square-free D (or Q).
    Quadratic(u64),
}

/// Environment variable overriding the generic-combination seed sequence.
pub const SEED_ENV: &str = "SCHEME_FORGE_SEED";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigendata {
    v: u64,
    d: usize,
    field: u64,
    valencies: Vec<u64>,
    m: Vec<u64>,
    /// `p[j][i]`: eigenvalue of A_i on E_j.
    p: Vec<Vec<Scalar>>,
    /// `q[i][j]`: E_j = (1/v) sum_i Q_ij A_i.
    q: Vec<Vec<Scalar>>,
}

impl Eigendata {
    /// Assembles eigendata from a first eigenmatrix given as rows `P[j]`.
    pub fn from_p(valencies: Vec<u64>, m: Vec<u64>, p: Vec<Vec<Scalar>>) -> Self {
        let d = valencies.len() - 1;
        let q = (0..=d)
            .map(|i| {
                (0..=d)
                    .map(|j| {
                        p[j][i].scale(&Rational::new(
                            BigInt::from(m[j]),
                            BigInt::from(valencies[i]),
                        ))
                    })
                    .collect()
            })
            .collect();
        let field = p.iter().flatten().map(Scalar::field).max().unwrap_or(0);
        Eigendata {
            v: valencies.iter().sum(),
            d,
            field,
            valencies,
            m,
            p,
            q,
        }
    }

    pub fn v(&self) -> u64 {
        self.v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Radicand D of the field Q(sqrt D) holding P and Q; 0 for Q.
    pub fn field(&self) -> u64 {
        self.field
    }

    pub fn valencies(&self) -> &[u64] {
        &self.valencies
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.m
    }

    pub fn m(&self, j: usize) -> u64 {
        self.m[j]
    }

    /// P_{ji}: eigenvalue of relation i on idempotent j.
    pub fn p(&self, j: usize, i: usize) -> &Scalar {
        &self.p[j][i]
    }

    /// Q_{ij}.
    pub fn q(&self, i: usize, j: usize) -> &Scalar {
        &self.q[i][j]
    }

    pub fn p_matrix(&self) -> &[Vec<Scalar>] {
        &self.p
    }

    pub fn q_matrix(&self) -> &[Vec<Scalar>] {
        &self.q
    }

    /// Coordinates of E_j in the basis A_0..A_d.
    pub fn idempotent(&self, j: usize) -> Vec<Scalar> {
        let inv = Rational::new(BigInt::one(), BigInt::from(self.v));
        (0..=self.d).map(|i| self.q[i][j].scale(&inv)).collect()
    }

    /// Same data with idempotents renamed: new `k` is old `perm[k]`.
    pub fn permuted_idempotents(&self, perm: &[usize]) -> Eigendata {
        Eigendata::from_p(
            self.valencies.clone(),
            perm.iter().map(|&j| self.m[j]).collect(),
            perm.iter().map(|&j| self.p[j].clone()).collect(),
        )
    }

    /// Same data with relations renamed: new `k` is old `perm[k]`.
    pub fn permuted_relations(&self, perm: &[usize]) -> Eigendata {
        Eigendata::from_p(
            perm.iter().map(|&i| self.valencies[i]).collect(),
            self.m.clone(),
            self.p
                .iter()
                .map(|row| perm.iter().map(|&i| row[i].clone()).collect())
                .collect(),
        )
    }

    /// PQ = QP = vI, Q_ij = P_ji m_j / v_i and sum m_j = v.
    pub fn check(&self) -> Result<(), SpectralError> {
        let r = self.d + 1;
        let v = Scalar::int(self.v as i64);
        for a in 0..r {
            for b in 0..r {
                let pq: Scalar = (0..r).map(|l| &self.p[a][l] * &self.q[l][b]).sum();
                let qp: Scalar = (0..r).map(|l| &self.q[a][l] * &self.p[l][b]).sum();
                let want = if a == b { v.clone() } else { Scalar::zero() };
                if pq != want || qp != want {
                    return Err(SpectralError::Internal(format!("PQ != vI at ({a},{b})")));
                }
            }
        }
        if self.m.iter().sum::<u64>() != self.v {
            return Err(SpectralError::Internal(
                "multiplicities do not sum to v".into(),
            ));
        }
        Ok(())
    }
}

/// Intersection matrix of sum_i c_i A_i in the regular representation.
fn intersection_matrix(p: &IntersectionTensor, c: &[i64]) -> Vec<Vec<i64>> {
    let r = p.d() + 1;
    (0..r)
        .map(|h| {
            (0..r)
                .map(|j| (0..r).map(|i| c[i] * p.p(h, i, j) as i64).sum())
                .collect()
        })
        .collect()
}

/// Characteristic polynomial det(xI - M) by Faddeev-LeVerrier.
pub fn char_poly(m: &[Vec<i64>]) -> RatPoly {
    let n = m.len();
    let a: Vec<Vec<Rational>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|&x| Rational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut mk = vec![vec![Rational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Rational::zero();
                for l in 0..n {
                    if !a[i][l].is_zero() && !mk[l][j].is_zero() {
                        s += &a[i][l] * &mk[l][j];
                    }
                }
                if i == j {
                    s += &coeffs[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        let mut tr = Rational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &a[i][l] * &next[l][i];
            }
        }
        coeffs[n - k] = -tr / Rational::from_integer(BigInt::from(k));
        mk = next;
    }
    RatPoly::new(coeffs)
}

/// Roots of a square-free polynomial whose roots are real and lie in a
/// common field Q(sqrt D); ascending order.
pub fn quadratic_roots(p: &RatPoly) -> Result<(u64, Vec<Scalar>), SpectralError> {
    let two = Rational::from_integer(BigInt::from(2));
    let eps = Rational::one()
        / (Rational::from_integer(BigInt::from(4)) * p.root_bound() + Rational::one());
    let iv = isolate_roots(p, &eps);
    if iv.len() != p.degree() {
        return Err(SpectralError::UnsupportedField(format!(
            "{} of {} roots are real",
            iv.len(),
            p.degree()
        )));
    }
    let mut roots: Vec<Option<Scalar>> = vec![None; iv.len()];
    for (k, (lo, hi)) in iv.iter().enumerate() {
        let t = Rational::from_integer(hi.floor().to_integer());
        if &t > lo && p.eval(&t).is_zero() {
            roots[k] = Some(Scalar::rational(t));
        }
    }
    let mut field = 0u64;
    for a in 0..iv.len() {
        if roots[a].is_some() {
            continue;
        }
        for b in a + 1..iv.len() {
            if roots[b].is_some() {
                continue;
            }
            let (ref la, ref ha) = iv[a];
            let (ref lb, ref hb) = iv[b];
            let s_lo = la + lb;
            let s_hi = ha + hb;
            let prods = [la * lb, la * hb, ha * lb, ha * hb];
            let n_lo = prods.iter().min().unwrap().clone();
            let n_hi = prods.iter().max().unwrap().clone();
            let mut s = s_lo.floor().to_integer();
            let mut found = None;
            while Rational::from_integer(s.clone()) <= s_hi && found.is_none() {
                let mut n = n_lo.floor().to_integer();
                while Rational::from_integer(n.clone()) <= n_hi {
                    let quad = RatPoly::new(vec![
                        Rational::from_integer(n.clone()),
                        -Rational::from_integer(s.clone()),
                        Rational::one(),
                    ]);
                    if p.div_rem(&quad).1.is_zero() {
                        found = Some((s.clone(), n.clone()));
                        break;
                    }
                    n += 1;
                }
                s += 1;
            }
            let Some((s, n)) = found else { continue };
            let disc = &s * &s - BigInt::from(4) * &n;
            let Some(disc_u) = disc.to_biguint().filter(|x| !x.is_zero()) else {
                continue;
            };
            let (rad, sf) = square_free_part(&disc_u);
            if sf == BigUint::one() {
                continue;
            }
            let sf = sf.to_u64().ok_or_else(|| {
                SpectralError::UnsupportedField(format!("radicand {sf} too large"))
            })?;
            if field != 0 && field != sf {
                return Err(SpectralError::UnsupportedField(format!(
                    "roots need both Q(sqrt {field}) and Q(sqrt {sf})"
                )));
            }
            field = sf;
            let half_s = Rational::from_integer(s) / &two;
            let half_r = Rational::from_integer(BigInt::from(rad)) / &two;
            let lower = Scalar::new(half_s.clone(), -half_r.clone(), sf);
            let upper = Scalar::new(half_s, half_r, sf);
            let inside = |x: &Scalar, lo: &Rational, hi: &Rational| {
                (x - &Scalar::rational(lo.clone())).is_positive()
                    && (x - &Scalar::rational(hi.clone())).signum() <= 0
            };
            if !inside(&lower, la, ha) || !inside(&upper, lb, hb) {
                return Err(SpectralError::Internal(
                    "quadratic factor roots outside isolating intervals".into(),
                ));
            }
            roots[a] = Some(lower);
            roots[b] = Some(upper);
            break;
        }
    }
    if roots.iter().any(Option::is_none) {
        return Err(SpectralError::UnsupportedField(
            "eigenvalues of degree greater than 2".into(),
        ));
    }
    Ok((field, roots.into_iter().map(Option::unwrap).collect()))
}

/// Coefficient vectors c_1..c_d tried in turn for the generic element.
fn combination(attempt: usize, d: usize, seed: Option<u64>) -> Vec<i64> {
    const PRIMES: [i64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let mut c = vec![0i64; d + 1];
    match (seed, attempt) {
        (None, 0) => c[1..].iter_mut().for_each(|x| *x = 1),
        (None, 1) => (1..=d).for_each(|i| c[i] = i as i64 + 1),
        (None, 2) => (1..=d).for_each(|i| {
            c[i] = PRIMES[(i - 1) % PRIMES.len()] * (1 + ((i - 1) / PRIMES.len()) as i64)
        }),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0x5eed) ^ attempt as u64);
            (1..=d).for_each(|i| c[i] = rng.gen_range(1..=97));
        }
    }
    c
}

/// Seed from the environment, if set and numeric.
pub fn env_seed() -> Option<u64> {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
}

/// Exact primitive idempotents, P, Q and multiplicities.
pub fn eigendata(p: &IntersectionTensor) -> Result<Eigendata, SpectralError> {
    eigendata_with(p, FieldPolicy::Auto)
}

pub fn eigendata_with(
    p: &IntersectionTensor,
    policy: FieldPolicy,
) -> Result<Eigendata, SpectralError> {
    let d = p.d();
    let r = d + 1;
    let seed = env_seed();
    let mut chosen = None;
    for attempt in 0..64 {
        let c = combination(attempt, d, seed);
        let l = intersection_matrix(p, &c);
        let cp = char_poly(&l);
        if cp.is_square_free() {
            chosen = Some((l, cp));
            break;
        }
    }
    let (l, cp) = chosen
        .ok_or_else(|| SpectralError::Internal("no generic element with simple spectrum".into()))?;
    let (field, theta) = quadratic_roots(&cp)?;
    match policy {
        FieldPolicy::Rational if field != 0 => {
            return Err(SpectralError::UnsupportedField(format!(
                "eigenvalues need Q(sqrt {field})"
            )));
        }
        FieldPolicy::Quadratic(dd) if field != 0 && field != dd => {
            return Err(SpectralError::UnsupportedField(format!(
                "eigenvalues need Q(sqrt {field}), not Q(sqrt {dd})"
            )));
        }
        _ => {}
    }
    let v = p.v();
    let vals = p.valencies();
    let lmat: Vec<Vec<Scalar>> = l
        .iter()
        .map(|row| row.iter().map(|&x| Scalar::int(x)).collect())
        .collect();
    let mut rows: Vec<(u64, Vec<Scalar>)> = Vec::with_capacity(r);
    for j in 0..r {
        let mut e = vec![Scalar::zero(); r];
        e[0] = Scalar::one();
        for k in 0..r {
            if k == j {
                continue;
            }
            let denom = (&theta[j] - &theta[k])
                .inv()
                .map_err(|_| SpectralError::Internal("repeated root".into()))?;
            let be: Vec<Scalar> = (0..r)
                .map(|h| {
                    (0..r)
                        .filter(|&t| !lmat[h][t].is_zero())
                        .map(|t| &lmat[h][t] * &e[t])
                        .sum()
                })
                .collect();
            e = (0..r)
                .map(|h| (&be[h] - &theta[k] * &e[h]) * &denom)
                .collect();
        }
        // Q_ij = v e_i, m_j = Q_0j, P_ji = Q_ij v_i / m_j
        let vs = Scalar::int(v as i64);
        let m = &e[0] * &vs;
        let m_int = m.to_i64().filter(|&x| x > 0).ok_or_else(|| {
            SpectralError::Internal(format!("multiplicity {m} is not a positive integer"))
        })?;
        let prow: Vec<Scalar> = (0..r)
            .map(|i| {
                e[i].scale(&Rational::new(
                    BigInt::from(v * vals[i]),
                    BigInt::from(m_int),
                ))
            })
            .collect();
        rows.push((m_int as u64, prow));
    }
    let triv = rows
        .iter()
        .position(|(m, row)| {
            *m == 1
                && row
                    .iter()
                    .zip(&vals)
                    .all(|(x, &vi)| *x == Scalar::int(vi as i64))
        })
        .ok_or_else(|| SpectralError::Internal("trivial idempotent not found".into()))?;
    let first = rows.remove(triv);
    rows.sort_by(|a, b| b.1[1..].cmp(&a.1[1..]));
    rows.insert(0, first);
    let e = Eigendata::from_p(
        vals,
        rows.iter().map(|r| r.0).collect(),
        rows.into_iter().map(|r| r.1).collect(),
    );
    e.check()?;
    Ok(e)
}

/// The numbers q^h_ij.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KreinTensor {
    d: usize,
    m: Vec<u64>,
    q: Vec<Scalar>,
}

impl KreinTensor {
    pub fn from_fn(m: Vec<u64>, f: impl Fn(usize, usize, usize) -> Scalar) -> Self {
        let r = m.len();
        let mut q = Vec::with_capacity(r * r * r);
        for h in 0..r {
            for i in 0..r {
                for j in 0..r {
                    q.push(f(h, i, j));
                }
            }
        }
        KreinTensor { d: r - 1, m, q }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.m
    }

    /// q^h_ij.
    #[inline]
    pub fn q(&self, h: usize, i: usize, j: usize) -> &Scalar {
        let r = self.d + 1;
        &self.q[(h * r + i) * r + j]
    }

    pub fn permuted(&self, perm: &[usize]) -> KreinTensor {
        KreinTensor::from_fn(perm.iter().map(|&j| self.m[j]).collect(), |h, i, j| {
            self.q(perm[h], perm[i], perm[j]).clone()
        })
    }

    /// Nonnegativity, q^0_jj = m_j, symmetry, row sums and m_h q^h_ij = m_i q^i_hj.
    pub fn check_invariants(&self) -> Result<(), String> {
        let r = self.d + 1;
        let ms: Vec<Scalar> = self.m.iter().map(|&x| Scalar::int(x as i64)).collect();
        for h in 0..r {
            for i in 0..r {
                let mut row = Scalar::zero();
                for j in 0..r {
                    let x = self.q(h, i, j);
                    if x.is_negative() {
                        return Err(format!("q^{h}_{{{i},{j}}} = {x} < 0"));
                    }
                    if x != self.q(h, j, i) {
                        return Err(format!("q^{h}_{{{i},{j}}} not symmetric"));
                    }
                    if &ms[h] * x != &ms[i] * self.q(i, h, j) {
                        return Err(format!("m_h q^{h}_{{{i},{j}}} != m_i q^{i}_{{{h},{j}}}"));
                    }
                    row += x;
                }
                if row != ms[i] {
                    return Err(format!("sum_j q^{h}_{{{i},j}} != m_{i}"));
                }
            }
            if *self.q(0, h, h) != ms[h] {
                return Err(format!("q^0_{{{h},{h}}} != m_{h}"));
            }
        }
        Ok(())
    }
}

/// Krein parameters from the first eigenmatrix.
pub fn krein_tensor(e: &Eigendata) -> Result<KreinTensor, SpectralError> {
    let r = e.d + 1;
    let vals: Vec<Scalar> = e
        .valencies
        .iter()
        .map(|&x| Scalar::int((x * x) as i64))
        .collect();
    let inv_v2: Vec<Scalar> = vals
        .iter()
        .map(|x| x.inv().expect("positive valency"))
        .collect();
    let k = KreinTensor::from_fn(e.m.clone(), |h, i, j| {
        let s: Scalar = (0..r)
            .map(|l| &e.p[i][l] * &e.p[j][l] * &e.p[h][l] * &inv_v2[l])
            .sum();
        s.scale(&Rational::new(
            BigInt::from(e.m[i] * e.m[j]),
            BigInt::from(e.v),
        ))
    });
    for h in 0..r {
        for i in 0..r {
            for j in 0..r {
                if k.q(h, i, j).is_negative() {
                    return Err(SpectralError::KreinViolation {
                        h,
                        i,
                        j,
                        value: k.q(h, i, j).to_string(),
                    });
                }
            }
        }
    }
    Ok(k)
}

/// Krein array of a Q-polynomial ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KreinArray {
    /// `ordering[k]` is the canonical index of E_k.
    pub ordering: Vec<usize>,
    /// b*_0..b*_{d-1}
    pub b: Vec<Scalar>,
    /// c*_1..c*_d, stored at indices 0..d-1
    pub c: Vec<Scalar>,
    /// a*_0..a*_d
    pub a: Vec<Scalar>,
}

impl KreinArray {
    pub fn d(&self) -> usize {
        self.b.len()
    }

    /// c*_i for 1 <= i <= d.
    pub fn c_star(&self, i: usize) -> &Scalar {
        &self.c[i - 1]
    }

    pub fn b_star(&self, i: usize) -> &Scalar {
        &self.b[i]
    }

    pub fn a_star(&self, i: usize) -> &Scalar {
        &self.a[i]
    }

    /// Array built from b* and c* alone, a* filled from b*_0.
    pub fn from_bc(ordering: Vec<usize>, b: Vec<Scalar>, c: Vec<Scalar>) -> Self {
        let d = b.len();
        let m1 = b[0].clone();
        let a = (0..=d)
            .map(|i| {
                let bi = if i < d { b[i].clone() } else { Scalar::zero() };
                let ci = if i > 0 {
                    c[i - 1].clone()
                } else {
                    Scalar::zero()
                };
                &m1 - &bi - &ci
            })
            .collect();
        KreinArray { ordering, b, c, a }
    }

    /// Same b*, c* as another array; orderings are ignored.
    pub fn same_parameters(&self, o: &KreinArray) -> bool {
        self.b == o.b && self.c == o.c
    }

    /// Exact rendering, e.g. `{20, 49/3, 14/3, 1; 1, 14/3, 49/3, 20}`.
    pub fn exact_string(&self) -> String {
        brace(&self.b, &self.c, |x| x.to_string())
    }
}

fn brace(b: &[Scalar], c: &[Scalar], f: impl Fn(&Scalar) -> String) -> String {
    let bs: Vec<String> = b.iter().map(&f).collect();
    let cs: Vec<String> = c.iter().map(&f).collect();
    format!("{{{}; {}}}", bs.join(", "), cs.join(", "))
}

impl fmt::Display for KreinArray {
    /// Three-decimal rendering in braces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", brace(&self.b, &self.c, Scalar::render3))
    }
}

/// Orderings 0, g, ... in which `coef(h, g, j)` is tridiagonal with
/// positive off-diagonal entries. Returns the sequences found.
fn tridiagonal_orderings(
    d: usize,
    nonzero: impl Fn(usize, usize, usize) -> bool,
    positive: impl Fn(usize, usize, usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for g in 1..=d {
        let mut seq = vec![0, g];
        let mut used = vec![false; d + 1];
        used[0] = true;
        used[g] = true;
        let mut ok = true;
        while seq.len() < d + 1 {
            let cur = *seq.last().unwrap();
            let next: Vec<usize> = (0..=d)
                .filter(|&h| !used[h] && nonzero(h, g, cur))
                .collect();
            if next.len() != 1 {
                ok = false;
                break;
            }
            used[next[0]] = true;
            seq.push(next[0]);
        }
        if !ok {
            continue;
        }
        let tri = (0..=d).all(|a| {
            (0..=d).all(|b| {
                let z = !nonzero(seq[a], g, seq[b]);
                if a.abs_diff(b) > 1 {
                    z
                } else if a.abs_diff(b) == 1 {
                    positive(seq[a], g, seq[b])
                } else {
                    true
                }
            })
        });
        if tri {
            out.push(seq);
        }
    }
    out
}

/// Result of the Q-polynomial ordering search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CometricOrderings {
    pub arrays: Vec<KreinArray>,
    /// The scheme is a polygon; the two-ordering cap is not asserted.
    pub cycle: bool,
}

impl CometricOrderings {
    pub fn is_cometric(&self) -> bool {
        !self.arrays.is_empty()
    }
}

pub fn krein_array(k: &KreinTensor, ordering: &[usize]) -> KreinArray {
    let d = k.d;
    let s = ordering;
    KreinArray {
        ordering: s.to_vec(),
        b: (0..d).map(|i| k.q(s[i], s[1], s[i + 1]).clone()).collect(),
        c: (1..=d).map(|i| k.q(s[i], s[1], s[i - 1]).clone()).collect(),
        a: (0..=d).map(|i| k.q(s[i], s[1], s[i]).clone()).collect(),
    }
}

/// Q-polynomial orderings, checked with E_1 only.
pub fn cometric_orderings(
    k: &KreinTensor,
    p: &IntersectionTensor,
) -> Result<CometricOrderings, SpectralError> {
    let seqs = tridiagonal_orderings(
        k.d,
        |h, g, j| !k.q(h, g, j).is_zero(),
        |h, g, j| k.q(h, g, j).is_positive(),
    );
    let arrays: Vec<KreinArray> = seqs.iter().map(|s| krein_array(k, s)).collect();
    let cycle = is_polygon(p);
    if arrays.len() > 2 && !cycle {
        return Err(SpectralError::Internal(format!(
            "{} Q-polynomial orderings on a non-polygon",
            arrays.len()
        )));
    }
    for a in &arrays {
        for i in 0..=a.d() {
            let bi = if i < a.d() {
                a.b[i].clone()
            } else {
                Scalar::zero()
            };
            let ci = if i > 0 {
                a.c[i - 1].clone()
            } else {
                Scalar::zero()
            };
            if &bi + &ci + &a.a[i] != a.b[0] {
                return Err(SpectralError::Internal("c*_i + a*_i + b*_i != m_1".into()));
            }
        }
    }
    Ok(CometricOrderings { arrays, cycle })
}

/// P-polynomial orderings of the relations.
pub fn metric_orderings(p: &IntersectionTensor) -> Vec<Vec<usize>> {
    tridiagonal_orderings(
        p.d(),
        |h, g, j| p.p(h, g, j) != 0,
        |h, g, j| p.p(h, g, j) > 0,
    )
}

/// Distance scheme of a polygon with at least four vertices.
pub fn is_polygon(p: &IntersectionTensor) -> bool {
    let v = p.v();
    v >= 4
        && metric_orderings(p).iter().any(|o| {
            let last = o.len() - 1;
            o.iter().enumerate().skip(1).all(|(k, &i)| {
                let want = if k == last && v.is_multiple_of(2) {
                    1
                } else {
                    2
                };
                p.valency(i) == want
            })
        })
}

/// q_0..q_{d+1} from the three-term recurrence.
pub fn krein_polynomials(a: &KreinArray) -> Vec<ScalarPoly> {
    let d = a.d();
    let mut q = vec![ScalarPoly::constant(Scalar::one())];
    for j in 0..=d {
        // c*_{j+1} q_{j+1} = (x - a*_j) q_j - b*_{j-1} q_{j-1}
        let mut next = q[j].mul_x().sub(&q[j].scale(&a.a[j]));
        if j > 0 {
            next = next.sub(&q[j - 1].scale(&a.b[j - 1]));
        }
        let c = if j < d { a.c[j].clone() } else { Scalar::one() };
        q.push(next.scale(&c.inv().expect("c* positive")));
    }
    q
}

/// Checks vE_j = q_j(vE_1) entrywise and that the roots of q_{d+1} are the Q_{i1}.
pub fn verify_krein_polynomials(
    e: &Eigendata,
    a: &KreinArray,
    q: &[ScalarPoly],
) -> Result<(), SpectralError> {
    let d = e.d;
    let s = &a.ordering;
    for i in 0..=d {
        let x = e.q(i, s[1]);
        for j in 0..=d {
            if q[j].eval(x) != *e.q(i, s[j]) {
                return Err(SpectralError::Internal(format!(
                    "Q_{i},{j} != q_{j}(Q_{i},1)"
                )));
            }
        }
        if !q[d + 1].eval(x).is_zero() {
            return Err(SpectralError::Internal(format!(
                "Q_{i},1 is not a root of q_{}",
                d + 1
            )));
        }
    }
    let mut col: Vec<&Scalar> = (0..=d).map(|i| e.q(i, s[1])).collect();
    col.sort();
    col.dedup();
    if col.len() != d + 1 || q[d + 1].degree() != d + 1 {
        return Err(SpectralError::Internal(
            "column 1 of Q does not give d+1 distinct roots".into(),
        ));
    }
    Ok(())
}

/// Relations sorted by descending Q_{i,1} for the generator of `a`.
pub fn natural_relation_ordering(
    e: &Eigendata,
    a: &KreinArray,
) -> Result<Vec<usize>, SpectralError> {
    let g = a.ordering[1];
    let mut rel: Vec<usize> = (0..=e.d).collect();
    rel.sort_by(|&x, &y| e.q(y, g).cmp(e.q(x, g)));
    for w in rel.windows(2) {
        if e.q(w[0], g) == e.q(w[1], g) {
            return Err(SpectralError::Internal(format!("tie in column {g} of Q")));
        }
    }
    Ok(rel)
}

/// Product in the Bose-Mesner algebra, coordinates in the A_i basis.
pub fn bm_product(p: &IntersectionTensor, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    let r = p.d() + 1;
    (0..r)
        .map(|h| {
            let mut s = Scalar::zero();
            for i in 0..r {
                if x[i].is_zero() {
                    continue;
                }
                for j in 0..r {
                    let c = p.p(h, i, j);
                    if c != 0 && !y[j].is_zero() {
                        s += &(&x[i] * &y[j]).scale(&Rational::from_integer(BigInt::from(c)));
                    }
                }
            }
            s
        })
        .collect()
}
