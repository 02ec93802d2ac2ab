//! Uniform schemes: the a-table, dismantling, the uniform coherent
//! configuration, Q-Higman orderings and the idempotent identities that
//! tie them together.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::{complete, tensor, wreath};
use crate::exactnum::{rat, Scalar};
use crate::imprimitivity::{FibreSystem, ImprimitivitySystem};
use crate::schemes::{
    restrict, verify_scheme, IntersectionTensor, NotAScheme, RelationTable, Restriction,
    SchemeError,
};
use crate::spectral::{
    bm_product, eigendata_with, env_seed, Eigendata, FieldPolicy, KreinTensor, SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniformityError {
    #[error("quotient is not trivial: fibres {u} and {v} meet in relations {found:?}, other pairs in {expected:?}")]
    QuotientNotTrivial {
        u: usize,
        v: usize,
        found: Vec<usize>,
        expected: Vec<usize>,
    },
    #[error(
        "not uniform: fibres {fibres:?}, i={i} j={j} h={h}: {first} paths at {first_pair:?} but {second} at {second_pair:?}"
    )]
    NotUniform {
        fibres: (usize, usize, usize),
        i: usize,
        j: usize,
        h: usize,
        first: u64,
        second: u64,
        first_pair: (usize, usize),
        second_pair: (usize, usize),
    },
    #[error("not Q-Higman: no idempotent ordering fits the dual intersection pattern")]
    NotQHigman,
    #[error(transparent)]
    NotAScheme(#[from] NotAScheme),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

fn internal(msg: impl Into<String>) -> UniformityError {
    UniformityError::Internal(msg.into())
}

/// a^h_ij with A_i^{UV} A_j^{VW} = sum_h a^h_ij A_h^{UW}; `None` where the
/// triple (h, i, j) is not compatible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformData {
    pub w: usize,
    pub i_set: Vec<usize>,
    d: usize,
    a: Vec<Option<u64>>,
}

impl UniformData {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn a(&self, h: usize, i: usize, j: usize) -> Option<u64> {
        let r = self.d + 1;
        self.a[(h * r + i) * r + j]
    }
}

/// Relation sets between fibres: I inside a fibre, the rest across.
fn check_quotient_trivial(
    t: &RelationTable,
    fs: &FibreSystem,
) -> Result<Vec<usize>, UniformityError> {
    let cross: Vec<usize> = (0..=t.d()).filter(|&c| !fs.within(c)).collect();
    for u in 0..fs.w() {
        for v in 0..fs.w() {
            if u == v {
                continue;
            }
            let x = fs.fibres[u][0];
            let found: BTreeSet<usize> = fs.fibres[v].iter().map(|&y| t.cell(x, y)).collect();
            let found: Vec<usize> = found.into_iter().collect();
            // every vertex of U sees the same relations in V once the scheme is imprimitive
            if found != cross {
                return Err(UniformityError::QuotientNotTrivial {
                    u,
                    v,
                    found,
                    expected: cross,
                });
            }
        }
    }
    Ok(cross)
}

type Witness = (u64, (usize, usize));

/// Path counts through V for one fibre triple, keyed by (h, i, j).
fn triple_counts(
    t: &RelationTable,
    fs: &FibreSystem,
    (u, v, w): (usize, usize, usize),
) -> Result<Vec<Option<Witness>>, UniformityError> {
    let r = t.d() + 1;
    let mut table: Vec<Option<Witness>> = vec![None; r * r * r];
    let inside_uv = u == v;
    let inside_vw = v == w;
    let compatible = |c: usize, same: bool| fs.within(c) == same;
    let mut cnt = vec![0u64; r * r];
    for &x in &fs.fibres[u] {
        for &z in &fs.fibres[w] {
            cnt.iter_mut().for_each(|c| *c = 0);
            for &y in &fs.fibres[v] {
                cnt[t.cell(x, y) * r + t.cell(y, z)] += 1;
            }
            let h = t.cell(x, z);
            for i in (0..r).filter(|&i| compatible(i, inside_uv)) {
                for j in (0..r).filter(|&j| compatible(j, inside_vw)) {
                    let value = cnt[i * r + j];
                    let slot = &mut table[(h * r + i) * r + j];
                    match slot {
                        None => *slot = Some((value, (x, z))),
                        Some((prev, pair)) if *prev != value => {
                            return Err(UniformityError::NotUniform {
                                fibres: (u, v, w),
                                i,
                                j,
                                h,
                                first: *prev,
                                second: value,
                                first_pair: *pair,
                                second_pair: (x, z),
                            });
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    Ok(table)
}

/// Checks the quotient is trivial and that one a-table serves every fibre triple.
pub fn is_uniform(
    t: &RelationTable,
    p: &IntersectionTensor,
    fs: &FibreSystem,
) -> Result<UniformData, UniformityError> {
    check_quotient_trivial(t, fs)?;
    let w = fs.w();
    let r = t.d() + 1;
    let triples: Vec<(usize, usize, usize)> = (0..w)
        .flat_map(|u| (0..w).flat_map(move |v| (0..w).map(move |x| (u, v, x))))
        .collect();
    let per_triple: Vec<Result<Vec<Option<Witness>>, UniformityError>> = triples
        .par_iter()
        .map(|&tr| triple_counts(t, fs, tr))
        .collect();
    let mut merged: Vec<Option<(Witness, (usize, usize, usize))>> = vec![None; r * r * r];
    for (tr, res) in triples.iter().zip(per_triple) {
        let table = res?;
        for (idx, entry) in table.into_iter().enumerate() {
            let Some((value, pair)) = entry else { continue };
            match &merged[idx] {
                None => merged[idx] = Some(((value, pair), *tr)),
                Some(((prev, prev_pair), _)) if *prev != value => {
                    let (h, i, j) = (idx / (r * r), (idx / r) % r, idx % r);
                    return Err(UniformityError::NotUniform {
                        fibres: *tr,
                        i,
                        j,
                        h,
                        first: *prev,
                        second: value,
                        first_pair: *prev_pair,
                        second_pair: pair,
                    });
                }
                _ => {}
            }
        }
    }
    let data = UniformData {
        w,
        i_set: fs.i_set.clone(),
        d: t.d(),
        a: merged.into_iter().map(|m| m.map(|((v, _), _)| v)).collect(),
    };
    check_a_to_p(&data, p, fs)?;
    Ok(data)
}

/// p^h_ij is a^h_ij, (w-1) a^h_ij or (w-2) a^h_ij according to which indices lie in I.
fn check_a_to_p(
    u: &UniformData,
    p: &IntersectionTensor,
    fs: &FibreSystem,
) -> Result<(), UniformityError> {
    let r = u.d + 1;
    let w = u.w as u64;
    for h in 0..r {
        for i in 0..r {
            for j in 0..r {
                let (hi, ii, ji) = (fs.within(h), fs.within(i), fs.within(j));
                let (factor, key_ok) = if ii || ji {
                    (1, true)
                } else if hi {
                    (w - 1, true)
                } else {
                    (w.saturating_sub(2), w >= 3)
                };
                let a = u.a(h, i, j).unwrap_or(0);
                let expect = if key_ok { factor * a } else { 0 };
                if p.p(h, i, j) != expect {
                    return Err(internal(format!(
                        "p^{h}_{i},{j} = {} but the a-table gives {expect}",
                        p.p(h, i, j)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Scheme induced on a union of fibres, in compacted labels.
#[derive(Clone, Debug)]
pub struct Dismantled {
    pub fibres: Vec<usize>,
    pub restriction: Restriction,
    pub tensor: IntersectionTensor,
}

pub fn dismantle(
    t: &RelationTable,
    fs: &FibreSystem,
    which: &[usize],
) -> Result<Dismantled, UniformityError> {
    let mut fibres = which.to_vec();
    fibres.sort_unstable();
    fibres.dedup();
    if fibres.len() < 2 || fibres.len() != which.len() || fibres.iter().any(|&f| f >= fs.w()) {
        return Err(UniformityError::Domain(format!(
            "need at least two distinct fibres out of {}, got {which:?}",
            fs.w()
        )));
    }
    let restriction = restrict(t, &fs.union(&fibres))?;
    let tensor = verify_scheme(&restriction.table)?;
    Ok(Dismantled {
        fibres,
        restriction,
        tensor,
    })
}

/// Largest fibre count for which every union is dismantled.
pub const ALL_UNIONS_MAX_W: usize = 6;
/// Unions sampled per size beyond that.
pub const SAMPLED_UNIONS: usize = 20;

fn combinations(w: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, w: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for f in start..w {
            cur.push(f);
            go(f + 1, w, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, w, k, &mut Vec::new(), &mut out);
    out
}

/// Unions of `k` fibres to dismantle: all of them up to w = 6, otherwise a
/// seeded sample that always includes the first k fibres.
pub fn unions_to_check(w: usize, k: usize) -> Vec<Vec<usize>> {
    if w <= ALL_UNIONS_MAX_W {
        return combinations(w, k);
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(env_seed().unwrap_or(0x5eed) ^ ((w as u64) << 8 | k as u64));
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::from([(0..k).collect()]);
    let all: Vec<usize> = (0..w).collect();
    while out.len() < SAMPLED_UNIONS {
        let mut pick: Vec<usize> = all.choose_multiple(&mut rng, k).copied().collect();
        pick.sort_unstable();
        out.insert(pick);
    }
    out.into_iter().collect()
}

/// Dismantles on every checked union of `k` fibres and asserts that all
/// of them share the intersection numbers.
pub fn dismantle_all(
    t: &RelationTable,
    fs: &FibreSystem,
    k: usize,
) -> Result<Vec<Dismantled>, UniformityError> {
    let unions = unions_to_check(fs.w(), k);
    let out: Vec<Dismantled> = unions
        .par_iter()
        .map(|u| dismantle(t, fs, u))
        .collect::<Result<Vec<_>, _>>()?;
    for d in &out[1..] {
        if d.restriction.labels != out[0].restriction.labels || d.tensor != out[0].tensor {
            return Err(internal(format!(
                "dismantled schemes on {:?} and {:?} differ",
                out[0].fibres, d.fibres
            )));
        }
    }
    Ok(out)
}

/// Basic relation S_i^{UV}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicRelation {
    pub class: usize,
    pub from: usize,
    pub to: usize,
}

/// Coherent configuration with basic relations R_i meet U x V.
#[derive(Clone, Debug)]
pub struct CoherentConfiguration {
    pub v: usize,
    pub fibre_of: Vec<usize>,
    pub relations: Vec<BasicRelation>,
    /// Basic relation index of every ordered pair.
    pub cells: Vec<u32>,
    /// `type_matrix[U][V]` = number of basic relations in U x V.
    pub type_matrix: Vec<Vec<usize>>,
    constants: Vec<u64>,
    sparse: Vec<Vec<(usize, usize, u64)>>,
}

impl CoherentConfiguration {
    pub fn rank(&self) -> usize {
        self.relations.len()
    }

    pub fn index(&self, r: BasicRelation) -> Option<usize> {
        self.relations.binary_search(&r).ok()
    }

    /// p^R_{ST}.
    pub fn constant(&self, r: usize, s: usize, t: usize) -> u64 {
        let n = self.rank();
        self.constants[(r * n + s) * n + t]
    }

    /// Product of two matrices given by their value on each basic relation.
    pub fn product(&self, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        self.sparse
            .iter()
            .map(|terms| {
                let mut s = Scalar::zero();
                for &(x, y, c) in terms {
                    if !a[x].is_zero() && !b[y].is_zero() {
                        s += &(&a[x] * &b[y]).scale(&rat(c as i64, 1));
                    }
                }
                s
            })
            .collect()
    }

    /// Matrix of a Bose-Mesner element given in relation coordinates.
    pub fn lift(&self, coords: &[Scalar]) -> Vec<Scalar> {
        self.relations
            .iter()
            .map(|r| coords[r.class].clone())
            .collect()
    }

    /// The block U x V of a matrix, zero elsewhere.
    pub fn block(&self, m: &[Scalar], u: usize, v: usize) -> Vec<Scalar> {
        self.relations
            .iter()
            .zip(m)
            .map(|(r, x)| {
                if r.from == u && r.to == v {
                    x.clone()
                } else {
                    Scalar::zero()
                }
            })
            .collect()
    }

    /// Diagonal indicator I^U.
    pub fn fibre_identity(&self, u: usize) -> Vec<Scalar> {
        self.relations
            .iter()
            .map(|r| {
                if r.class == 0 && r.from == u {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            })
            .collect()
    }

    /// Fusion over all fibre permutations: back to a relation table.
    pub fn fuse(&self) -> RelationTable {
        let v = self.v;
        RelationTable::from_fn(v, |x, y| {
            self.relations[self.cells[x * v + y] as usize].class
        })
        .expect("fusion is a table")
    }
}

/// Fission of a uniform scheme; axioms are checked by brute force and the
/// constants compared against the full and dismantled intersection numbers.
pub fn fission_configuration(
    t: &RelationTable,
    p: &IntersectionTensor,
    fs: &FibreSystem,
    u: &UniformData,
) -> Result<CoherentConfiguration, UniformityError> {
    let w = fs.w();
    let v = t.v();
    let mut relations = Vec::new();
    for a in 0..w {
        for b in 0..w {
            for c in 0..=t.d() {
                if fs.within(c) == (a == b) {
                    relations.push(BasicRelation {
                        class: c,
                        from: a,
                        to: b,
                    });
                }
            }
        }
    }
    relations.sort();
    let n = relations.len();
    let idx = |c: usize, a: usize, b: usize| {
        relations
            .binary_search(&BasicRelation {
                class: c,
                from: a,
                to: b,
            })
            .ok()
    };
    let mut cells = vec![0u32; v * v];
    for x in 0..v {
        for y in 0..v {
            let i = idx(t.cell(x, y), fs.fibre_of[x], fs.fibre_of[y])
                .ok_or_else(|| internal(format!("pair ({x},{y}) falls in no basic relation")))?;
            cells[x * v + y] = i as u32;
        }
    }
    let type_matrix: Vec<Vec<usize>> = (0..w)
        .map(|a| {
            (0..w)
                .map(|b| {
                    relations
                        .iter()
                        .filter(|r| r.from == a && r.to == b)
                        .count()
                })
                .collect()
        })
        .collect();
    // Diagonal relations partition the diagonal; transposes are basic.
    for r in &relations {
        if idx(r.class, r.to, r.from).is_none() {
            return Err(internal(
                "basic relations are not closed under transposition",
            ));
        }
    }
    for x in 0..v {
        let r = relations[cells[x * v + x] as usize];
        if r.class != 0 {
            return Err(internal("diagonal pair outside the diagonal relations"));
        }
    }
    // Brute-force constants p^R_{ST}, one reference pair per R.
    let rows: Vec<Result<Vec<u64>, UniformityError>> = (0..n)
        .into_par_iter()
        .map(|ri| {
            let mut reference: Option<Vec<u64>> = None;
            for x in fs.fibres[relations[ri].from].iter().copied() {
                for z in fs.fibres[relations[ri].to].iter().copied() {
                    if cells[x * v + z] as usize != ri {
                        continue;
                    }
                    let mut cnt = vec![0u64; n * n];
                    for y in 0..v {
                        cnt[cells[x * v + y] as usize * n + cells[y * v + z] as usize] += 1;
                    }
                    match &reference {
                        None => reference = Some(cnt),
                        Some(prev) if *prev != cnt => {
                            return Err(internal(format!(
                                "path counts vary inside basic relation {:?}",
                                relations[ri]
                            )));
                        }
                        _ => {}
                    }
                }
            }
            reference.ok_or_else(|| internal("empty basic relation"))
        })
        .collect();
    let mut constants = Vec::with_capacity(n * n * n);
    for row in rows {
        constants.extend(row?);
    }
    // Compare with p^h_ij, p^h_ij(U+V) and p^h_ij(U+V+W).
    let two = if w >= 2 {
        Some(dismantle(t, fs, &[0, 1])?)
    } else {
        None
    };
    let three = if w >= 3 {
        Some(dismantle(t, fs, &[0, 1, 2])?)
    } else {
        None
    };
    let dis_p = |d: &Dismantled, h: usize, i: usize, j: usize| -> u64 {
        match (
            d.restriction.compact(h),
            d.restriction.compact(i),
            d.restriction.compact(j),
        ) {
            (Some(h), Some(i), Some(j)) => d.tensor.p(h, i, j),
            _ => 0,
        }
    };
    for (ri, r) in relations.iter().enumerate() {
        for (si, s) in relations.iter().enumerate() {
            for (ti, tt) in relations.iter().enumerate() {
                let c = constants[(ri * n + si) * n + ti];
                if s.from != r.from || tt.to != r.to || s.to != tt.from {
                    if c != 0 {
                        return Err(internal("path through mismatched fibres"));
                    }
                    continue;
                }
                let (uu, vv, ww) = (s.from, s.to, tt.to);
                let (h, i, j) = (r.class, s.class, tt.class);
                let expect = if uu == vv || vv == ww {
                    p.p(h, i, j)
                } else if uu == ww {
                    dis_p(two.as_ref().expect("w >= 2"), h, i, j)
                } else {
                    dis_p(three.as_ref().expect("w >= 3"), h, i, j)
                };
                if c != expect || u.a(h, i, j) != Some(c) {
                    return Err(internal(format!(
                        "constant for {r:?} via {s:?},{tt:?} is {c}, expected {expect}"
                    )));
                }
            }
        }
    }
    let sparse = (0..n)
        .map(|ri| {
            let mut terms = Vec::new();
            for si in 0..n {
                for ti in 0..n {
                    let c = constants[(ri * n + si) * n + ti];
                    if c != 0 {
                        terms.push((si, ti, c));
                    }
                }
            }
            terms
        })
        .collect();
    let cc = CoherentConfiguration {
        v,
        fibre_of: fs.fibre_of.clone(),
        relations,
        cells,
        type_matrix,
        constants,
        sparse,
    };
    if cc.fuse() != *t {
        return Err(internal(
            "fusing the configuration does not give back the scheme",
        ));
    }
    Ok(cc)
}

/// Q-Higman ordering: `ordering[k]` is the idempotent in position k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QHigmanCertificate {
    pub ell: usize,
    pub w: usize,
    pub ordering: Vec<usize>,
}

impl QHigmanCertificate {
    pub fn d(&self) -> usize {
        self.ordering.len() - 1
    }

    /// The idempotent playing E_d, so J = {0, e_d}.
    pub fn e_d(&self) -> usize {
        self.ordering[self.d()]
    }
}

/// Every idempotent that fits as E_d gives one certificate.
pub fn is_q_higman(k: &KreinTensor) -> Result<Vec<QHigmanCertificate>, UniformityError> {
    let d = k.d();
    let m = k.multiplicities();
    let mut out = Vec::new();
    'cand: for t in 1..=d {
        let w = m[t] as usize + 1;
        let v: u64 = m.iter().sum();
        // singleton fibres are not an imprimitivity system
        if w as u64 >= v || !v.is_multiple_of(w as u64) {
            continue;
        }
        let wm1 = Scalar::int(w as i64 - 1);
        let wm2 = Scalar::int(w as i64 - 2);
        let one = Scalar::one();
        // q^j_{t x} is row j of L*_t.
        let off = |j: usize| -> Vec<usize> {
            (0..=d)
                .filter(|&x| x != j && !k.q(j, t, x).is_zero())
                .collect()
        };
        let mut small = Vec::new();
        let mut middle = Vec::new();
        let mut partner = vec![usize::MAX; d + 1];
        for j in 0..=d {
            // at w = 2 both members of a pair fit the small pattern
            if partner.contains(&j) {
                continue;
            }
            let o = off(j);
            if o.is_empty() {
                if *k.q(j, t, j) != wm1 {
                    continue 'cand;
                }
                middle.push(j);
            } else if o.len() == 1 {
                let x = o[0];
                if k.q(j, t, j).is_zero() && *k.q(j, t, x) == wm1 {
                    if *k.q(x, t, j) != one || *k.q(x, t, x) != wm2 || off(x) != [j] {
                        continue 'cand;
                    }
                    partner[j] = x;
                    small.push(j);
                }
            } else {
                continue 'cand;
            }
        }
        let ell = small.len();
        if ell == 0 || small[0] != 0 || partner[0] != t || 2 * ell + middle.len() != d + 1 {
            continue;
        }
        for &j in &small {
            if m[partner[j]] != (w as u64 - 1) * m[j] {
                return Err(internal(format!(
                    "m_{} != (w-1) m_{j} in a Q-Higman pattern",
                    partner[j]
                )));
            }
        }
        let mut ordering = small.clone();
        ordering.extend(&middle);
        ordering.extend(small.iter().rev().map(|&j| partner[j]));
        out.push(QHigmanCertificate { ell, w, ordering });
    }
    if out.is_empty() {
        Err(UniformityError::NotQHigman)
    } else {
        Ok(out)
    }
}

/// The certificate whose E_d belongs to the system's J.
pub fn certificate_for<'a>(
    certs: &'a [QHigmanCertificate],
    sys: &ImprimitivitySystem,
) -> Option<&'a QHigmanCertificate> {
    certs
        .iter()
        .find(|c| sys.j_set == [0, c.e_d()] && c.w == sys.w())
}

/// Idempotents of the dismantled scheme on `which`, from the original ones,
/// matched to the dismantled eigendata.
#[derive(Clone, Debug)]
pub struct DismantledIdempotents {
    pub dismantled: Dismantled,
    pub eigen: Eigendata,
    /// `coords[k]` is E-bar for position k, in the dismantled relation labels.
    pub coords: Vec<Vec<Scalar>>,
    /// Dismantled idempotent equal to position k.
    pub matched: Vec<usize>,
}

pub fn dismantled_idempotents(
    t: &RelationTable,
    fs: &FibreSystem,
    e: &Eigendata,
    cert: &QHigmanCertificate,
    which: &[usize],
) -> Result<DismantledIdempotents, UniformityError> {
    let dismantled = dismantle(t, fs, which)?;
    let labels = &dismantled.restriction.labels;
    let w = cert.w as i64;
    let wp = dismantled.fibres.len() as i64;
    let d = cert.d();
    let ord = &cert.ordering;
    let restricted =
        |j: usize| -> Vec<Scalar> { labels.iter().map(|&i| e.idempotent(j)[i].clone()).collect() };
    let ratio = rat(w, wp);
    let mut coords: Vec<Vec<Scalar>> = vec![Vec::new(); d + 1];
    for k in 0..=d {
        let ej = restricted(ord[k]);
        coords[k] = if k < cert.ell {
            ej.iter().map(|x| x.scale(&ratio)).collect()
        } else if k > d - cert.ell {
            let small = restricted(ord[d - k]);
            ej.iter()
                .zip(&small)
                .map(|(a, b)| a + b - b.scale(&ratio))
                .collect()
        } else {
            ej
        };
    }
    let p = &dismantled.tensor;
    let r = labels.len();
    let mut id = vec![Scalar::zero(); r];
    id[0] = Scalar::one();
    let mut total = vec![Scalar::zero(); r];
    for a in 0..=d {
        for b in 0..=d {
            let prod = bm_product(p, &coords[a], &coords[b]);
            let want = if a == b {
                coords[a].clone()
            } else {
                vec![Scalar::zero(); r]
            };
            if prod != want {
                return Err(internal(format!(
                    "dismantled idempotents {a} and {b} are not orthogonal idempotents"
                )));
            }
        }
        for i in 0..r {
            total[i] += &coords[a][i];
        }
    }
    if total != id {
        return Err(internal(
            "dismantled idempotents do not sum to the identity",
        ));
    }
    let policy = if e.field() == 0 {
        FieldPolicy::Auto
    } else {
        FieldPolicy::Quadratic(e.field())
    };
    let eigen = eigendata_with(p, policy)?;
    let mut matched = Vec::new();
    let yv = Scalar::int(dismantled.restriction.vertices.len() as i64);
    for (k, c) in coords.iter().enumerate() {
        let s = (0..=eigen.d())
            .find(|&s| eigen.idempotent(s) == *c)
            .ok_or_else(|| {
                internal(format!(
                    "E-bar in position {k} is not a dismantled idempotent"
                ))
            })?;
        // trace equals the multiplicity
        if &c[0] * &yv != Scalar::int(eigen.m(s) as i64) {
            return Err(internal(format!(
                "trace of E-bar in position {k} differs from its rank"
            )));
        }
        matched.push(s);
    }
    Ok(DismantledIdempotents {
        dismantled,
        eigen,
        coords,
        matched,
    })
}

/// E_j I^U E_h in the configuration algebra for every fibre and pair of
/// positions, against the closed forms.
pub fn check_idempotent_fibre_products(
    cc: &CoherentConfiguration,
    e: &Eigendata,
    cert: &QHigmanCertificate,
) -> Result<(), UniformityError> {
    let d = cert.d();
    let ell = cert.ell;
    let winv = rat(1, cert.w as i64);
    let ems: Vec<Vec<Scalar>> = cert
        .ordering
        .iter()
        .map(|&j| cc.lift(&e.idempotent(j)))
        .collect();
    let sub = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    };
    let add = |a: &[Scalar], b: &[Scalar]| -> Vec<Scalar> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    };
    let scale = |a: &[Scalar]| -> Vec<Scalar> { a.iter().map(|x| x.scale(&winv)).collect() };
    let zero = vec![Scalar::zero(); cc.rank()];
    let fibres = cc.type_matrix.len();
    for u in 0..fibres {
        let iu = cc.fibre_identity(u);
        for j in 0..=d {
            let ej_iu = cc.product(&ems[j], &iu);
            for h in 0..=d {
                let got = cc.product(&ej_iu, &ems[h]);
                let want = if h == j && j < ell {
                    scale(&ems[j])
                } else if h == d - j && j < ell {
                    sub(&ej_iu, &scale(&ems[j]))
                } else if h == d - j && j > d - ell {
                    sub(&cc.product(&iu, &ems[d - j]), &scale(&ems[d - j]))
                } else if h == j && j > d - ell {
                    add(
                        &sub(&ej_iu, &cc.product(&iu, &ems[d - j])),
                        &scale(&ems[d - j]),
                    )
                } else if h == j {
                    ej_iu.clone()
                } else {
                    zero.clone()
                };
                if got != want {
                    return Err(internal(format!(
                        "E_{j} I^{u} E_{h} differs from its closed form"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// E_i^{UV} E_j^{WZ} = delta_VW delta_ij lambda E_i^{UZ} for positions i, j <= d - ell.
pub fn check_block_products(
    cc: &CoherentConfiguration,
    e: &Eigendata,
    cert: &QHigmanCertificate,
) -> Result<(), UniformityError> {
    let top = cert.d() - cert.ell;
    let w = cc.type_matrix.len();
    let ems: Vec<Vec<Scalar>> = cert.ordering[..=top]
        .iter()
        .map(|&j| cc.lift(&e.idempotent(j)))
        .collect();
    let blocks: Vec<Vec<Vec<Vec<Scalar>>>> = ems
        .iter()
        .map(|m| {
            (0..w)
                .map(|u| (0..w).map(|v| cc.block(m, u, v)).collect())
                .collect()
        })
        .collect();
    let zero = vec![Scalar::zero(); cc.rank()];
    for i in 0..=top {
        for j in 0..=top {
            for u in 0..w {
                for v in 0..w {
                    for x in 0..w {
                        for z in 0..w {
                            let got = cc.product(&blocks[i][u][v], &blocks[j][x][z]);
                            let lambda = if i < cert.ell {
                                Some(rat(1, cert.w as i64))
                            } else if x == z {
                                Some(rat(1, 1))
                            } else {
                                None
                            };
                            let want = match lambda {
                                Some(l) if v == x && i == j => {
                                    blocks[i][u][z].iter().map(|s| s.scale(&l)).collect()
                                }
                                _ => zero.clone(),
                            };
                            if got != want {
                                return Err(internal(format!(
                                    "E_{i}^({u},{v}) E_{j}^({x},{z}) has the wrong form"
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// D_j = w E_j - F_j for positions j < ell, with F_j = E_j + E_{d-j}.
/// At w = 2 the sign is fixed by a positive first nonzero entry in row 0.
pub fn splitting_matrices(
    t: &RelationTable,
    p: &IntersectionTensor,
    e: &Eigendata,
    fs: &FibreSystem,
    cert: &QHigmanCertificate,
) -> Result<Vec<Vec<Scalar>>, UniformityError> {
    let d = cert.d();
    let w = cert.w as i64;
    let mut out = Vec::new();
    for j in 0..cert.ell {
        let ej = e.idempotent(cert.ordering[j]);
        let ed = e.idempotent(cert.ordering[d - j]);
        let f: Vec<Scalar> = ej.iter().zip(&ed).map(|(a, b)| a + b).collect();
        let mut dj: Vec<Scalar> = ej
            .iter()
            .zip(&f)
            .map(|(a, b)| a.scale(&rat(w, 1)) - b)
            .collect();
        if w == 2 {
            let first = t
                .row(0)
                .iter()
                .map(|&c| &dj[c as usize])
                .find(|x| !x.is_zero());
            if first.is_some_and(|x| x.is_negative()) {
                dj = dj.iter().map(|x| -x).collect();
            }
        }
        if (0..=d).any(|i| fs.within(i) && !dj[i].is_zero()) {
            return Err(internal(format!("D_{j} has entries inside the fibres")));
        }
        if bm_product(p, &f, &dj) != dj {
            return Err(internal(format!("F_{j} D_{j} != D_{j}")));
        }
        let want: Vec<Scalar> = f
            .iter()
            .zip(&dj)
            .map(|(a, b)| a.scale(&rat(w - 1, 1)) + b.scale(&rat(w - 2, 1)))
            .collect();
        if bm_product(p, &dj, &dj) != want {
            return Err(internal(format!("D_{j}^2 != (w-1) F_{j} + (w-2) D_{j}")));
        }
        out.push(dj);
    }
    Ok(out)
}

/// Shape of a product scheme with the same parameters, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decomposable {
    Wreath,
    Tensor,
}

/// Compares intersection numbers with the wreath and tensor products of
/// K_w with the fibre subscheme, up to relabelling of the cross relations.
pub fn decomposable(
    t: &RelationTable,
    p: &IntersectionTensor,
    fs: &FibreSystem,
) -> Result<Option<Decomposable>, UniformityError> {
    let sub = restrict(t, &fs.fibres[0])?;
    let kw = complete(fs.w());
    let candidates = [
        (Decomposable::Wreath, wreath(&kw, &sub.table)),
        (Decomposable::Tensor, tensor(&kw, &sub.table)),
    ];
    let within = &fs.i_set;
    let cross: Vec<usize> = (0..=t.d()).filter(|c| !fs.within(*c)).collect();
    for (kind, table) in candidates {
        if table.d() != t.d() {
            continue;
        }
        let q = verify_scheme(&table)?;
        // product classes: inner classes first, then the cross ones
        let found = permutations(&cross).into_iter().any(|perm| {
            let mut map = vec![0; t.d() + 1];
            for (k, &c) in within.iter().enumerate() {
                map[k] = c;
            }
            for (k, &c) in perm.iter().enumerate() {
                map[within.len() + k] = c;
            }
            (0..=t.d()).all(|h| {
                (0..=t.d())
                    .all(|i| (0..=t.d()).all(|j| q.p(h, i, j) == p.p(map[h], map[i], map[j])))
            })
        });
        if found {
            return Ok(Some(kind));
        }
    }
    Ok(None)
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}
