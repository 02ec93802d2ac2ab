//! Imprimitivity systems, subschemes, quotient schemes and the dual
//! equivalence on idempotents.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::exactnum::{Rational, Scalar};
use crate::schemes::{restrict, verify_scheme, IntersectionTensor, RelationTable, Restriction};
use crate::spectral::{
    bm_product, eigendata_with, krein_tensor, Eigendata, FieldPolicy, KreinTensor, SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImprimitivityError {
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn internal(msg: impl Into<String>) -> ImprimitivityError {
    ImprimitivityError::Internal(msg.into())
}

/// Fibre partition and within-fibre relations; no spectral data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreSystem {
    pub fibres: Vec<Vec<usize>>,
    pub fibre_of: Vec<usize>,
    /// Within-fibre relations, ascending, containing 0.
    pub i_set: Vec<usize>,
}

impl FibreSystem {
    /// Fibres are the classes of the equivalence relation given by `i_set`.
    pub fn from_relations(t: &RelationTable, i_set: &[usize]) -> Result<Self, ImprimitivityError> {
        let inside: Vec<bool> = (0..=t.d()).map(|c| i_set.contains(&c)).collect();
        let mut fibre_of = vec![usize::MAX; t.v()];
        let mut fibres: Vec<Vec<usize>> = Vec::new();
        for x in 0..t.v() {
            if fibre_of[x] != usize::MAX {
                continue;
            }
            let k = fibres.len();
            let members: Vec<usize> = (0..t.v()).filter(|&y| inside[t.cell(x, y)]).collect();
            for &y in &members {
                if fibre_of[y] != usize::MAX {
                    return Err(internal(format!(
                        "relations {i_set:?} are not an equivalence"
                    )));
                }
                fibre_of[y] = k;
            }
            fibres.push(members);
        }
        for x in 0..t.v() {
            for y in 0..t.v() {
                if inside[t.cell(x, y)] != (fibre_of[x] == fibre_of[y]) {
                    return Err(internal(format!(
                        "relations {i_set:?} are not an equivalence"
                    )));
                }
            }
        }
        let n = fibres[0].len();
        if fibres.iter().any(|f| f.len() != n) {
            return Err(internal(format!("unequal fibre sizes for I = {i_set:?}")));
        }
        Ok(FibreSystem {
            fibres,
            fibre_of,
            i_set: i_set.to_vec(),
        })
    }

    pub fn w(&self) -> usize {
        self.fibres.len()
    }

    pub fn n(&self) -> usize {
        self.fibres[0].len()
    }

    pub fn within(&self, class: usize) -> bool {
        self.i_set.contains(&class)
    }

    /// Vertices of the union of the listed fibres, ascending.
    pub fn union(&self, which: &[usize]) -> Vec<usize> {
        let mut ys: Vec<usize> = which
            .iter()
            .flat_map(|&f| self.fibres[f].iter().copied())
            .collect();
        ys.sort_unstable();
        ys
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImprimitivitySystem {
    pub base: FibreSystem,
    /// Idempotents with sum_{i in I} A_i = n sum_{j in J} E_j.
    pub j_set: Vec<usize>,
    /// Classes of ~*, the first being J.
    pub dual_classes: Vec<Vec<usize>>,
    /// `rho[i][j]` = rho^i_j = sum_{h in J} q^i_{jh}.
    pub rho: Vec<Vec<Scalar>>,
}

impl ImprimitivitySystem {
    pub fn w(&self) -> usize {
        self.base.w()
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn i_set(&self) -> &[usize] {
        &self.base.i_set
    }

    pub fn fibres(&self) -> &[Vec<usize>] {
        &self.base.fibres
    }

    /// rho_j = rho^j_j.
    pub fn rho_diag(&self, j: usize) -> &Scalar {
        &self.rho[j][j]
    }

    /// Index of the dual class containing idempotent `j`.
    pub fn class_of(&self, j: usize) -> usize {
        self.dual_classes
            .iter()
            .position(|c| c.contains(&j))
            .expect("classes partition 0..=d")
    }
}

fn closure(p: &IntersectionTensor, seed: &BTreeSet<usize>) -> BTreeSet<usize> {
    let mut s = seed.clone();
    s.insert(0);
    loop {
        let mut add = Vec::new();
        for &a in &s {
            for &b in &s {
                for h in 0..=p.d() {
                    if p.p(h, a, b) > 0 && !s.contains(&h) {
                        add.push(h);
                    }
                }
            }
        }
        if add.is_empty() {
            return s;
        }
        s.extend(add);
    }
}

/// Proper closed relation sets {0} < I < {0..d}: sets containing every h
/// with p^h_ab > 0 for a, b in I.
pub fn closed_sets(p: &IntersectionTensor) -> Vec<Vec<usize>> {
    let d = p.d();
    let mut found: BTreeSet<BTreeSet<usize>> =
        (1..=d).map(|i| closure(p, &BTreeSet::from([i]))).collect();
    loop {
        let list: Vec<BTreeSet<usize>> = found.iter().cloned().collect();
        let mut grew = false;
        for a in 0..list.len() {
            for b in a + 1..list.len() {
                let u: BTreeSet<usize> = list[a].union(&list[b]).copied().collect();
                if found.insert(closure(p, &u)) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    found
        .into_iter()
        .filter(|s| s.len() < d + 1)
        .map(|s| s.into_iter().collect())
        .collect()
}

/// Completes a fibre system with J, the dual classes and rho.
pub fn system_data(
    base: FibreSystem,
    e: &Eigendata,
    k: &KreinTensor,
) -> Result<ImprimitivitySystem, ImprimitivityError> {
    let d = e.d();
    let n = Scalar::int(base.n() as i64);
    let mut j_set = Vec::new();
    for j in 0..=d {
        let s: Scalar = base.i_set.iter().map(|&i| e.p(j, i).clone()).sum();
        if s == n {
            j_set.push(j);
        } else if !s.is_zero() {
            return Err(internal(format!(
                "sum of P_{j},i over I is {s}, neither 0 nor n"
            )));
        }
    }
    // sum_{i in I} A_i = n sum_{j in J} E_j in coordinates.
    for i in 0..=d {
        let s: Scalar = j_set.iter().map(|&j| e.idempotent(j)[i].clone()).sum();
        let want = if base.within(i) {
            Scalar::one()
        } else {
            Scalar::zero()
        };
        if &s * &n != want {
            return Err(internal(format!(
                "within-fibre indicator mismatch at relation {i}"
            )));
        }
    }
    let related = |i: usize, j: usize| j_set.iter().any(|&h| !k.q(h, i, j).is_zero());
    let mut dual_classes: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; d + 1];
    for i in 0..=d {
        if seen[i] {
            continue;
        }
        let class: Vec<usize> = (0..=d).filter(|&j| related(i, j)).collect();
        for &j in &class {
            if seen[j] {
                return Err(internal("~* is not an equivalence relation"));
            }
            seen[j] = true;
        }
        dual_classes.push(class);
    }
    if dual_classes[0] != j_set {
        return Err(internal("the class of E_0 under ~* is not J"));
    }
    let rho: Vec<Vec<Scalar>> = (0..=d)
        .map(|i| {
            (0..=d)
                .map(|j| j_set.iter().map(|&h| k.q(i, j, h).clone()).sum())
                .collect()
        })
        .collect();
    for i in 0..=d {
        for j in 0..=d {
            let same = dual_classes
                .iter()
                .any(|c| c.contains(&i) && c.contains(&j));
            if rho[i][j].is_zero() == same {
                return Err(internal(format!("rho^{i}_{j} disagrees with ~*")));
            }
        }
    }
    Ok(ImprimitivitySystem {
        base,
        j_set,
        dual_classes,
        rho,
    })
}

/// All imprimitivity systems, sorted by fibre size.
pub fn find_imprimitivity_systems(
    t: &RelationTable,
    p: &IntersectionTensor,
    e: &Eigendata,
    k: &KreinTensor,
) -> Result<Vec<ImprimitivitySystem>, ImprimitivityError> {
    let mut out = Vec::new();
    for i_set in closed_sets(p) {
        let base = FibreSystem::from_relations(t, &i_set)?;
        out.push(system_data(base, e, k)?);
    }
    out.sort_by(|a, b| (a.n(), a.i_set()).cmp(&(b.n(), b.i_set())));
    Ok(out)
}

/// pi(E_j') = (rho_j'/w) F_j where the F_j are the idempotents of the
/// within-fibre subalgebra; returns the F_j in coordinates, one per class.
pub fn projection_lemma(
    p: &IntersectionTensor,
    e: &Eigendata,
    sys: &ImprimitivitySystem,
) -> Result<Vec<Vec<Scalar>>, ImprimitivityError> {
    let d = e.d();
    let w = Rational::from_integer(BigInt::from(sys.w()));
    let mut fs = Vec::new();
    for class in &sys.dual_classes {
        let mut f: Option<Vec<Scalar>> = None;
        for &j in class {
            let ej = e.idempotent(j);
            let scale = Scalar::rational(w.clone()) / sys.rho_diag(j);
            let cand: Vec<Scalar> = (0..=d)
                .map(|i| {
                    if sys.base.within(i) {
                        &ej[i] * &scale
                    } else {
                        Scalar::zero()
                    }
                })
                .collect();
            match &f {
                None => f = Some(cand),
                Some(prev) if *prev != cand => {
                    return Err(internal(format!(
                        "pi(E_{j}) not proportional within its class"
                    )));
                }
                _ => {}
            }
        }
        fs.push(f.expect("nonempty class"));
    }
    let mut total = vec![Scalar::zero(); d + 1];
    for (a, fa) in fs.iter().enumerate() {
        for (b, fb) in fs.iter().enumerate() {
            let prod = bm_product(p, fa, fb);
            let want = if a == b {
                fa.clone()
            } else {
                vec![Scalar::zero(); d + 1]
            };
            if prod != want {
                return Err(internal(format!(
                    "F_{a} F_{b} is not {}",
                    if a == b { "F_a" } else { "0" }
                )));
            }
        }
        for i in 0..=d {
            total[i] += &fa[i];
        }
    }
    let mut id = vec![Scalar::zero(); d + 1];
    id[0] = Scalar::one();
    if total != id {
        return Err(internal("the F_j do not sum to the identity"));
    }
    Ok(fs)
}

/// m_b <= (w-1) m_a for both members of every two-element dual class,
/// with equality iff q^a_{ta} = 0, where J = {0, t}.
pub fn check_coset_size_two(
    k: &KreinTensor,
    sys: &ImprimitivitySystem,
) -> Result<(), ImprimitivityError> {
    if sys.j_set.len() != 2 {
        return Ok(());
    }
    let t = sys.j_set[1];
    let w = sys.w() as u64;
    let m = k.multiplicities();
    for class in sys.dual_classes.iter().filter(|c| c.len() == 2) {
        for (a, b) in [(class[0], class[1]), (class[1], class[0])] {
            if m[b] > (w - 1) * m[a] {
                return Err(internal(format!("m_{b} > (w-1) m_{a}")));
            }
            if (m[b] == (w - 1) * m[a]) != k.q(a, t, a).is_zero() {
                return Err(internal(format!("equality case fails for ({a},{b})")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct Subscheme {
    pub restriction: Restriction,
    pub tensor: IntersectionTensor,
    pub eigen: Eigendata,
    /// `class_idempotent[c]` is the subscheme idempotent matched to dual class `c`.
    pub class_idempotent: Vec<usize>,
}

/// Scheme induced on the first fibre, checked against the original data.
pub fn subscheme(
    t: &RelationTable,
    p: &IntersectionTensor,
    e: &Eigendata,
    sys: &ImprimitivitySystem,
) -> Result<Subscheme, ImprimitivityError> {
    let restriction = restrict(t, &sys.fibres()[0]).map_err(|x| internal(x.to_string()))?;
    if restriction.labels != sys.i_set() {
        return Err(internal("fibre relations differ from I"));
    }
    let tensor = verify_scheme(&restriction.table).map_err(|x| internal(x.to_string()))?;
    let lab = &restriction.labels;
    let r = lab.len();
    for h in 0..r {
        for i in 0..r {
            for j in 0..r {
                if tensor.p(h, i, j) != p.p(lab[h], lab[i], lab[j]) {
                    return Err(internal("subscheme intersection numbers differ"));
                }
            }
        }
    }
    let policy = if e.field() == 0 {
        FieldPolicy::Auto
    } else {
        FieldPolicy::Quadratic(e.field())
    };
    let eigen = eigendata_with(&tensor, policy)?;
    // P~_ji = P_j'i for j' in J_j; Q~_ij = (1/w) sum_{j' in J_j} Q_ij'.
    let w = Rational::new(BigInt::from(1), BigInt::from(sys.w()));
    let mut class_idempotent = Vec::new();
    for class in &sys.dual_classes {
        let row: Vec<Scalar> = lab.iter().map(|&i| e.p(class[0], i).clone()).collect();
        for &j in class {
            if lab.iter().map(|&i| e.p(j, i).clone()).collect::<Vec<_>>() != row {
                return Err(internal(format!(
                    "P rows disagree within the dual class of {j}"
                )));
            }
        }
        let s = (0..r)
            .find(|&s| (0..r).all(|i| *eigen.p(s, i) == row[i]))
            .ok_or_else(|| internal("no subscheme idempotent matches a dual class"))?;
        for (ci, &i) in lab.iter().enumerate() {
            let q: Scalar = class.iter().map(|&j| e.q(i, j).clone()).sum();
            if *eigen.q(ci, s) != q.scale(&w) {
                return Err(internal("Q~ differs from the averaged Q"));
            }
        }
        class_idempotent.push(s);
    }
    let mut sorted = class_idempotent.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != r {
        return Err(internal(
            "dual classes do not match subscheme idempotents one-to-one",
        ));
    }
    Ok(Subscheme {
        restriction,
        tensor,
        eigen,
        class_idempotent,
    })
}

#[derive(Clone, Debug)]
pub struct Quotient {
    pub table: RelationTable,
    pub tensor: IntersectionTensor,
    /// Original relations making up each quotient relation.
    pub classes: Vec<Vec<usize>>,
    /// `j_match[k]` is the quotient idempotent of original idempotent J[k].
    pub j_match: Vec<usize>,
}

/// Scheme on the fibres; Krein parameters are checked against the originals on J.
pub fn quotient_scheme(
    t: &RelationTable,
    e: &Eigendata,
    k: &KreinTensor,
    sys: &ImprimitivitySystem,
) -> Result<Quotient, ImprimitivityError> {
    let w = sys.w();
    let mut sets: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); w]; w];
    for u in 0..w {
        for v in 0..w {
            let x = sys.fibres()[u][0];
            let mut s: BTreeSet<usize> = BTreeSet::new();
            for &y in &sys.fibres()[v] {
                s.insert(t.cell(x, y));
            }
            sets[u][v] = s.into_iter().collect();
        }
    }
    let mut classes: Vec<Vec<usize>> = vec![sys.i_set().to_vec()];
    let mut rest: Vec<Vec<usize>> = sets
        .iter()
        .flatten()
        .filter(|s| **s != classes[0])
        .cloned()
        .collect();
    rest.sort();
    rest.dedup();
    classes.extend(rest);
    let table = RelationTable::from_fn(w, |u, v| {
        classes.iter().position(|c| *c == sets[u][v]).unwrap()
    })
    .map_err(|x| internal(x.to_string()))?;
    let tensor = verify_scheme(&table).map_err(|x| internal(x.to_string()))?;
    let policy = if e.field() == 0 {
        FieldPolicy::Auto
    } else {
        FieldPolicy::Quadratic(e.field())
    };
    let qe = eigendata_with(&tensor, policy)?;
    let qk = krein_tensor(&qe)?;
    let n = Rational::new(BigInt::from(1), BigInt::from(sys.n()));
    let mut j_match = Vec::new();
    for &j in &sys.j_set {
        let row: Vec<Scalar> = classes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&i| e.p(j, i).clone())
                    .sum::<Scalar>()
                    .scale(&n)
            })
            .collect();
        let s = (0..classes.len())
            .find(|&s| qe.p_matrix()[s] == row)
            .ok_or_else(|| internal(format!("no quotient idempotent matches E_{j}")))?;
        j_match.push(s);
    }
    let jj = &sys.j_set;
    for a in 0..jj.len() {
        for b in 0..jj.len() {
            for c in 0..jj.len() {
                if qk.q(j_match[a], j_match[b], j_match[c]) != k.q(jj[a], jj[b], jj[c]) {
                    return Err(internal(
                        "quotient Krein parameters differ from the originals",
                    ));
                }
            }
        }
    }
    Ok(Quotient {
        table,
        tensor,
        classes,
        j_match,
    })
}

/// q~^h_ij = (1/(rho_i' rho_j')) sum_{h' in J_h} rho_h' q^h'_i'j', indexed by
/// dual classes; checked for every choice of representatives.
pub fn subscheme_krein_via_lemma(
    k: &KreinTensor,
    sys: &ImprimitivitySystem,
) -> Result<KreinTensor, ImprimitivityError> {
    let cls = &sys.dual_classes;
    let e = cls.len();
    let mut out = vec![Scalar::zero(); e * e * e];
    for h in 0..e {
        for i in 0..e {
            for j in 0..e {
                let mut value: Option<Scalar> = None;
                for &ip in &cls[i] {
                    for &jp in &cls[j] {
                        let s: Scalar = cls[h]
                            .iter()
                            .map(|&hp| sys.rho_diag(hp) * k.q(hp, ip, jp))
                            .sum();
                        let x = s / (sys.rho_diag(ip) * sys.rho_diag(jp));
                        match &value {
                            None => value = Some(x),
                            Some(v) if *v != x => {
                                return Err(internal(format!(
                                    "Krein value depends on representatives ({h},{i},{j})"
                                )));
                            }
                            _ => {}
                        }
                    }
                }
                out[(h * e + i) * e + j] = value.unwrap();
            }
        }
    }
    let m = cls
        .iter()
        .map(|c| c.iter().map(|&j| k.multiplicities()[j]).sum::<u64>() / sys.w() as u64)
        .collect();
    Ok(KreinTensor::from_fn(m, |h, i, j| {
        out[(h * e + i) * e + j].clone()
    }))
}

/// The lemma tensor re-indexed to the subscheme's own idempotent order.
pub fn lemma_tensor_in_subscheme_order(lemma: &KreinTensor, sub: &Subscheme) -> KreinTensor {
    let e = sub.class_idempotent.len();
    let mut inv = vec![0; e];
    for (c, &s) in sub.class_idempotent.iter().enumerate() {
        inv[s] = c;
    }
    lemma.permuted(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::RelationTable;
    use crate::spectral::eigendata;

    fn setup(t: &RelationTable) -> (IntersectionTensor, Eigendata, KreinTensor) {
        let p = verify_scheme(t).unwrap();
        let e = eigendata(&p).unwrap();
        let k = krein_tensor(&e).unwrap();
        (p, e, k)
    }

    #[test]
    fn complete_graph_is_primitive() {
        let t = RelationTable::from_fn(5, |x, y| usize::from(x != y)).unwrap();
        let (p, e, k) = setup(&t);
        assert!(find_imprimitivity_systems(&t, &p, &e, &k)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rectangular_has_two_systems() {
        // R(3,2): vertices (a,b), a in 0..3, b in 0..2
        let t = RelationTable::from_fn(6, |x, y| {
            let (a1, b1, a2, b2) = (x / 2, x % 2, y / 2, y % 2);
            usize::from(a1 != a2) * 2 + usize::from(b1 != b2)
        })
        .unwrap();
        let (p, e, k) = setup(&t);
        let s = find_imprimitivity_systems(&t, &p, &e, &k).unwrap();
        assert_eq!(s.iter().map(|x| x.n()).collect::<Vec<_>>(), vec![2, 3]);
        for sys in &s {
            projection_lemma(&p, &e, sys).unwrap();
            let sub = subscheme(&t, &p, &e, sys).unwrap();
            let direct = krein_tensor(&sub.eigen).unwrap();
            let lemma = subscheme_krein_via_lemma(&k, sys).unwrap();
            assert_eq!(lemma_tensor_in_subscheme_order(&lemma, &sub), direct);
            let q = quotient_scheme(&t, &e, &k, sys).unwrap();
            assert_eq!(q.table.v(), sys.w());
        }
    }

    #[test]
    fn octagon_antipodal_quotient_is_square() {
        let t = RelationTable::from_fn(8, |x, y| {
            let d = (x + 8 - y) % 8;
            d.min(8 - d)
        })
        .unwrap();
        let (p, e, k) = setup(&t);
        let s = find_imprimitivity_systems(&t, &p, &e, &k).unwrap();
        let anti = s.iter().find(|x| x.n() == 2).unwrap();
        assert_eq!(anti.i_set(), &[0, 4]);
        let q = quotient_scheme(&t, &e, &k, anti).unwrap();
        assert_eq!((q.table.v(), q.table.d()), (4, 2));
    }
}
