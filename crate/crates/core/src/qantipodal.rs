//! Cometric Q-antipodal and Q-bipartite schemes: classification, the
//! parameter identities they satisfy, and the Krein arrays of their
//! subschemes and dismantled schemes.

use thiserror::Error;

use crate::constructions::rectangular;
use crate::exactnum::{rat, Scalar};
use crate::imprimitivity::ImprimitivitySystem;
use crate::schemes::{verify_scheme, IntersectionTensor, RelationTable};
use crate::spectral::{
    krein_polynomials, natural_relation_ordering, Eigendata, KreinArray, KreinTensor, SpectralError,
};
use crate::uniformity::is_uniform;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QAntipodalError {
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter identity that every cometric Q-antipodal scheme satisfies fails.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn infeasible(msg: impl Into<String>) -> QAntipodalError {
    QAntipodalError::Infeasible(msg.into())
}

/// Tags for one Q-polynomial ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub array: KreinArray,
    pub q_antipodal: bool,
    pub q_bipartite: bool,
    /// Systems (by index) with J = {0, last}.
    pub antipodal_systems: Vec<usize>,
    /// Uniform system whose E_d is not last: only R(w,2), d = 3.
    pub rectangular_exception: bool,
    /// Relations by descending Q_{i,1}.
    pub natural_ordering: Vec<usize>,
}

fn is_rectangular_w2(p: &IntersectionTensor, w: usize) -> bool {
    if p.d() != 3 || w < 3 {
        return false;
    }
    let r = verify_scheme(&rectangular(w, 2)).expect("rectangular scheme");
    [
        [0, 1, 2, 3],
        [0, 1, 3, 2],
        [0, 2, 1, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
        [0, 3, 2, 1],
    ]
    .iter()
    .any(|perm| r.permuted(perm) == *p || p.permuted(perm) == r)
}

/// Q-antipodal iff J = {0,d} for some system; Q-bipartite iff every a*_i is 0.
/// Uniformity is cross-checked system by system.
pub fn classify_cometric_imprimitive(
    t: &RelationTable,
    p: &IntersectionTensor,
    e: &Eigendata,
    arrays: &[KreinArray],
    systems: &[ImprimitivitySystem],
) -> Result<Vec<Classification>, QAntipodalError> {
    let uniform: Vec<bool> = systems
        .iter()
        .map(|s| is_uniform(t, p, &s.base).is_ok())
        .collect();
    let mut out = Vec::new();
    for a in arrays {
        let d = a.d();
        let last = a.ordering[d];
        let antipodal_systems: Vec<usize> = systems
            .iter()
            .enumerate()
            .filter(|(_, s)| s.j_set == [0, last])
            .map(|(k, _)| k)
            .collect();
        let q_bipartite = a.a.iter().all(|x| x.is_zero());
        let mut even: Vec<usize> = a.ordering.iter().step_by(2).copied().collect();
        even.sort_unstable();
        let bipartite_system = systems.iter().any(|s| s.j_set == even);
        if q_bipartite != bipartite_system {
            return Err(QAntipodalError::Internal(
                "a*_i = 0 disagrees with J = {0,2,4,..}".into(),
            ));
        }
        let mut rectangular_exception = false;
        for (k, s) in systems.iter().enumerate() {
            let antipodal = antipodal_systems.contains(&k);
            if antipodal && !uniform[k] {
                return Err(QAntipodalError::Internal(
                    "a Q-antipodal system is not uniform".into(),
                ));
            }
            if uniform[k] && !antipodal && s.j_set.len() == 2 {
                if is_rectangular_w2(p, t.v() / 2) {
                    rectangular_exception = true;
                } else {
                    return Err(QAntipodalError::Internal(
                        "a uniform system has E_d away from the last position".into(),
                    ));
                }
            }
        }
        let natural_ordering = natural_relation_ordering(e, a)?;
        for &k in &antipodal_systems {
            let mut even: Vec<usize> = natural_ordering.iter().step_by(2).copied().collect();
            even.sort_unstable();
            if systems[k].i_set() != even.as_slice() {
                return Err(QAntipodalError::Internal(
                    "I is not {0,2,4,..} in the natural ordering".into(),
                ));
            }
        }
        out.push(Classification {
            array: a.clone(),
            q_antipodal: !antipodal_systems.is_empty(),
            q_bipartite,
            antipodal_systems,
            rectangular_exception,
            natural_ordering,
        });
    }
    Ok(out)
}

/// All Krein parameters in ordering positions from the array alone:
/// L*_j = q_j(L*_1) and q^h_ij = (L*_i)_{hj}.
pub fn krein_tensor_from_array(a: &KreinArray) -> KreinTensor {
    let d = a.d();
    let r = d + 1;
    let mut l1 = vec![vec![Scalar::zero(); r]; r];
    for h in 0..r {
        l1[h][h] = a.a[h].clone();
        if h < d {
            l1[h][h + 1] = a.b[h].clone();
        }
        if h > 0 {
            l1[h][h - 1] = a.c[h - 1].clone();
        }
    }
    let mul = |x: &[Vec<Scalar>], y: &[Vec<Scalar>]| -> Vec<Vec<Scalar>> {
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| (0..r).map(|k| &x[i][k] * &y[k][j]).sum())
                    .collect()
            })
            .collect()
    };
    let mut powers = vec![(0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        Scalar::one()
                    } else {
                        Scalar::zero()
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()];
    for k in 1..=d {
        powers.push(mul(&powers[k - 1], &l1));
    }
    let polys = krein_polynomials(a);
    let ls: Vec<Vec<Vec<Scalar>>> = (0..r)
        .map(|j| {
            let mut m = vec![vec![Scalar::zero(); r]; r];
            for (k, c) in polys[j].coeffs().iter().enumerate() {
                for x in 0..r {
                    for y in 0..r {
                        m[x][y] += &(c * &powers[k][x][y]);
                    }
                }
            }
            m
        })
        .collect();
    let m: Vec<u64> = (0..r)
        .map(|j| {
            ls[j][0][j]
                .to_i64()
                .and_then(|x| u64::try_from(x).ok())
                .unwrap_or(0)
        })
        .collect();
    KreinTensor::from_fn(m, |h, i, j| ls[i][h][j].clone())
}

/// Multiplicities m_0..m_d from the array: m_{j+1} = m_j b*_j / c*_{j+1}.
pub fn multiplicities_from_array(a: &KreinArray) -> Vec<Scalar> {
    let mut m = vec![Scalar::one()];
    for j in 0..a.d() {
        let next = &m[j] * &a.b[j] / &a.c[j];
        m.push(next);
    }
    m
}

pub fn subscheme_krein_array(a: &KreinArray, w: usize) -> Result<KreinArray, QAntipodalError> {
    let d = a.d();
    if d < 3 {
        return Err(QAntipodalError::Domain(format!(
            "subscheme array needs d >= 3, got {d}"
        )));
    }
    let half = d / 2;
    let (b, mut c) = if d % 2 == 1 {
        let e = (d - 1) / 2;
        (a.b[..e].to_vec(), a.c[..e].to_vec())
    } else {
        (a.b[..half].to_vec(), a.c[..half].to_vec())
    };
    if d.is_multiple_of(2) {
        let last = c.len() - 1;
        c[last] = c[last].scale(&rat(w as i64, 1));
    }
    let e = b.len();
    Ok(KreinArray::from_bc((0..=e).collect(), b, c))
}

/// m~_j = m_j except m~_{d/2} = m_{d/2} / w.
pub fn subscheme_multiplicities(m: &[Scalar], w: usize) -> Vec<Scalar> {
    let d = m.len() - 1;
    let e = d / 2;
    (0..=e)
        .map(|j| {
            if d.is_multiple_of(2) && j == e {
                m[j].scale(&rat(1, w as i64))
            } else {
                m[j].clone()
            }
        })
        .collect()
}

pub fn dismantled_krein_array(
    a: &KreinArray,
    w: usize,
    wp: usize,
) -> Result<KreinArray, QAntipodalError> {
    let d = a.d();
    if wp < 2 || wp > w {
        return Err(QAntipodalError::Domain(format!(
            "need 2 <= w' <= w, got w'={wp}, w={w}"
        )));
    }
    if d < 3 {
        return Err(QAntipodalError::Domain(format!(
            "dismantled array needs d >= 3, got {d}"
        )));
    }
    let ell = d.div_ceil(2);
    let mut b = a.b.clone();
    let mut c = a.c.clone();
    c[ell - 1] = c[ell - 1].scale(&rat(w as i64, wp as i64));
    b[d - ell] = b[d - ell].scale(&(rat(w as i64, wp as i64) * rat(wp as i64 - 1, w as i64 - 1)));
    Ok(KreinArray::from_bc(a.ordering.clone(), b, c))
}

/// Parameters of a cometric Q-antipodal scheme and of the schemes it induces.
#[derive(Clone, Debug)]
pub struct QAntipodalProfile {
    pub d: usize,
    pub w: usize,
    pub ell: usize,
    pub array: KreinArray,
    pub multiplicities: Vec<Scalar>,
    pub subscheme: KreinArray,
    pub sub_multiplicities: Vec<Scalar>,
    /// (w', array) for 2 <= w' < w.
    pub dismantled: Vec<(usize, KreinArray)>,
}

/// Builds the profile and checks every identity; a failure is `Infeasible`.
pub fn profile(a: &KreinArray, w: usize) -> Result<QAntipodalProfile, QAntipodalError> {
    let d = a.d();
    if d < 3 || w < 2 {
        return Err(QAntipodalError::Domain(format!(
            "profile needs d >= 3 and w >= 2, got d={d}, w={w}"
        )));
    }
    let k = krein_tensor_from_array(a);
    let m = multiplicities_from_array(a);
    check_cometric_parameters(a, &m, w)?;
    check_dual_intersection_matrix(&k, d, w)?;
    check_krein_relations(&k, d, w)?;
    let subscheme = subscheme_krein_array(a, w)?;
    let sub_multiplicities = subscheme_multiplicities(&m, w);
    if multiplicities_from_array(&subscheme) != sub_multiplicities {
        return Err(infeasible(
            "subscheme multiplicities disagree with its Krein array",
        ));
    }
    let mut dismantled = Vec::new();
    for wp in 2..w {
        let da = dismantled_krein_array(a, w, wp)?;
        check_cometric_parameters(&da, &multiplicities_from_array(&da), wp)?;
        dismantled.push((wp, da));
    }
    if d % 2 == 1 && w >= 3 {
        odd_d_corollary(a, w)?;
    }
    Ok(QAntipodalProfile {
        d,
        w,
        ell: d.div_ceil(2),
        array: a.clone(),
        multiplicities: m,
        subscheme,
        sub_multiplicities,
        dismantled,
    })
}

/// b*_j = c*_{d-j} (j != floor(d/2)), a*_j = a*_{d-j} (j != (d+-1)/2),
/// m_{d-j} = (w-1) m_j (j < d/2), b*_{floor(d/2)} = (w-1) c*_{ceil(d/2)}.
pub fn check_cometric_parameters(
    a: &KreinArray,
    m: &[Scalar],
    w: usize,
) -> Result<(), QAntipodalError> {
    let d = a.d();
    let wm1 = Scalar::int(w as i64 - 1);
    for j in 0..d {
        if j != d / 2 && a.b[j] != a.c[d - j - 1] {
            return Err(infeasible(format!("b*_{j} != c*_{}", d - j)));
        }
    }
    for j in 0..=d {
        let excluded = d % 2 == 1 && (2 * j + 1 == d || 2 * j == d + 1);
        if !excluded && a.a[j] != a.a[d - j] {
            return Err(infeasible(format!("a*_{j} != a*_{}", d - j)));
        }
    }
    for j in 0..=d {
        if 2 * j < d && m[d - j] != &m[j] * &wm1 {
            return Err(infeasible(format!("m_{} != (w-1) m_{j}", d - j)));
        }
    }
    if a.b[d / 2] != &a.c[d.div_ceil(2) - 1] * &wm1 {
        return Err(infeasible(format!(
            "b*_{} != (w-1) c*_{}",
            d / 2,
            d.div_ceil(2)
        )));
    }
    Ok(())
}

/// The only nonzero q^i_{dj} are q^j_{d,d-j} = w-1 (j <= d/2), and
/// q^j_{d,d-j} = 1, q^j_{dj} = w-2 (j > d/2); rho_j = 1, w, w-1 below,
/// at and above d/2.
pub fn check_dual_intersection_matrix(
    k: &KreinTensor,
    d: usize,
    w: usize,
) -> Result<(), QAntipodalError> {
    let w_s = |x: i64| Scalar::int(x);
    let w = w as i64;
    for i in 0..=d {
        for j in 0..=d {
            let q = k.q(i, d, j);
            let expect = if 2 * i <= d && j == d - i {
                w_s(w - 1)
            } else if 2 * i > d && j == d - i {
                w_s(1)
            } else if 2 * i > d && j == i {
                w_s(w - 2)
            } else {
                Scalar::zero()
            };
            if *q != expect {
                return Err(infeasible(format!(
                    "q^{i}_{d},{j} = {q}, expected {expect}"
                )));
            }
        }
        // rho_i = q^i_{i0} + q^i_{id}
        let rho = k.q(i, i, 0) + k.q(i, i, d);
        let want = if 2 * i < d {
            w_s(1)
        } else if 2 * i == d {
            w_s(w)
        } else {
            w_s(w - 1)
        };
        if rho != want {
            return Err(infeasible(format!("rho_{i} = {rho}, expected {want}")));
        }
    }
    Ok(())
}

/// For 0 <= j < d/2: q^h_{i,d-j} = (w-1) q^{d-h}_{ij} (h <= d/2),
/// q^h_{i,d-j} = q^{d-h}_{ij} + (w-2) q^h_{ij} (h > d/2), and for even d
/// q^h_{i,d/2} = q^{d-h}_{i,d/2}.
pub fn check_krein_relations(k: &KreinTensor, d: usize, w: usize) -> Result<(), QAntipodalError> {
    let wm1 = rat(w as i64 - 1, 1);
    let wm2 = rat(w as i64 - 2, 1);
    for j in (0..=d).filter(|&j| 2 * j < d) {
        for i in 0..=d {
            for h in 0..=d {
                let lhs = k.q(h, i, d - j);
                let rhs = if 2 * h <= d {
                    k.q(d - h, i, j).scale(&wm1)
                } else {
                    k.q(d - h, i, j) + &k.q(h, i, j).scale(&wm2)
                };
                if *lhs != rhs {
                    return Err(infeasible(format!(
                        "q^{h}_{i},{} = {lhs}, expected {rhs}",
                        d - j
                    )));
                }
            }
        }
    }
    if d.is_multiple_of(2) {
        let e = d / 2;
        for i in 0..=d {
            for h in 0..=d {
                if k.q(h, i, e) != k.q(d - h, i, e) {
                    return Err(infeasible(format!("q^{h}_{i},{e} != q^{}_{i},{e}", d - h)));
                }
            }
        }
    }
    Ok(())
}

/// Odd d, w >= 3: a*_ell != 0, and a-bar*_{ell-1} != 0 for every w > w' >= 2.
pub fn odd_d_corollary(a: &KreinArray, w: usize) -> Result<(), QAntipodalError> {
    let d = a.d();
    if d.is_multiple_of(2) || w < 3 {
        return Err(QAntipodalError::Domain(
            "the corollary concerns odd d and w >= 3".into(),
        ));
    }
    let ell = d.div_ceil(2);
    if a.a[ell].is_zero() {
        return Err(infeasible(format!("a*_{ell} = 0 with odd d and w >= 3")));
    }
    for wp in 2..w {
        let da = dismantled_krein_array(a, w, wp)?;
        if !(da.a[ell] < a.a[ell] && da.a[ell - 1] > a.a[ell - 1]) {
            return Err(QAntipodalError::Internal(
                "dismantling does not move a*_ell and a*_(ell-1) apart".into(),
            ));
        }
        if da.a[ell - 1].is_zero() {
            return Err(infeasible(format!("a-bar*_{} = 0 for w' = {wp}", ell - 1)));
        }
    }
    Ok(())
}
