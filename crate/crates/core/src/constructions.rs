//! Concrete schemes: graphs, products, linked designs, strongly regular
//! decompositions, the Hoffman-Singleton coclique geometry and the
//! parameter formulas for class-I and hemisystem schemes.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::exactnum::{is_perfect_square, rat, rat_int, sqrt_exact, Scalar};
use crate::imprimitivity::{find_imprimitivity_systems, FibreSystem, ImprimitivityError};
use crate::schemes::{
    coherent_closure, verify_scheme, IntersectionTensor, NotAScheme, RelationTable, SchemeError,
};
use crate::spectral::{
    cometric_orderings, eigendata, krein_tensor, natural_relation_ordering, Eigendata, KreinArray,
    SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
    #[error("decomposition error: {0}")]
    Decomposition(String),
    #[error("design error: {0}")]
    Design(String),
    #[error(transparent)]
    NotAScheme(#[from] NotAScheme),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Imprimitivity(#[from] ImprimitivityError),
}

fn internal(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::Internal(msg.into())
}

/// Simple undirected graph as a dense adjacency matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={})", self.n)
    }
}

impl Graph {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut adj = vec![false; n * n];
        for x in 0..n {
            for y in x + 1..n {
                if f(x, y) {
                    adj[x * n + y] = true;
                    adj[y * n + x] = true;
                }
            }
        }
        Graph { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adj[x * self.n + y]
    }

    pub fn neighbours(&self, x: usize) -> Vec<usize> {
        (0..self.n).filter(|&y| self.has_edge(x, y)).collect()
    }

    pub fn degree(&self, x: usize) -> usize {
        (0..self.n).filter(|&y| self.has_edge(x, y)).count()
    }

    pub fn complement(&self) -> Graph {
        Graph::from_fn(self.n, |x, y| !self.has_edge(x, y))
    }

    pub fn induced(&self, vs: &[usize]) -> Graph {
        Graph::from_fn(vs.len(), |a, b| self.has_edge(vs[a], vs[b]))
    }

    pub fn triangles(&self) -> usize {
        let mut t = 0;
        for x in 0..self.n {
            for y in x + 1..self.n {
                if self.has_edge(x, y) {
                    t += (y + 1..self.n)
                        .filter(|&z| self.has_edge(x, z) && self.has_edge(y, z))
                        .count();
                }
            }
        }
        t
    }

    /// (n, k, lambda, mu) when the graph is strongly regular (brute force).
    pub fn srg_parameters(&self) -> Option<(u64, u64, u64, u64)> {
        let n = self.n;
        let k = self.degree(0);
        if (0..n).any(|x| self.degree(x) != k) {
            return None;
        }
        let (mut lam, mut mu) = (None, None);
        for x in 0..n {
            for y in x + 1..n {
                let c = (0..n)
                    .filter(|&z| self.has_edge(x, z) && self.has_edge(y, z))
                    .count();
                let slot = if self.has_edge(x, y) {
                    &mut lam
                } else {
                    &mut mu
                };
                match *slot {
                    None => *slot = Some(c),
                    Some(prev) if prev != c => return None,
                    _ => {}
                }
            }
        }
        Some((
            n as u64,
            k as u64,
            lam.unwrap_or(0) as u64,
            mu.unwrap_or(0) as u64,
        ))
    }

    /// Strongly regular graph as the two-class scheme {=, adjacent, not adjacent}.
    pub fn to_table(&self) -> Result<RelationTable, ConstructionError> {
        RelationTable::from_fn(self.n, |x, y| {
            if x == y {
                0
            } else if self.has_edge(x, y) {
                1
            } else {
                2
            }
        })
        .map_err(|e| ConstructionError::Domain(e.to_string()))
    }
}

/// Parameters and eigenvalues of a strongly regular graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SrgParams {
    pub n: u64,
    pub k: u64,
    pub lambda: u64,
    pub mu: u64,
    /// Nonprincipal eigenvalues r > s with multiplicities f and g.
    pub r: Scalar,
    pub s: Scalar,
    pub f: u64,
    pub g: u64,
}

impl SrgParams {
    pub fn new(n: u64, k: u64, lambda: u64, mu: u64) -> Result<Self, ConstructionError> {
        if k == 0 || k + 1 >= n || k * (k - lambda - 1) != (n - k - 1) * mu {
            return Err(ConstructionError::Domain(format!(
                "({n},{k},{lambda},{mu}) is not an srg parameter set"
            )));
        }
        let lm = lambda as i64 - mu as i64;
        let disc = rat_int(lm * lm + 4 * (k as i64 - mu as i64));
        let root = sqrt_exact(&disc).map_err(|e| ConstructionError::Domain(e.to_string()))?;
        let half = rat(1, 2);
        let r = (Scalar::int(lm) + &root).scale(&half);
        let s = (Scalar::int(lm) - &root).scale(&half);
        // k + f r + g s = 0 with f + g = n - 1
        let f = (Scalar::int(-(k as i64)) - &s * &Scalar::int(n as i64 - 1)) / (&r - &s);
        let f = f
            .to_i64()
            .filter(|&f| f >= 0 && (f as u64) < n)
            .ok_or_else(|| {
                ConstructionError::Domain(format!("multiplicity {f} is not an integer"))
            })? as u64;
        Ok(SrgParams {
            n,
            k,
            lambda,
            mu,
            r,
            s,
            f,
            g: n - 1 - f,
        })
    }

    pub fn complement(&self) -> SrgParams {
        let n = self.n;
        let k = n - 1 - self.k;
        SrgParams::new(
            n,
            k,
            n - 2 - 2 * self.k + self.mu,
            n - 2 * self.k + self.lambda,
        )
        .expect("complement is an srg")
    }

    pub fn tuple(&self) -> (u64, u64, u64, u64) {
        (self.n, self.k, self.lambda, self.mu)
    }

    pub fn is_conference(&self) -> bool {
        !self.r.is_rational()
    }
}

impl std::fmt::Display for SrgParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "srg({},{},{},{})", self.n, self.k, self.lambda, self.mu)
    }
}

pub fn complete(n: usize) -> RelationTable {
    RelationTable::from_fn(n, |x, y| usize::from(x != y)).expect("n >= 2")
}

/// Distance scheme of the n-cycle.
pub fn cycle(n: usize) -> RelationTable {
    RelationTable::from_fn(n, |x, y| {
        let d = (x + n - y) % n;
        d.min(n - d)
    })
    .expect("n >= 3")
}

pub fn tensor(a: &RelationTable, b: &RelationTable) -> RelationTable {
    let vb = b.v();
    let rb = b.d() + 1;
    RelationTable::from_fn(a.v() * vb, |x, y| {
        a.cell(x / vb, y / vb) * rb + b.cell(x % vb, y % vb)
    })
    .expect("tensor product of schemes")
}

/// Outer scheme on the fibres, inner scheme inside each fibre.
pub fn wreath(outer: &RelationTable, inner: &RelationTable) -> RelationTable {
    let vi = inner.v();
    let di = inner.d();
    RelationTable::from_fn(outer.v() * vi, |x, y| {
        let o = outer.cell(x / vi, y / vi);
        if o == 0 {
            inner.cell(x % vi, y % vi)
        } else {
            di + o
        }
    })
    .expect("wreath product of schemes")
}

/// Fibres of a wreath or tensor product with a trivial outer factor.
pub fn product_fibres(t: &RelationTable, inner_v: usize, inner_classes: &[usize]) -> FibreSystem {
    let w = t.v() / inner_v;
    let fibres: Vec<Vec<usize>> = (0..w)
        .map(|a| (a * inner_v..(a + 1) * inner_v).collect())
        .collect();
    let fibre_of = (0..t.v()).map(|x| x / inner_v).collect();
    FibreSystem {
        fibres,
        fibre_of,
        i_set: inner_classes.to_vec(),
    }
}

/// R(w,n) = K_w (x) K_n.
pub fn rectangular(w: usize, n: usize) -> RelationTable {
    tensor(&complete(w), &complete(n))
}

/// H(d,q) as a tensor power of K_q fused by Hamming weight.
pub fn hamming(d: usize, q: usize) -> Result<RelationTable, ConstructionError> {
    if d == 0 || q < 2 {
        return Err(ConstructionError::Domain(
            "hamming needs d >= 1 and q >= 2".into(),
        ));
    }
    let mut t = complete(q);
    for _ in 1..d {
        t = tensor(&t, &complete(q));
    }
    let map: Vec<usize> = (0..=t.d()).map(|c| c.count_ones() as usize).collect();
    Ok(t.fuse(&map)?)
}

/// Folded m-cube: F_2^m modulo the all-ones vector.
pub fn folded_cube(m: usize) -> RelationTable {
    let v = 1usize << (m - 1);
    RelationTable::from_fn(v, |x, y| {
        let wt = (x ^ y).count_ones() as usize;
        wt.min(m - wt)
    })
    .expect("m >= 2")
}

/// Kneser graph K(5,2); vertices are the pairs in lexicographic order.
pub fn petersen() -> (Graph, Vec<(usize, usize)>) {
    let pairs: Vec<(usize, usize)> = (0..5)
        .flat_map(|a| (a + 1..5).map(move |b| (a, b)))
        .collect();
    let g = Graph::from_fn(10, |x, y| {
        let (a, b) = pairs[x];
        let (c, e) = pairs[y];
        a != c && a != e && b != c && b != e
    });
    (g, pairs)
}

/// Petersen split into the pentagon {i,i+1} and the pentagram {i,i+2}.
pub fn petersen_pentagons() -> DecompositionInput {
    let (g, pairs) = petersen();
    let consecutive = |&(a, b): &(usize, usize)| (b - a) % 5 == 1 || (b - a) % 5 == 4;
    let u1 = (0..10).filter(|&x| consecutive(&pairs[x])).collect();
    let u2 = (0..10).filter(|&x| !consecutive(&pairs[x])).collect();
    DecompositionInput { ambient: g, u1, u2 }
}

/// Clebsch graph on F_2^4: adjacent when the difference has weight 1 or 4.
pub fn clebsch() -> Graph {
    Graph::from_fn(16, |x, y| matches!((x ^ y).count_ones(), 1 | 4))
}

/// Clebsch graph split by parity into two perfect matchings.
pub fn clebsch_matchings() -> DecompositionInput {
    let u1 = (0..16)
        .filter(|x: &usize| x.count_ones().is_multiple_of(2))
        .collect();
    let u2 = (0..16)
        .filter(|x: &usize| x.count_ones() % 2 == 1)
        .collect();
    DecompositionInput {
        ambient: clebsch(),
        u1,
        u2,
    }
}

/// Complement of the Clebsch graph with the same halves: two cocktail party graphs.
pub fn clebsch_complement_halves() -> DecompositionInput {
    let mut d = clebsch_matchings();
    d.ambient = d.ambient.complement();
    d
}

/// Robertson's pentagon/pentagram model: P_h[j] = 5h + j, Q_i[j] = 25 + 5i + j.
pub fn hoffman_singleton() -> Graph {
    let g = Graph::from_fn(50, |x, y| {
        let (x, y) = (x.min(y), x.max(y));
        match (x < 25, y < 25) {
            (true, true) => x / 5 == y / 5 && matches!((x % 5 + 5 - y % 5) % 5, 1 | 4),
            (false, false) => x / 5 == y / 5 && matches!((x % 5 + 5 - y % 5) % 5, 2 | 3),
            _ => {
                let (h, j) = (x / 5, x % 5);
                let (i, k) = ((y - 25) / 5, (y - 25) % 5);
                k == (h * i + j) % 5
            }
        }
    });
    debug_assert_eq!(g.srg_parameters(), Some((50, 7, 0, 1)));
    g
}

/// Greedy clique cover size of `cand`: an upper bound on its independence number.
fn clique_cover_bound(mut cand: u128, nbr: &[u128]) -> usize {
    let mut cliques = 0;
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        let mut clique_cand = cand & nbr[v];
        cand &= !(1u128 << v);
        while clique_cand != 0 {
            let u = clique_cand.trailing_zeros() as usize;
            cand &= !(1u128 << u);
            clique_cand &= nbr[u] & !(1u128 << u);
        }
        cliques += 1;
    }
    cliques
}

/// All independent sets of exactly `size` vertices (n <= 128), each sorted;
/// the list is sorted. Fails once more than `node_cap` search nodes are used.
pub fn independent_sets(
    g: &Graph,
    size: usize,
    node_cap: u64,
) -> Result<Vec<Vec<usize>>, ConstructionError> {
    let n = g.n();
    if n > 128 {
        return Err(ConstructionError::Domain(
            "independent set search supports at most 128 vertices".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&x| (std::cmp::Reverse(g.degree(x)), x));
    let nbr: Vec<u128> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| g.has_edge(order[a], order[b]))
                .fold(0u128, |m, b| m | (1u128 << b))
        })
        .collect();
    let nodes = AtomicU64::new(0);
    fn search(
        chosen: &mut Vec<usize>,
        cand: u128,
        size: usize,
        nbr: &[u128],
        nodes: &AtomicU64,
        cap: u64,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), ()> {
        if nodes.fetch_add(1, Ordering::Relaxed) > cap {
            return Err(());
        }
        if chosen.len() == size {
            out.push(chosen.clone());
            return Ok(());
        }
        if chosen.len() + clique_cover_bound(cand, nbr) < size {
            return Ok(());
        }
        let mut rest = cand;
        while rest != 0 {
            if chosen.len() + (rest.count_ones() as usize) < size {
                break;
            }
            let q = rest.trailing_zeros() as usize;
            rest &= !(1u128 << q);
            chosen.push(q);
            search(chosen, rest & !nbr[q], size, nbr, nodes, cap, out)?;
            chosen.pop();
        }
        Ok(())
    }
    let all: u128 = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    let branches: Vec<Result<Vec<Vec<usize>>, ()>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let above = all & !((1u128 << (p + 1)) - 1);
            let mut out = Vec::new();
            let mut chosen = vec![p];
            if size == 1 {
                return Ok(vec![vec![p]]);
            }
            search(
                &mut chosen,
                above & !nbr[p],
                size,
                &nbr,
                &nodes,
                node_cap,
                &mut out,
            )
            .map(|_| out)
        })
        .collect();
    let mut sets = Vec::new();
    for b in branches {
        let b =
            b.map_err(|_| internal(format!("independent set search exceeded {node_cap} nodes")))?;
        for s in b {
            let mut s: Vec<usize> = s.into_iter().map(|p| order[p]).collect();
            s.sort_unstable();
            sets.push(s);
        }
    }
    sets.sort();
    Ok(sets)
}

/// The linked scheme on Hoffman-Singleton vertices and 15-cocliques.
#[derive(Clone, Debug)]
pub struct LinkedHoSi {
    pub table: RelationTable,
    pub hosi: Graph,
    /// Vertex 50 + c is coclique c.
    pub cocliques: Vec<Vec<usize>>,
}

pub const COCLIQUE_NODE_CAP: u64 = 100_000_000;

pub fn linked_hosi_scheme() -> Result<LinkedHoSi, ConstructionError> {
    let hosi = hoffman_singleton();
    let cocliques = independent_sets(&hosi, 15, COCLIQUE_NODE_CAP)?;
    if cocliques.len() != 100 {
        return Err(internal(format!(
            "found {} 15-cocliques, expected 100",
            cocliques.len()
        )));
    }
    let member: Vec<[bool; 50]> = cocliques
        .iter()
        .map(|c| {
            let mut m = [false; 50];
            c.iter().for_each(|&x| m[x] = true);
            m
        })
        .collect();
    let adjacent = |x: usize, y: usize| -> bool {
        match (x < 50, y < 50) {
            (true, true) => false,
            (true, false) => member[y - 50][x],
            (false, true) => member[x - 50][y],
            (false, false) => {
                x != y
                    && (0..50)
                        .filter(|&z| member[x - 50][z] && member[y - 50][z])
                        .count()
                        == 8
            }
        }
    };
    let graph = Graph::from_fn(150, adjacent);
    if (0..150).any(|x| graph.degree(x) != 30) {
        return Err(internal("coclique graph is not 30-regular"));
    }
    let closed = coherent_closure(150, |x, y| u32::from(graph.has_edge(x, y)))?;
    let p = verify_scheme(&closed)?;
    let e = eigendata(&p)?;
    let k = krein_tensor(&e)?;
    let orders = cometric_orderings(&k, &p)?;
    let edge_class = closed.cell(
        0,
        50 + cocliques.iter().position(|c| c.contains(&0)).unwrap(),
    );
    let mut relabel = None;
    for a in &orders.arrays {
        let nat = natural_relation_ordering(&e, a)?;
        if nat[1] == edge_class {
            relabel = Some(nat);
            break;
        }
    }
    let nat =
        relabel.ok_or_else(|| internal("no natural ordering puts the coclique graph first"))?;
    let mut inv = vec![0; nat.len()];
    for (newc, &old) in nat.iter().enumerate() {
        inv[old] = newc;
    }
    let table = closed.fuse(&inv)?;
    Ok(LinkedHoSi {
        table,
        hosi,
        cocliques,
    })
}

/// Higman-Sims graph: relations 1 and 4 on the two coclique fibres.
pub fn higman_sims(l: &LinkedHoSi) -> Result<(Graph, Vec<usize>), ConstructionError> {
    let fs = FibreSystem::from_relations(&l.table, &[0, 2, 4])?;
    let hosi_fibre = fs.fibre_of[0];
    let others: Vec<usize> = (0..fs.w()).filter(|&f| f != hosi_fibre).collect();
    let ys = fs.union(&others);
    let g = Graph::from_fn(ys.len(), |a, b| matches!(l.table.cell(ys[a], ys[b]), 1 | 4));
    Ok((g, ys))
}

/// Ambient strongly regular graph and a halving of its vertex set.
#[derive(Clone, Debug)]
pub struct DecompositionInput {
    pub ambient: Graph,
    pub u1: Vec<usize>,
    pub u2: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum Decomposition {
    /// Neither nontrivial fibre eigenvalue is an ambient eigenvalue.
    Exceptional {
        ambient: SrgParams,
        fibre: SrgParams,
    },
    Scheme {
        table: RelationTable,
        tensor: IntersectionTensor,
        ambient: SrgParams,
        fibre: SrgParams,
    },
}

fn int_matrix_product(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum())
                .collect()
        })
        .collect()
}

/// Five relations from a strongly regular decomposition, or `Exceptional`.
pub fn from_srg_decomposition(
    inp: &DecompositionInput,
) -> Result<Decomposition, ConstructionError> {
    let dec = |m: &str| ConstructionError::Decomposition(m.to_string());
    let n = inp.u1.len();
    if n != inp.u2.len() || 2 * n != inp.ambient.n() {
        return Err(dec(
            "the two parts must have equal size and cover the graph",
        ));
    }
    let mut seen = vec![false; 2 * n];
    for &x in inp.u1.iter().chain(&inp.u2) {
        if x >= 2 * n || seen[x] {
            return Err(dec("parts are not a partition of the vertex set"));
        }
        seen[x] = true;
    }
    let (an, ak, al, am) = inp
        .ambient
        .srg_parameters()
        .ok_or_else(|| dec("ambient graph is not strongly regular"))?;
    let ambient = SrgParams::new(an, ak, al, am)?;
    let m1 = inp.ambient.induced(&inp.u1);
    let m2 = inp.ambient.induced(&inp.u2);
    let p1 = m1
        .srg_parameters()
        .ok_or_else(|| dec("first block is not strongly regular"))?;
    let p2 = m2
        .srg_parameters()
        .ok_or_else(|| dec("second block is not strongly regular"))?;
    if p1 != p2 {
        return Err(dec("blocks have different parameters"));
    }
    let fibre = SrgParams::new(p1.0, p1.1, p1.2, p1.3)?;
    let r_shared = fibre.r == ambient.r;
    let s_shared = fibre.s == ambient.s;
    if !r_shared && !s_shared {
        return Ok(Decomposition::Exceptional { ambient, fibre });
    }
    // The fibre eigenvalue not shared with the ambient graph is (r0 + s0)/2.
    let half = (&ambient.r + &ambient.s).scale(&rat(1, 2));
    let free = if s_shared { &fibre.r } else { &fibre.s };
    if *free != half {
        return Err(dec("fibre eigenvalue differs from (r0 + s0)/2"));
    }
    let c: Vec<Vec<i64>> = inp
        .u1
        .iter()
        .map(|&x| {
            inp.u2
                .iter()
                .map(|&y| i64::from(inp.ambient.has_edge(x, y)))
                .collect()
        })
        .collect();
    let mm = |g: &Graph| -> Vec<Vec<i64>> {
        (0..n)
            .map(|a| (0..n).map(|b| i64::from(g.has_edge(a, b))).collect())
            .collect()
    };
    if int_matrix_product(&mm(&m1), &c) != int_matrix_product(&c, &mm(&m2)) {
        return Err(dec("M1 C != C M2"));
    }
    let side: Vec<(usize, usize)> = {
        let mut s = vec![(0, 0); 2 * n];
        inp.u1.iter().enumerate().for_each(|(a, &x)| s[x] = (0, a));
        inp.u2.iter().enumerate().for_each(|(a, &x)| s[x] = (1, a));
        s
    };
    let table = RelationTable::from_fn(2 * n, |x, y| {
        let adj = inp.ambient.has_edge(x, y);
        match (x == y, side[x].0 == side[y].0, adj) {
            (true, _, _) => 0,
            (false, false, true) => 1,
            (false, true, true) => 2,
            (false, false, false) => 3,
            (false, true, false) => 4,
        }
    })
    .map_err(|e| dec(&e.to_string()))?;
    let tensor = verify_scheme(&table)?;
    // Fusion {A0, A1 + A2, A3 + A4} gives back the ambient graph.
    let fused = table.fuse(&[0, 1, 1, 2, 2])?;
    if fused != inp.ambient.to_table()? {
        return Err(internal("fusion does not reproduce the ambient graph"));
    }
    if *free != Scalar::int(fibre.k as i64) && !is_cometric_q_antipodal(&table, &tensor)? {
        return Err(internal(
            "primitive decomposition scheme is not cometric Q-antipodal",
        ));
    }
    Ok(Decomposition::Scheme {
        table,
        tensor,
        ambient,
        fibre,
    })
}

/// Some Q-polynomial ordering has J = {0, last} for some system.
pub fn is_cometric_q_antipodal(
    t: &RelationTable,
    p: &IntersectionTensor,
) -> Result<bool, ConstructionError> {
    let e = eigendata(p)?;
    let k = krein_tensor(&e)?;
    let orders = cometric_orderings(&k, p)?;
    let systems = find_imprimitivity_systems(t, p, &e, &k)?;
    Ok(orders.arrays.iter().any(|a| {
        let last = *a.ordering.last().unwrap();
        systems.iter().any(|s| s.j_set == [0, last])
    }))
}

/// Incidence of the (16,6,2) biplane from the difference set
/// {0, e1, e2, e3, e4, 1111} in Z_2^4: point x lies on block y iff x + y is in D.
pub fn biplane16() -> Vec<Vec<bool>> {
    let d = [0usize, 1, 2, 4, 8, 15];
    (0..16)
        .map(|x| (0..16).map(|y| d.contains(&(x ^ y))).collect())
        .collect()
}

/// Fano plane from the difference set {1,2,4} mod 7.
pub fn fano() -> Vec<Vec<bool>> {
    let d = [1usize, 2, 4];
    (0..7)
        .map(|x| (0..7).map(|y| d.contains(&((x + 7 - y) % 7))).collect())
        .collect()
}

#[derive(Clone, Debug)]
pub struct LinkedDesignScheme {
    pub table: RelationTable,
    pub tensor: IntersectionTensor,
    pub eigen: Eigendata,
    /// m_2 = (w-1) m_1 for the two idempotents with within-fibre eigenvalue -1.
    pub uniform: bool,
    /// k1 = 1: the rectangular scheme R(w,n).
    pub decomposable: bool,
    pub p11: Scalar,
}

/// Three-class scheme from pairwise linking incidences `links[(U,V)]`, U < V:
/// R1 incidence, R2 within-fibre, R3 cross non-incidence.
pub fn three_class_linked_designs(
    links: &BTreeMap<(usize, usize), Vec<Vec<bool>>>,
    w: usize,
    n: usize,
    k1: usize,
) -> Result<LinkedDesignScheme, ConstructionError> {
    let bad = |m: String| ConstructionError::Design(m);
    if w < 2 || n < 2 || k1 == 0 || k1 >= n {
        return Err(bad(format!(
            "need w >= 2 and 0 < k1 < n, got w={w} n={n} k1={k1}"
        )));
    }
    for u in 0..w {
        for v in u + 1..w {
            let c = links
                .get(&(u, v))
                .ok_or_else(|| bad(format!("missing link ({u},{v})")))?;
            if c.len() != n || c.iter().any(|row| row.len() != n) {
                return Err(bad(format!("link ({u},{v}) is not {n} x {n}")));
            }
            for a in 0..n {
                let row = c[a].iter().filter(|&&b| b).count();
                let col = (0..n).filter(|&b| c[b][a]).count();
                if row != k1 || col != k1 {
                    return Err(bad(format!(
                        "link ({u},{v}) has a line sum other than {k1}"
                    )));
                }
            }
        }
    }
    let table = RelationTable::from_fn(w * n, |x, y| {
        let (u, a, v, b) = (x / n, x % n, y / n, y % n);
        if u == v {
            usize::from(a != b) * 2
        } else {
            let inc = if u < v {
                links[&(u, v)][a][b]
            } else {
                links[&(v, u)][b][a]
            };
            if inc {
                1
            } else {
                3
            }
        }
    })
    .map_err(|e| bad(e.to_string()))?;
    let tensor = verify_scheme(&table).map_err(|e| bad(format!("incompatible links: {e}")))?;
    let eigen = eigendata(&tensor)?;
    let wm1 = (w - 1) as i64;
    let p11 = sqrt_exact(&(rat((k1 * (n - k1)) as i64, (n - 1) as i64) * rat_int(wm1 * wm1)))
        .expect("nonnegative");
    let minus_one = Scalar::int(-1);
    let pos: Vec<usize> = (1..=3).filter(|&j| *eigen.p(j, 2) == minus_one).collect();
    if pos.len() != 2 {
        return Err(internal(
            "expected two idempotents with within-fibre eigenvalue -1",
        ));
    }
    let (a, b) = if eigen.p(pos[0], 1).is_positive() {
        (pos[0], pos[1])
    } else {
        (pos[1], pos[0])
    };
    let uniform = eigen.m(b) == (w as u64 - 1) * eigen.m(a);
    let decomposable = k1 == 1;
    if uniform {
        let (n_, k_) = (n as i64, k1 as i64);
        let expected: Vec<(u64, Vec<Scalar>)> = vec![
            (
                1,
                vec![
                    Scalar::one(),
                    Scalar::int(wm1 * k_),
                    Scalar::int(n_ - 1),
                    Scalar::int(wm1 * (n_ - k_)),
                ],
            ),
            (
                (n - 1) as u64,
                vec![Scalar::one(), p11.clone(), minus_one.clone(), -&p11],
            ),
            (
                ((w - 1) * (n - 1)) as u64,
                vec![
                    Scalar::one(),
                    p11.scale(&rat(-1, wm1)),
                    minus_one.clone(),
                    p11.scale(&rat(1, wm1)),
                ],
            ),
            (
                (w - 1) as u64,
                vec![
                    Scalar::one(),
                    Scalar::int(-k_),
                    Scalar::int(n_ - 1),
                    Scalar::int(k_ - n_),
                ],
            ),
        ];
        for (m, row) in &expected {
            if !(0..4).any(|j| eigen.m(j) == *m && eigen.p_matrix()[j] == *row) {
                return Err(internal(
                    "eigenmatrix differs from the three-class uniform formula",
                ));
            }
        }
        if w >= 3 && !is_perfect_square(&rat((k1 * (n - k1)) as i64, (n - 1) as i64)) {
            return Err(internal("k1(n-k1)/(n-1) is not a square although w >= 3"));
        }
        let cometric = is_cometric_q_antipodal(&table, &tensor)?;
        let expect = if decomposable {
            (w == 2) != (n == 2)
        } else {
            true
        };
        if cometric != expect {
            return Err(internal(
                "cometric Q-antipodal status contradicts the three-class classification",
            ));
        }
    }
    Ok(LinkedDesignScheme {
        table,
        tensor,
        eigen,
        uniform,
        decomposable,
        p11,
    })
}

/// Bipartite double: the tensor product with K_2, class 2i for the same-side
/// copy of R_i and 2i + 1 for the cross copy.
pub fn bipartite_double(t: &RelationTable) -> RelationTable {
    tensor(t, &complete(2))
}

/// Almost Q-bipartite criterion: some Q-polynomial ordering has
/// q^i_{1i} = 0 for 0 < i < d and q^d_{1d} != 0.
pub fn double_criterion(arrays: &[KreinArray]) -> bool {
    arrays.iter().any(|a| {
        let d = a.d();
        (1..d).all(|i| a.a[i].is_zero()) && !a.a[d].is_zero()
    })
}

/// First eigenmatrix of a class-I four-class scheme, with Q checked
/// against its closed form.
pub fn class_i_eigenmatrices(
    srg: &SrgParams,
    w: u64,
    k1: u64,
    m1: u64,
) -> Result<Eigendata, ConstructionError> {
    let dom = |m: &str| ConstructionError::Domain(m.to_string());
    let (n, k, f, g) = (srg.n, srg.k, srg.f, srg.g);
    if w < 2 || k1 == 0 || k1 >= n || m1 == 0 || m1 >= w * f {
        return Err(dom("need w >= 2, 0 < k1 < n and 0 < m1 < w f"));
    }
    let m3 = w * f - m1;
    let int = |x: i64| Scalar::int(x);
    let (ni, ki, wi, k1i) = (n as i64, k as i64, w as i64, k1 as i64);
    let v1 = (w - 1) * k1;
    let p11 = sqrt_exact(&rat((m3 * (w - 1) * k1 * (n - k1)) as i64, (m1 * f) as i64))
        .map_err(|e| dom(&e.to_string()))?;
    let p31 = -p11.scale(&rat(m1 as i64, m3 as i64));
    let r = srg.r.clone();
    let s = srg.s.clone();
    let p = vec![
        vec![
            int(1),
            int(v1 as i64),
            int(ki),
            int((wi - 1) * (ni - k1i)),
            int(ni - 1 - ki),
        ],
        vec![int(1), p11.clone(), r.clone(), -&p11, -(&r + &int(1))],
        vec![int(1), int(0), s.clone(), int(0), -(&s + &int(1))],
        vec![int(1), p31.clone(), r.clone(), -&p31, -(&r + &int(1))],
        vec![int(1), int(-k1i), int(ki), int(k1i - ni), int(ni - 1 - ki)],
    ];
    let valencies = vec![1, v1, k, (w - 1) * (n - k1), n - 1 - k];
    let e = Eigendata::from_p(valencies, vec![1, m1, w * g, m3, w - 1], p);
    let q11 = p11.scale(&rat(m1 as i64, v1 as i64));
    let a = ni - 1 - ki;
    let printed = vec![
        vec![
            int(1),
            int(m1 as i64),
            int(wi * g as i64),
            int(m3 as i64),
            int(wi - 1),
        ],
        vec![int(1), q11.clone(), int(0), -&q11, int(-1)],
        vec![
            int(1),
            r.scale(&rat(m1 as i64, ki)),
            s.scale(&rat(wi * g as i64, ki)),
            r.scale(&rat(m3 as i64, ki)),
            int(wi - 1),
        ],
        vec![
            int(1),
            q11.scale(&rat(-k1i, ni - k1i)),
            int(0),
            q11.scale(&rat(k1i, ni - k1i)),
            int(-1),
        ],
        vec![
            int(1),
            (&r + &int(1)).scale(&rat(-(m1 as i64), a)),
            (&s + &int(1)).scale(&rat(-(wi * g as i64), a)),
            (&r + &int(1)).scale(&rat(-(m3 as i64), a)),
            int(wi - 1),
        ],
    ];
    if e.q_matrix() != printed.as_slice() {
        return Err(dom(
            "inputs are inconsistent: Q differs from its closed form",
        ));
    }
    e.check()
        .map_err(|_| dom("inputs are inconsistent: PQ != vI"))?;
    Ok(e)
}

/// Hemisystem scheme data for odd t >= 3.
#[derive(Clone, Debug)]
pub struct Hemisystem {
    pub array: KreinArray,
    /// Fibre graph of the decomposition of the GQ line graph.
    pub fibre: SrgParams,
    /// Complement of the fibre graph, as it heads the feasibility table.
    pub table_srg: SrgParams,
}

pub fn hemisystem_krein_array(t: u64) -> Result<Hemisystem, ConstructionError> {
    if t < 3 || t.is_multiple_of(2) {
        return Err(ConstructionError::Domain(format!(
            "t must be odd and at least 3, got {t}"
        )));
    }
    let ti = t as i64;
    let b0 = Scalar::int((ti * ti + 1) * (ti - 1));
    let b1 = Scalar::frac((ti * ti - ti + 1) * (ti * ti - ti + 1), ti);
    let b2 = Scalar::frac((ti * ti - ti + 1) * (ti - 1), ti);
    let one = Scalar::one();
    let b = vec![b0.clone(), b1.clone(), b2.clone(), one.clone()];
    let c = vec![one, b2, b1, b0];
    let array = KreinArray::from_bc(vec![0, 1, 2, 3, 4], b, c);
    let n = (t * t * t + 1) * (t + 1) / 2;
    let fibre = SrgParams::new(
        n,
        (t * t + 1) * (t - 1) / 2,
        (t - 3) / 2,
        (t - 1) * (t - 1) / 2,
    )?;
    let table_srg = fibre.complement();
    Ok(Hemisystem {
        array,
        fibre,
        table_srg,
    })
}
