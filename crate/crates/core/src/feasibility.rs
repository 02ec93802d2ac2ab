//! Parameter scan for four-class cometric Q-antipodal schemes whose fibres
//! carry a strongly regular graph, and the table renderers.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational as Rational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::{class_i_eigenmatrices, SrgParams};
use crate::exactnum::{is_perfect_square, rat, rat_int, rational_sqrt, Scalar};
use crate::qantipodal::profile;
use crate::schemes::IntersectionTensor;
use crate::spectral::{krein_array, krein_tensor, metric_orderings, KreinArray};

pub const DEFAULT_NMAX: u64 = 2000;
pub const DEFAULT_WMAX: u64 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeasibilityError {
    #[error("annotations line {line}: {msg}")]
    Annotation { line: usize, msg: String },
    #[error("golden line {line}: {msg}")]
    Golden { line: usize, msg: String },
}

/// Feasible srg parameters with integral eigenvalues, sorted by (n, k, lambda, mu).
pub fn srg_candidates(n_max: u64) -> Vec<SrgParams> {
    let n_max = n_max as i64;
    let mut out = Vec::new();
    // k = mu - r s, lambda = mu + r + s with r >= 1, s <= -2
    for r in 1..n_max {
        for s in (-n_max + 1..=-2).rev() {
            for mu in 1..n_max {
                let k = mu - r * s;
                let lambda = mu + r + s;
                if lambda < 0 {
                    break;
                }
                if k >= n_max {
                    break;
                }
                let num = k * (k - lambda - 1);
                if num % mu != 0 {
                    continue;
                }
                let n = k + 1 + num / mu;
                if n > n_max || k >= n - 1 {
                    continue;
                }
                let fnum = -k - s * (n - 1);
                if fnum % (r - s) != 0 {
                    continue;
                }
                let f = fnum / (r - s);
                let g = n - 1 - f;
                if f <= 0 || g <= 0 {
                    continue;
                }
                // Krein conditions and absolute bounds
                if (r + 1) * (k + r + 2 * r * s) > (k + r) * (s + 1) * (s + 1) {
                    continue;
                }
                if (s + 1) * (k + s + 2 * r * s) > (k + s) * (r + 1) * (r + 1) {
                    continue;
                }
                if 2 * n > f * (f + 3) || 2 * n > g * (g + 3) {
                    continue;
                }
                out.push((n as u64, k as u64, lambda as u64, mu as u64));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out.into_iter()
        .map(|(n, k, l, m)| {
            SrgParams::new(n, k, l, m).expect("candidate passes the srg identities")
        })
        .collect()
}

/// q~^1_11 of the fibre subscheme; r is the eigenvalue of multiplicity f.
pub fn q_tilde(srg: &SrgParams) -> Rational {
    let (n, k, f) = (srg.n as i64, srg.k as i64, srg.f as i64);
    let r = srg.r.to_rational().expect("integral eigenvalues").clone();
    let one = rat_int(1);
    let a = rat_int(n - 1 - k);
    rat(f * f, n) * (&one + &r * &r * &r / rat_int(k * k) - (&one + &r).pow(3) / (&a * &a))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct K1Infeasible {
    pub q_tilde: Rational,
    pub reason: String,
}

pub fn k1_from_srg(srg: &SrgParams) -> Result<u64, K1Infeasible> {
    let q = q_tilde(srg);
    let fail = |reason: String| K1Infeasible {
        q_tilde: q.clone(),
        reason,
    };
    let n = srg.n as i64;
    let k1 = if q.is_zero() {
        rat(n, 2)
    } else {
        let x = rat_int(4 * srg.f as i64) + &q * &q;
        let root =
            rational_sqrt(&x).ok_or_else(|| fail(format!("4f + q^2 = {x} is not a square")))?;
        rat(n, 2) * (rat_int(1) - &q / root)
    };
    if !k1.is_integer() || !k1.is_positive() {
        return Err(fail(format!("k1 = {k1} is not a positive integer")));
    }
    let k1 = k1.to_integer();
    let k1: u64 = k1.try_into().map_err(|_| fail("k1 out of range".into()))?;
    if srg.n != 2 * k1 && !is_perfect_square(&rat((k1 * (srg.n - k1)) as i64, srg.f as i64)) {
        return Err(fail(format!(
            "k1 (n - k1) / f = {}/{} is not a square",
            k1 * (srg.n - k1),
            srg.f
        )));
    }
    Ok(k1)
}

/// floor((f+1)(f-2) / 2g), or 1 when f < 3.
pub fn absolute_bound_w(f: u64, g: u64) -> u64 {
    if f < 3 {
        1
    } else {
        (f + 1) * (f - 2) / (2 * g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Unique,
    Exists,
    Nonexistent,
    Open,
}

impl Status {
    pub fn mark(self) -> char {
        match self {
            Status::Unique => '!',
            Status::Exists => '+',
            Status::Nonexistent => '-',
            Status::Open => ' ',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Unique => "unique",
            Status::Exists => "exists",
            Status::Nonexistent => "nonexistent",
            Status::Open => "open",
        }
    }

    fn parse(s: &str) -> Option<Status> {
        Some(match s {
            "unique" => Status::Unique,
            "exists" => Status::Exists,
            "nonexistent" => Status::Nonexistent,
            "open" => Status::Open,
            _ => return None,
        })
    }
}

/// Curated existence status and names, keyed by (n, k, lambda, mu, w).
#[derive(Clone, Debug, Default)]
pub struct Annotations {
    map: BTreeMap<(u64, u64, u64, u64, u64), (Status, String)>,
}

pub const BUNDLED_ANNOTATIONS: &str = include_str!("../data/annotations.tsv");
pub const BUNDLED_GOLDEN: &str = include_str!("../data/appendix.golden");

impl Annotations {
    pub fn parse(text: &str) -> Result<Self, FeasibilityError> {
        let mut map = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| FeasibilityError::Annotation {
                line: ln + 1,
                msg: msg.to_string(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 {
                return Err(err("expected key, status and name columns"));
            }
            let key: Vec<u64> = cols[0]
                .split_whitespace()
                .map(|x| x.parse().map_err(|_| err("key is not five integers")))
                .collect::<Result<_, _>>()?;
            if key.len() != 5 {
                return Err(err("key is not five integers"));
            }
            let status = Status::parse(cols[1].trim()).ok_or_else(|| err("unknown status"))?;
            let name = cols
                .get(2)
                .map(|s| s.trim().to_string())
                .unwrap_or_default();
            map.insert((key[0], key[1], key[2], key[3], key[4]), (status, name));
        }
        Ok(Annotations { map })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_ANNOTATIONS).expect("bundled annotations parse")
    }

    pub fn get(&self, srg: &SrgParams, w: u64) -> (Status, &str) {
        match self.map.get(&(srg.n, srg.k, srg.lambda, srg.mu, w)) {
            Some((s, name)) => (*s, name.as_str()),
            None => (Status::Open, ""),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibleRow {
    pub srg: SrgParams,
    pub w: u64,
    pub k1: u64,
    pub array: KreinArray,
    /// v1..v4.
    pub partition: [u64; 4],
    /// Eigenvalues of A_1.
    pub spectrum: Vec<Scalar>,
    /// The scheme is also metric.
    pub metric: bool,
    pub status: Status,
    pub name: String,
}

impl FeasibleRow {
    pub fn v(&self) -> u64 {
        self.w * self.srg.n
    }

    pub fn note(&self) -> String {
        match (self.name.is_empty(), self.metric) {
            (true, true) => "(P)".into(),
            (false, true) => format!("{} (P)", self.name),
            _ => self.name.clone(),
        }
    }
}

/// Why the scan stopped short of the bound for one srg.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Infeasible {
    Eigenmatrix(String),
    Intersection {
        h: usize,
        i: usize,
        j: usize,
        value: String,
    },
    Krein {
        h: usize,
        i: usize,
        j: usize,
        value: String,
    },
    NotCometric,
    QBipartite,
    Profile(String),
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasible::Eigenmatrix(m) => write!(f, "eigenmatrix: {m}"),
            Infeasible::Intersection { h, i, j, value } => write!(f, "p^{h}_{i}{j} = {value}"),
            Infeasible::Krein { h, i, j, value } => write!(f, "q^{h}_{i}{j} = {value} < 0"),
            Infeasible::NotCometric => write!(f, "not cometric in the natural ordering"),
            Infeasible::QBipartite => write!(f, "Q-bipartite"),
            Infeasible::Profile(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibleGroup {
    pub srg: SrgParams,
    pub k1: u64,
    pub bound: u64,
    pub rows: Vec<FeasibleRow>,
    /// First w that failed, if the scan stopped before w_max and the bound.
    pub failure: Option<(u64, Infeasible)>,
}

impl FeasibleGroup {
    /// The bound is printed unless a parameter failure cut the group short.
    pub fn shown_bound(&self) -> Option<u64> {
        if self.failure.is_none() {
            Some(self.bound)
        } else {
            None
        }
    }
}

/// Checks one (srg, w) and returns its row on success.
pub fn check_parameters(srg: &SrgParams, w: u64, k1: u64) -> Result<FeasibleRow, Infeasible> {
    let e = class_i_eigenmatrices(srg, w, k1, srg.f)
        .map_err(|e| Infeasible::Eigenmatrix(e.to_string()))?;
    let vals: Vec<u64> = e.valencies().to_vec();
    let mult: Vec<u64> = e.multiplicities().to_vec();
    let v = e.v() as i64;
    let mut p = vec![0u64; 125];
    for h in 0..5 {
        for i in 0..5 {
            for j in 0..5 {
                let s: Scalar = (0..5)
                    .map(|l| {
                        (e.q(i, l) * e.q(j, l) * e.q(h, l))
                            .scale(&rat(1, (mult[l] * mult[l]) as i64))
                    })
                    .sum();
                let x = s.scale(&rat((vals[i] * vals[j]) as i64, v));
                let value =
                    x.to_i64()
                        .filter(|&x| x >= 0)
                        .ok_or_else(|| Infeasible::Intersection {
                            h,
                            i,
                            j,
                            value: x.to_string(),
                        })?;
                p[(h * 5 + i) * 5 + j] = value as u64;
            }
        }
    }
    let tensor = IntersectionTensor::from_fn(4, |h, i, j| p[(h * 5 + i) * 5 + j]);
    let k = krein_tensor(&e).map_err(|err| match err {
        crate::spectral::SpectralError::KreinViolation { h, i, j, value } => {
            Infeasible::Krein { h, i, j, value }
        }
        other => Infeasible::Eigenmatrix(other.to_string()),
    })?;
    for h in 0..5usize {
        for j in 0..5 {
            if h.abs_diff(j) > 1 && !k.q(h, 1, j).is_zero() {
                return Err(Infeasible::NotCometric);
            }
        }
    }
    let array = krein_array(&k, &[0, 1, 2, 3, 4]);
    if array.b.iter().chain(&array.c).any(|x| !x.is_positive()) {
        return Err(Infeasible::NotCometric);
    }
    if array.a.iter().all(Scalar::is_zero) {
        return Err(Infeasible::QBipartite);
    }
    profile(&array, w as usize).map_err(|e| Infeasible::Profile(e.to_string()))?;
    Ok(FeasibleRow {
        srg: srg.clone(),
        w,
        k1,
        partition: [vals[1], vals[2], vals[3], vals[4]],
        spectrum: (0..5).map(|j| e.p(j, 1).clone()).collect(),
        metric: !metric_orderings(&tensor).is_empty(),
        array,
        status: Status::Open,
        name: String::new(),
    })
}

fn scan_one(srg: &SrgParams, w_max: u64, ann: &Annotations) -> Option<FeasibleGroup> {
    let k1 = k1_from_srg(srg).ok()?;
    let bound = absolute_bound_w(srg.f, srg.g);
    let mut rows = Vec::new();
    let mut failure = None;
    for w in 2..=w_max.min(bound) {
        match check_parameters(srg, w, k1) {
            Ok(mut row) => {
                let (status, name) = ann.get(srg, w);
                row.status = status;
                row.name = name.to_string();
                rows.push(row);
            }
            Err(why) => {
                failure = Some((w, why));
                break;
            }
        }
    }
    if rows.is_empty() {
        return None;
    }
    Some(FeasibleGroup {
        srg: srg.clone(),
        k1,
        bound,
        rows,
        failure,
    })
}

/// Groups in (n, k, lambda, mu) order, rows by increasing w. Once a w fails
/// the larger ones are not tried.
pub fn scan(n_max: u64, w_max: u64, ann: &Annotations) -> Vec<FeasibleGroup> {
    let cands = srg_candidates(n_max);
    let mut groups: Vec<FeasibleGroup> = cands
        .par_iter()
        .filter_map(|s| scan_one(s, w_max, ann))
        .collect();
    groups.sort_by_key(|g| g.srg.tuple());
    groups
}

fn render_array(a: &KreinArray) -> String {
    let b: Vec<String> = a.b.iter().map(Scalar::render3).collect();
    let c: Vec<String> = a.c.iter().map(Scalar::render3).collect();
    format!("{{{}; {}}}", b.join(", "), c.join(", "))
}

pub fn group_header(g: &FeasibleGroup) -> String {
    let h = format!("   {}", g.srg);
    match g.shown_bound() {
        Some(b) => format!("{h:<47} w <= {b}"),
        None => h,
    }
}

pub fn row_line(r: &FeasibleRow) -> String {
    let p = &r.partition;
    let s: Vec<String> = r.spectrum.iter().map(Scalar::render3).collect();
    let line = format!(
        "{}{:<46} {:>2} {:>5}=1+{:>4}+{:>5}+{:>5}+{:>4} {:>5} {:>4} {:>2} {:>4} {:>5} {}",
        r.status.mark(),
        render_array(&r.array),
        r.w,
        r.v(),
        p[0],
        p[1],
        p[2],
        p[3],
        s[0],
        s[1],
        s[2],
        s[3],
        s[4],
        r.note()
    );
    line.trim_end().to_string()
}

/// The table in the fixed-width layout of the golden file.
pub fn render_facsimile(groups: &[FeasibleGroup]) -> String {
    let mut out = String::new();
    for g in groups {
        out.push_str(&"-".repeat(23));
        out.push('\n');
        out.push_str(&group_header(g));
        out.push('\n');
        for r in &g.rows {
            out.push_str(&row_line(r));
            out.push('\n');
        }
    }
    out
}

pub fn render_tsv(groups: &[FeasibleGroup]) -> String {
    let mut out = String::from(
        "n\tk\tlambda\tmu\tw_bound\tstatus\tkrein_array\tw\tv\tv1\tv2\tv3\tv4\tspectrum\tnote\n",
    );
    for g in groups {
        let bound = g.shown_bound().map(|b| b.to_string()).unwrap_or_default();
        for r in &g.rows {
            let spec: Vec<String> = r.spectrum.iter().map(Scalar::render3).collect();
            let p = r.partition;
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                g.srg.n,
                g.srg.k,
                g.srg.lambda,
                g.srg.mu,
                bound,
                r.status.name(),
                render_array(&r.array),
                r.w,
                r.v(),
                p[0],
                p[1],
                p[2],
                p[3],
                spec.join(" "),
                r.note()
            ));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffKind {
    Missing,
    Extra,
    Diff,
}

impl fmt::Display for DiffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiffKind::Missing => "MISSING",
            DiffKind::Extra => "EXTRA",
            DiffKind::Diff => "DIFF",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenDiff {
    pub kind: DiffKind,
    /// "srg(n,k,l,m)" for a header, "srg(n,k,l,m) w=W" for a row.
    pub key: String,
    pub expected: Option<String>,
    pub found: Option<String>,
}

impl fmt::Display for GoldenDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.key)?;
        if let Some(e) = &self.expected {
            write!(f, "\n  expected: {e}")?;
        }
        if let Some(x) = &self.found {
            write!(f, "\n  found:    {x}")?;
        }
        Ok(())
    }
}

/// Keyed lines of a facsimile: headers under the srg, rows under (srg, w).
fn keyed_lines(text: &str) -> Result<Vec<(String, String)>, FeasibilityError> {
    let mut out = Vec::new();
    let mut current: Option<String> = None;
    for (ln, line) in text.lines().enumerate() {
        if line.is_empty() || line.chars().all(|c| c == '-') {
            continue;
        }
        let err = |msg: &str| FeasibilityError::Golden {
            line: ln + 1,
            msg: msg.to_string(),
        };
        let t = line.trim_start();
        if t.starts_with("srg(") {
            let end = t.find(')').ok_or_else(|| err("unterminated srg"))?;
            let key = t[..=end].to_string();
            out.push((key.clone(), line.to_string()));
            current = Some(key);
        } else {
            let group = current
                .as_ref()
                .ok_or_else(|| err("row before any group header"))?;
            let close = line
                .find('}')
                .ok_or_else(|| err("row without a Krein array"))?;
            let w = line[close + 1..]
                .split_whitespace()
                .next()
                .ok_or_else(|| err("row without w"))?;
            out.push((format!("{group} w={w}"), line.to_string()));
        }
    }
    Ok(out)
}

pub fn compare_golden(golden: &str, found: &str) -> Result<Vec<GoldenDiff>, FeasibilityError> {
    let exp = keyed_lines(golden)?;
    let got = keyed_lines(found)?;
    let got_map: BTreeMap<&str, &str> = got.iter().map(|(k, l)| (k.as_str(), l.as_str())).collect();
    let exp_map: BTreeMap<&str, &str> = exp.iter().map(|(k, l)| (k.as_str(), l.as_str())).collect();
    let mut diffs = Vec::new();
    for (k, line) in &exp {
        match got_map.get(k.as_str()) {
            None => diffs.push(GoldenDiff {
                kind: DiffKind::Missing,
                key: k.clone(),
                expected: Some(line.clone()),
                found: None,
            }),
            Some(g) if g != line => diffs.push(GoldenDiff {
                kind: DiffKind::Diff,
                key: k.clone(),
                expected: Some(line.clone()),
                found: Some(g.to_string()),
            }),
            _ => {}
        }
    }
    for (k, line) in &got {
        if !exp_map.contains_key(k.as_str()) {
            diffs.push(GoldenDiff {
                kind: DiffKind::Extra,
                key: k.clone(),
                expected: None,
                found: Some(line.clone()),
            });
        }
    }
    Ok(diffs)
}

/// Rows w and w+1 of a group are related by the dismantling formulas.
pub fn check_dismantled_consistency(g: &FeasibleGroup) -> Result<(), String> {
    for pair in g.rows.windows(2) {
        let (small, large) = (&pair[0], &pair[1]);
        let mapped = crate::qantipodal::dismantled_krein_array(
            &large.array,
            large.w as usize,
            small.w as usize,
        )
        .map_err(|e| e.to_string())?;
        if !mapped.same_parameters(&small.array) {
            return Err(format!(
                "{} w={} does not dismantle to w={}",
                g.srg, large.w, small.w
            ));
        }
    }
    Ok(())
}
