//! Relation tables, scheme axioms and intersection numbers.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed header, expected `scheme v=<int> d=<int>`")]
    MalformedHeader,
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("expected {expected} entries, found {found}")]
    RowLength { expected: usize, found: usize },
    #[error("not a class index: `{0}`")]
    BadToken(String),
    #[error("class index {value} out of range 0..={d}")]
    OutOfRange { value: usize, d: usize },
    #[error("asymmetric cell: ({row},{col}) differs from its transpose")]
    Asymmetric { row: usize, col: usize },
    #[error("nonzero diagonal entry at ({row},{row})")]
    NonzeroDiagonal { row: usize },
    #[error("off-diagonal class 0 at ({row},{col})")]
    ZeroOffDiagonal { row: usize, col: usize },
    #[error("class {0} never occurs")]
    MissingClass(usize),
    #[error("more than 255 classes")]
    TooManyClasses,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("parse error at {}: {kind}", location(.line, .column))]
pub struct ParseError {
    /// 1-based line in the input, when known.
    pub line: Option<usize>,
    /// 0-based matrix column, when known.
    pub column: Option<usize>,
    pub kind: ParseErrorKind,
}

fn location(line: &Option<usize>, column: &Option<usize>) -> String {
    match (line, column) {
        (Some(l), Some(c)) => format!("line {l}, column {c}"),
        (Some(l), None) => format!("line {l}"),
        (None, Some(c)) => format!("column {c}"),
        (None, None) => "table".to_string(),
    }
}

impl ParseError {
    fn at(line: Option<usize>, column: Option<usize>, kind: ParseErrorKind) -> Self {
        ParseError { line, column, kind }
    }
}

/// First pair of vertex pairs in the same relation with differing path counts.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error(
    "not a scheme: p^{h}_{{{i},{j}}} is {count} at ({},{}) but {other} at ({},{})",
    first.0, first.1, second.0, second.1
)]
pub struct NotAScheme {
    pub i: usize,
    pub j: usize,
    pub h: usize,
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub count: u64,
    pub other: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("vertex subset is empty")]
    EmptySubset,
    #[error("vertex {0} out of range or repeated")]
    BadVertex(usize),
    #[error("invalid class map: {0}")]
    BadClassMap(String),
    #[error("colouring is not homogeneous: the diagonal splits into {0} colours")]
    NotHomogeneous(usize),
    #[error("colouring is not symmetric at ({0},{1})")]
    NotSymmetric(usize, usize),
}

/// Dense symmetric v x v table of class indices 0..=d.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RelationTable {
    v: usize,
    d: usize,
    cells: Vec<u8>,
}

impl fmt::Debug for RelationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RelationTable(v={}, d={})", self.v, self.d)
    }
}

impl RelationTable {
    /// Validates a row-major cell vector.
    pub fn from_cells(v: usize, cells: Vec<u8>) -> Result<Self, ParseError> {
        assert_eq!(cells.len(), v * v, "cell vector has wrong length");
        let mut d = 0usize;
        for x in 0..v {
            if cells[x * v + x] != 0 {
                return Err(ParseError::at(
                    None,
                    Some(x),
                    ParseErrorKind::NonzeroDiagonal { row: x },
                ));
            }
            for y in 0..v {
                let c = cells[x * v + y];
                if c != cells[y * v + x] {
                    return Err(ParseError::at(
                        None,
                        Some(y),
                        ParseErrorKind::Asymmetric { row: x, col: y },
                    ));
                }
                if x != y && c == 0 {
                    return Err(ParseError::at(
                        None,
                        Some(y),
                        ParseErrorKind::ZeroOffDiagonal { row: x, col: y },
                    ));
                }
                d = d.max(c as usize);
            }
        }
        let mut seen = vec![false; d + 1];
        for &c in &cells {
            seen[c as usize] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ParseError::at(
                None,
                None,
                ParseErrorKind::MissingClass(missing),
            ));
        }
        Ok(RelationTable { v, d, cells })
    }

    pub fn from_fn(v: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self, ParseError> {
        let mut cells = Vec::with_capacity(v * v);
        for x in 0..v {
            for y in 0..v {
                let c = f(x, y);
                if c > 255 {
                    return Err(ParseError::at(
                        None,
                        Some(y),
                        ParseErrorKind::TooManyClasses,
                    ));
                }
                cells.push(c as u8);
            }
        }
        Self::from_cells(v, cells)
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn cell(&self, x: usize, y: usize) -> usize {
        self.cells[x * self.v + y] as usize
    }

    pub fn row(&self, x: usize) -> &[u8] {
        &self.cells[x * self.v..(x + 1) * self.v]
    }

    /// Valencies read off row 0.
    pub fn valencies(&self) -> Vec<usize> {
        let mut out = vec![0; self.d + 1];
        for &c in self.row(0) {
            out[c as usize] += 1;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("scheme v={} d={}\n", self.v, self.d);
        for x in 0..self.v {
            let row: Vec<String> = self.row(x).iter().map(|c| c.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Merges classes along `map` (old class -> new class); only class 0 may map to 0.
    pub fn fuse(&self, map: &[usize]) -> Result<RelationTable, SchemeError> {
        if map.len() != self.d + 1 {
            return Err(SchemeError::BadClassMap(format!(
                "expected {} entries",
                self.d + 1
            )));
        }
        if map[0] != 0 || map[1..].contains(&0) {
            return Err(SchemeError::BadClassMap("only class 0 may map to 0".into()));
        }
        RelationTable::from_fn(self.v, |x, y| map[self.cell(x, y)])
            .map_err(|e| SchemeError::BadClassMap(e.to_string()))
    }
}

pub fn parse_scheme(text: &str) -> Result<RelationTable, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(ParseError::at(
        Some(1),
        None,
        ParseErrorKind::MalformedHeader,
    ))?;
    let (v, d) = parse_header(header).ok_or(ParseError::at(
        Some(hline),
        None,
        ParseErrorKind::MalformedHeader,
    ))?;
    if d > 255 {
        return Err(ParseError::at(
            Some(hline),
            None,
            ParseErrorKind::TooManyClasses,
        ));
    }
    let mut cells = Vec::with_capacity(v * v);
    let mut line_of_row = Vec::with_capacity(v);
    for (lineno, line) in lines {
        if line_of_row.len() == v {
            return Err(ParseError::at(
                Some(lineno),
                None,
                ParseErrorKind::RowCount {
                    expected: v,
                    found: v + 1,
                },
            ));
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != v {
            return Err(ParseError::at(
                Some(lineno),
                None,
                ParseErrorKind::RowLength {
                    expected: v,
                    found: toks.len(),
                },
            ));
        }
        for (col, tok) in toks.iter().enumerate() {
            let value: usize = tok.parse().map_err(|_| {
                ParseError::at(
                    Some(lineno),
                    Some(col),
                    ParseErrorKind::BadToken(tok.to_string()),
                )
            })?;
            if value > d {
                return Err(ParseError::at(
                    Some(lineno),
                    Some(col),
                    ParseErrorKind::OutOfRange { value, d },
                ));
            }
            cells.push(value as u8);
        }
        line_of_row.push(lineno);
    }
    if line_of_row.len() != v {
        return Err(ParseError::at(
            None,
            None,
            ParseErrorKind::RowCount {
                expected: v,
                found: line_of_row.len(),
            },
        ));
    }
    let table = RelationTable::from_cells(v, cells).map_err(|mut e| {
        // Attach the input line of the offending row.
        let row = match e.kind {
            ParseErrorKind::Asymmetric { row, .. }
            | ParseErrorKind::NonzeroDiagonal { row }
            | ParseErrorKind::ZeroOffDiagonal { row, .. } => Some(row),
            _ => None,
        };
        e.line = row.map(|r| line_of_row[r]);
        e
    })?;
    if table.d != d {
        return Err(ParseError::at(
            Some(hline),
            None,
            ParseErrorKind::MissingClass(d),
        ));
    }
    Ok(table)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut it = line.split_whitespace();
    if it.next()? != "scheme" {
        return None;
    }
    let v = it.next()?.strip_prefix("v=")?.parse().ok()?;
    let d = it.next()?.strip_prefix("d=")?.parse().ok()?;
    if it.next().is_some() || v == 0 {
        return None;
    }
    Some((v, d))
}

/// The numbers p^h_ij, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntersectionTensor {
    d: usize,
    p: Vec<u64>,
}

impl IntersectionTensor {
    /// Builds a tensor from p(h,i,j) values without checking them.
    pub fn from_fn(d: usize, f: impl Fn(usize, usize, usize) -> u64) -> Self {
        let r = d + 1;
        let mut p = Vec::with_capacity(r * r * r);
        for h in 0..r {
            for i in 0..r {
                for j in 0..r {
                    p.push(f(h, i, j));
                }
            }
        }
        IntersectionTensor { d, p }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn p(&self, h: usize, i: usize, j: usize) -> u64 {
        let r = self.d + 1;
        self.p[(h * r + i) * r + j]
    }

    pub fn valency(&self, i: usize) -> u64 {
        self.p(0, i, i)
    }

    pub fn valencies(&self) -> Vec<u64> {
        (0..=self.d).map(|i| self.valency(i)).collect()
    }

    pub fn v(&self) -> u64 {
        self.valencies().iter().sum()
    }

    /// Same tensor with classes renamed: new class `k` is old class `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> IntersectionTensor {
        IntersectionTensor::from_fn(self.d, |h, i, j| self.p(perm[h], perm[i], perm[j]))
    }

    /// Checks the standard identities; returns the first failure.
    pub fn check_invariants(&self) -> Result<(), String> {
        let r = self.d + 1;
        let val = self.valencies();
        for h in 0..r {
            for i in 0..r {
                let mut row = 0;
                for j in 0..r {
                    if self.p(h, i, j) != self.p(h, j, i) {
                        return Err(format!("p^{h}_{{{i},{j}}} not symmetric"));
                    }
                    let want = if h == 0 && i == j { val[i] } else { 0 };
                    if h == 0 && self.p(0, i, j) != want {
                        return Err(format!("p^0_{{{i},{j}}} != delta v_i"));
                    }
                    if val[h] * self.p(h, i, j) != val[i] * self.p(i, h, j) {
                        return Err(format!("v_h p^{h}_{{{i},{j}}} != v_i p^{i}_{{{h},{j}}}"));
                    }
                    row += self.p(h, i, j);
                }
                if row != val[i] {
                    return Err(format!("sum_j p^{h}_{{{i},j}} != v_{i}"));
                }
            }
        }
        Ok(())
    }
}

fn path_counts(t: &RelationTable, x: usize, y: usize, out: &mut [u64]) {
    let r = t.d + 1;
    out.iter_mut().for_each(|c| *c = 0);
    let rx = t.row(x);
    let ry = t.row(y);
    for z in 0..t.v {
        out[rx[z] as usize * r + ry[z] as usize] += 1;
    }
}

/// Brute-force check of the constant path counts; returns the tensor.
pub fn verify_scheme(t: &RelationTable) -> Result<IntersectionTensor, NotAScheme> {
    let r = t.d + 1;
    let v = t.v;
    // Reference pair and counts for every class.
    let mut refs: Vec<Option<((usize, usize), Vec<u64>)>> = vec![None; r];
    let mut found = 0;
    'outer: for x in 0..v {
        for y in 0..v {
            let h = t.cell(x, y);
            if refs[h].is_none() {
                let mut c = vec![0; r * r];
                path_counts(t, x, y, &mut c);
                refs[h] = Some(((x, y), c));
                found += 1;
                if found == r {
                    break 'outer;
                }
            }
        }
    }
    let refs: Vec<((usize, usize), Vec<u64>)> = refs
        .into_iter()
        .map(|o| o.expect("every class occurs"))
        .collect();
    let witness = (0..v).into_par_iter().find_map_first(|x| {
        let mut c = vec![0; r * r];
        for y in 0..v {
            let h = t.cell(x, y);
            path_counts(t, x, y, &mut c);
            let (pair, want) = &refs[h];
            if let Some(k) = (0..r * r).find(|&k| c[k] != want[k]) {
                return Some(NotAScheme {
                    i: k / r,
                    j: k % r,
                    h,
                    first: *pair,
                    second: (x, y),
                    count: want[k],
                    other: c[k],
                });
            }
        }
        None
    });
    if let Some(w) = witness {
        return Err(w);
    }
    Ok(IntersectionTensor::from_fn(t.d, |h, i, j| {
        refs[h].1[i * r + j]
    }))
}

/// Induced table on a vertex subset, with classes compacted.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub table: RelationTable,
    /// `labels[k]` is the original class of compacted class `k`.
    pub labels: Vec<usize>,
    pub vertices: Vec<usize>,
}

impl Restriction {
    /// Compacted index of an original class, if it occurs.
    pub fn compact(&self, class: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == class)
    }
}

pub fn restrict(t: &RelationTable, ys: &[usize]) -> Result<Restriction, SchemeError> {
    if ys.is_empty() {
        return Err(SchemeError::EmptySubset);
    }
    let mut seen = vec![false; t.v];
    for &y in ys {
        if y >= t.v || seen[y] {
            return Err(SchemeError::BadVertex(y));
        }
        seen[y] = true;
    }
    let mut present = vec![false; t.d + 1];
    for &x in ys {
        for &y in ys {
            present[t.cell(x, y)] = true;
        }
    }
    let labels: Vec<usize> = (0..=t.d).filter(|&c| present[c]).collect();
    let mut compact = vec![0usize; t.d + 1];
    for (k, &c) in labels.iter().enumerate() {
        compact[c] = k;
    }
    let m = ys.len();
    let mut cells = Vec::with_capacity(m * m);
    for &x in ys {
        for &y in ys {
            cells.push(compact[t.cell(x, y)] as u8);
        }
    }
    let table = RelationTable {
        v: m,
        d: labels.len() - 1,
        cells,
    };
    Ok(Restriction {
        table,
        labels,
        vertices: ys.to_vec(),
    })
}

/// Coarsest coherent refinement (2-dimensional Weisfeiler-Leman) of a
/// symmetric colouring of X x X, returned as a relation table.
///
/// Classes are numbered canonically: 0 is the diagonal, the rest by
/// ascending valency, then by first occurrence in row 0.
pub fn coherent_closure(
    v: usize,
    init: impl Fn(usize, usize) -> u32,
) -> Result<RelationTable, SchemeError> {
    let mut col: Vec<u32> = Vec::with_capacity(v * v);
    for x in 0..v {
        for y in 0..v {
            // Diagonal entries are kept apart from the start.
            col.push(if x == y { 0 } else { init(x, y) + 1 });
        }
    }
    let mut ncol = renumber(&mut col);
    loop {
        let sigs: Vec<(u32, Vec<u64>)> = (0..v * v)
            .into_par_iter()
            .map(|k| {
                let (x, y) = (k / v, k % v);
                let mut s: Vec<u64> = (0..v)
                    .map(|z| ((col[x * v + z] as u64) << 32) | col[z * v + y] as u64)
                    .collect();
                s.sort_unstable();
                (col[k], s)
            })
            .collect();
        let mut ids: BTreeMap<&(u32, Vec<u64>), u32> = BTreeMap::new();
        for s in &sigs {
            let next = ids.len() as u32;
            ids.entry(s).or_insert(next);
        }
        let fresh = ids.len();
        col = sigs.iter().map(|s| ids[s]).collect();
        renumber(&mut col);
        if fresh == ncol {
            break;
        }
        ncol = fresh;
    }
    let diag: std::collections::BTreeSet<u32> = (0..v).map(|x| col[x * v + x]).collect();
    if diag.len() != 1 {
        return Err(SchemeError::NotHomogeneous(diag.len()));
    }
    for x in 0..v {
        for y in 0..x {
            if col[x * v + y] != col[y * v + x] {
                return Err(SchemeError::NotSymmetric(x, y));
            }
        }
    }
    // Canonical class order from row 0.
    let mut val: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for y in 0..v {
        let e = val.entry(col[y]).or_insert((0, y));
        e.0 += 1;
    }
    let mut order: Vec<(usize, usize, u32)> =
        val.iter().map(|(&c, &(n, first))| (n, first, c)).collect();
    order.sort_unstable_by_key(|&(n, first, c)| (c != col[0], n, first));
    let mut map = BTreeMap::new();
    for (k, &(_, _, c)) in order.iter().enumerate() {
        map.insert(c, k as u8);
    }
    let cells = col.iter().map(|c| map[c]).collect();
    Ok(RelationTable {
        v,
        d: order.len() - 1,
        cells,
    })
}

/// Renames colours to 0.. in order of first occurrence; returns the count.
fn renumber(col: &mut [u32]) -> usize {
    let mut map: BTreeMap<u32, u32> = BTreeMap::new();
    for c in col.iter_mut() {
        let next = map.len() as u32;
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: usize) -> RelationTable {
        RelationTable::from_fn(n, |x, y| usize::from(x != y)).unwrap()
    }

    fn cycle(n: usize) -> RelationTable {
        RelationTable::from_fn(n, |x, y| {
            let d = (x + n - y) % n;
            d.min(n - d)
        })
        .unwrap()
    }

    #[test]
    fn parse_k2() {
        let t = parse_scheme("scheme v=2 d=1\n0 1\n1 0\n").unwrap();
        assert_eq!((t.v(), t.d()), (2, 1));
        assert_eq!(parse_scheme(&t.to_text()).unwrap(), t);
    }

    #[test]
    fn parse_comments_and_errors() {
        let t = parse_scheme("# K2\nscheme v=2 d=1\n# body\n0 1\n1 0\n").unwrap();
        assert_eq!(t.d(), 1);
        let e = parse_scheme("scheme v=3 d=2\n0 1 2\n1 0 2\n2 1 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Asymmetric { row: 1, col: 2 });
        assert_eq!(e.line, Some(3));
        let e = parse_scheme("scheme v=2 d=1\n1 1\n1 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonzeroDiagonal { row: 0 });
        let e = parse_scheme("scheme v=2 d=1\n0 3\n3 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::OutOfRange { value: 3, d: 1 });
        assert_eq!((e.line, e.column), (Some(2), Some(1)));
        let e = parse_scheme("scheme v=2\n0 1\n1 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MalformedHeader);
        let e = parse_scheme("scheme v=2 d=1\n0 1 1\n1 0\n").unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::RowLength {
                expected: 2,
                found: 3
            }
        );
        let e = parse_scheme("scheme v=2 d=1\n0 1\n").unwrap_err();
        assert_eq!(
            e.kind,
            ParseErrorKind::RowCount {
                expected: 2,
                found: 1
            }
        );
        let e = parse_scheme("scheme v=2 d=2\n0 1\n1 0\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingClass(2));
    }

    #[test]
    fn complete_graph_tensor() {
        let p = verify_scheme(&complete(4)).unwrap();
        assert_eq!(p.p(1, 1, 1), 2);
        assert_eq!(p.valencies(), vec![1, 3]);
        p.check_invariants().unwrap();
    }

    #[test]
    fn pentagon_tensor() {
        let p = verify_scheme(&cycle(5)).unwrap();
        assert_eq!((p.p(1, 1, 1), p.p(1, 1, 2), p.p(2, 1, 1)), (0, 1, 1));
    }

    #[test]
    fn path_is_not_a_scheme() {
        let t = RelationTable::from_fn(3, |x, y| {
            if x == y {
                0
            } else if x.abs_diff(y) == 1 {
                1
            } else {
                2
            }
        })
        .unwrap();
        let w = verify_scheme(&t).unwrap_err();
        assert_ne!(w.count, w.other);
        assert_eq!(t.cell(w.first.0, w.first.1), t.cell(w.second.0, w.second.1));
    }

    #[test]
    fn restriction_relabels() {
        let t = cycle(6);
        let r = restrict(&t, &[0, 2, 4]).unwrap();
        assert_eq!(r.labels, vec![0, 2]);
        assert_eq!(r.table.d(), 1);
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(restrict(&t, &all).unwrap().table, t);
        assert_eq!(restrict(&t, &[]).unwrap_err(), SchemeError::EmptySubset);
    }

    #[test]
    fn closure_of_cycle_is_distance_scheme() {
        let n = 8;
        let t = coherent_closure(n, |x, y| {
            u32::from((x + n - y) % n == 1 || (y + n - x) % n == 1)
        })
        .unwrap();
        assert_eq!(t.d(), 4);
        verify_scheme(&t).unwrap();
    }

    #[test]
    fn closure_rejects_inhomogeneous() {
        // A path on three vertices: the ends differ from the middle.
        let e = coherent_closure(3, |x, y| u32::from(x.abs_diff(y) == 1)).unwrap_err();
        assert!(matches!(e, SchemeError::NotHomogeneous(_)));
    }
}
