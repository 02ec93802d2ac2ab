//! Scheme inputs: files or built-in names.

use std::collections::BTreeMap;
use std::path::Path;

use scheme_forge::constructions::*;
use scheme_forge::schemes::{parse_scheme, RelationTable};

use crate::Exit;

pub const NAMES: &str =
    "linked-hosi, hoffman-singleton, higman-sims, clebsch, petersen, pentagon, \
linked-biplanes, linked-fano, hamming-D-Q, rectangular-W-N, cycle-N, complete-N, folded-cube-M";

fn nums(rest: &str) -> Option<Vec<usize>> {
    rest.split('-').map(|x| x.parse().ok()).collect()
}

fn graph_table(g: &Graph) -> Result<RelationTable, Exit> {
    g.to_table().map_err(|e| Exit::negative(e.to_string()))
}

fn single_link(c: Vec<Vec<bool>>) -> BTreeMap<(usize, usize), Vec<Vec<bool>>> {
    BTreeMap::from([((0, 1), c)])
}

/// A built-in scheme by name, or None if the name is unknown.
pub fn named(name: &str) -> Option<Result<RelationTable, Exit>> {
    let neg = |e: ConstructionError| Exit::negative(e.to_string());
    let t = match name {
        "linked-hosi" => linked_hosi_scheme().map(|l| l.table).map_err(neg),
        "hoffman-singleton" | "hosi" => graph_table(&hoffman_singleton()),
        "higman-sims" => linked_hosi_scheme()
            .and_then(|l| higman_sims(&l))
            .map_err(neg)
            .and_then(|(g, _)| graph_table(&g)),
        "clebsch" => graph_table(&clebsch()),
        "petersen" => graph_table(&petersen().0),
        "pentagon" => Ok(cycle(5)),
        "linked-biplanes" => three_class_linked_designs(&single_link(biplane16()), 2, 16, 6)
            .map(|s| s.table)
            .map_err(neg),
        "linked-fano" => three_class_linked_designs(&single_link(fano()), 2, 7, 3)
            .map(|s| s.table)
            .map_err(neg),
        _ => {
            let (head, rest) = name.split_once('-')?;
            let (head, rest) = if head == "folded" {
                ("folded-cube", rest.strip_prefix("cube-")?)
            } else {
                (head, rest)
            };
            let a = nums(rest)?;
            match (head, a.as_slice()) {
                ("hamming", &[d, q]) => hamming(d, q).map_err(neg),
                ("rectangular", &[w, n]) if w >= 2 && n >= 2 => Ok(rectangular(w, n)),
                ("cycle", &[n]) if n >= 3 => Ok(cycle(n)),
                ("complete", &[n]) if n >= 2 => Ok(complete(n)),
                ("folded-cube", &[m]) if m >= 2 => Ok(folded_cube(m)),
                _ => return None,
            }
        }
    };
    Some(t)
}

pub fn read_file(path: &str) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| Exit::io(format!("{path}: {e}")))
}

/// An existing file is parsed; otherwise the argument is a built-in name.
pub fn load(src: &str) -> Result<RelationTable, Exit> {
    if Path::new(src).exists() {
        let text = read_file(src)?;
        return parse_scheme(&text).map_err(|e| Exit::negative(format!("{src}: {e}")));
    }
    match named(src) {
        Some(t) => t,
        None => Err(Exit::io(format!(
            "{src}: no such file and not a built-in scheme ({NAMES})"
        ))),
    }
}

/// A graph with a vertex split: the class-1 graph of a two-class scheme file
/// and a `#fibre` line listing the first part, or a built-in name.
pub fn decomposition_input(src: &str) -> Result<DecompositionInput, Exit> {
    match src {
        "petersen-pentagons" => return Ok(petersen_pentagons()),
        "clebsch-matchings" => return Ok(clebsch_matchings()),
        "clebsch-halves" => return Ok(clebsch_complement_halves()),
        _ => {}
    }
    if !Path::new(src).exists() {
        return Err(Exit::io(format!(
            "{src}: no such file and not one of petersen-pentagons, clebsch-matchings, clebsch-halves"
        )));
    }
    let text = read_file(src)?;
    let t = parse_scheme(&text).map_err(|e| Exit::negative(format!("{src}: {e}")))?;
    let fibre_line = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("#fibre"))
        .ok_or_else(|| Exit::negative(format!("{src}: missing `#fibre` line")))?;
    let u1: Vec<usize> = fibre_line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Exit::negative(format!("{src}: bad vertex `{s}` in #fibre")))
        })
        .collect::<Result<_, _>>()?;
    let u2: Vec<usize> = (0..t.v()).filter(|x| !u1.contains(x)).collect();
    let ambient = Graph::from_fn(t.v(), |x, y| t.cell(x, y) == 1);
    Ok(DecompositionInput { ambient, u1, u2 })
}
