#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use scheme_forge::constructions::*;
use scheme_forge::imprimitivity::{
    find_imprimitivity_systems, lemma_tensor_in_subscheme_order, subscheme,
    subscheme_krein_via_lemma, ImprimitivitySystem,
};
use scheme_forge::schemes::{restrict, verify_scheme, IntersectionTensor, RelationTable};
use scheme_forge::spectral::{eigendata, krein_tensor, Eigendata, KreinTensor};

pub struct Fixture {
    pub name: String,
    pub t: RelationTable,
    pub p: IntersectionTensor,
    pub e: Eigendata,
    pub k: KreinTensor,
    pub systems: Vec<ImprimitivitySystem>,
}

pub fn fixture(name: &str, t: RelationTable) -> Fixture {
    let p = verify_scheme(&t).unwrap_or_else(|e| panic!("{name}: {e}"));
    let e = eigendata(&p).unwrap_or_else(|e| panic!("{name}: {e}"));
    let k = krein_tensor(&e).unwrap_or_else(|e| panic!("{name}: {e}"));
    let systems =
        find_imprimitivity_systems(&t, &p, &e, &k).unwrap_or_else(|e| panic!("{name}: {e}"));
    Fixture {
        name: name.to_string(),
        t,
        p,
        e,
        k,
        systems,
    }
}

fn single_link(c: Vec<Vec<bool>>) -> BTreeMap<(usize, usize), Vec<Vec<bool>>> {
    BTreeMap::from([((0, 1), c)])
}

pub fn linked_hosi() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture("linked-hosi", linked_hosi_scheme().unwrap().table))
}

/// The imprimitive fixtures of the equivalence suite, without linked-hosi.
pub fn imprimitive() -> Vec<Fixture> {
    vec![
        fixture("K2 wr K3", wreath(&complete(2), &complete(3))),
        fixture("K2 wr C5", wreath(&complete(2), &cycle(5))),
        fixture("K3 wr C5", wreath(&complete(3), &cycle(5))),
        fixture("R(3,2)", rectangular(3, 2)),
        fixture("R(3,3)", rectangular(3, 3)),
        fixture("H(4,2)", hamming(4, 2).unwrap()),
        fixture("C8", cycle(8)),
        fixture(
            "(16,6,2) w=2",
            three_class_linked_designs(&single_link(biplane16()), 2, 16, 6)
                .unwrap()
                .table,
        ),
        fixture(
            "Fano w=2",
            three_class_linked_designs(&single_link(fano()), 2, 7, 3)
                .unwrap()
                .table,
        ),
        fixture("C12", cycle(12)),
        fixture("K3 x C5", tensor(&complete(3), &cycle(5))),
        fixture(
            "double Clebsch",
            bipartite_double(&clebsch().to_table().unwrap()),
        ),
    ]
}

pub fn primitive() -> Vec<Fixture> {
    vec![
        fixture("K5", complete(5)),
        fixture("C5", cycle(5)),
        fixture("Petersen", petersen().0.to_table().unwrap()),
        fixture("Clebsch", clebsch().to_table().unwrap()),
        fixture("Hoffman-Singleton", hoffman_singleton().to_table().unwrap()),
        fixture("folded 7-cube", folded_cube(7)),
    ]
}

/// Floating idempotents E_j = (1/v) sum_i Q_ij A_i.
pub fn float_idempotents(f: &Fixture) -> Vec<DMatrix<f64>> {
    let v = f.t.v();
    let d = f.t.d();
    (0..=d)
        .map(|j| {
            let col: Vec<f64> = (0..=d).map(|i| f.e.q(i, j).to_f64() / v as f64).collect();
            DMatrix::from_fn(v, v, |x, y| col[f.t.cell(x, y)])
        })
        .collect()
}

/// q^h_ij = v <E_i o E_j, E_h> / m_h from the floating idempotents.
pub fn float_krein(f: &Fixture, es: &[DMatrix<f64>]) -> Vec<f64> {
    let v = f.t.v() as f64;
    let r = es.len();
    let mut out = Vec::with_capacity(r * r * r);
    for h in 0..r {
        let mh = es[h].trace();
        for i in 0..r {
            for j in 0..r {
                let s: f64 = es[i]
                    .iter()
                    .zip(es[j].iter())
                    .zip(es[h].iter())
                    .map(|((a, b), c)| a * b * c)
                    .sum();
                out.push(v * s / mh);
            }
        }
    }
    out
}

const TOL: f64 = 1e-8;

pub fn check_float(f: &Fixture) {
    let es = float_idempotents(f);
    let v = f.t.v();
    for (j, ej) in es.iter().enumerate() {
        let sq = ej * ej;
        assert!(
            (sq - ej).abs().max() < TOL,
            "{}: E_{j} is not idempotent",
            f.name
        );
        assert!(
            (ej.trace() - f.e.m(j) as f64).abs() < TOL,
            "{}: trace E_{j}",
            f.name
        );
        // A_1 E_j = P_j1 E_j
        let a1 =
            nalgebra::DMatrix::from_fn(v, v, |x, y| if f.t.cell(x, y) == 1 { 1.0 } else { 0.0 });
        let lhs = &a1 * ej;
        let rhs = ej * f.e.p(j, 1).to_f64();
        assert!((lhs - rhs).abs().max() < 1e-6, "{}: A_1 E_{j}", f.name);
    }
    let fk = float_krein(f, &es);
    let r = f.t.d() + 1;
    for h in 0..r {
        for i in 0..r {
            for j in 0..r {
                let exact = f.k.q(h, i, j).to_f64();
                let got = fk[(h * r + i) * r + j];
                assert!(
                    (exact - got).abs() < TOL,
                    "{}: q^{h}_{i}{j} exact {exact} float {got}",
                    f.name
                );
            }
        }
    }
}

pub fn check_subscheme_lemma(f: &Fixture) {
    for sys in &f.systems {
        let sub = subscheme(&f.t, &f.p, &f.e, sys).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        let direct = krein_tensor(&sub.eigen).unwrap();
        let lemma = subscheme_krein_via_lemma(&f.k, sys).unwrap();
        assert_eq!(
            lemma_tensor_in_subscheme_order(&lemma, &sub),
            direct,
            "{} I={:?}",
            f.name,
            sys.i_set()
        );
        // the fibre restriction verified from scratch agrees too
        let r = restrict(&f.t, &sys.fibres()[0]).unwrap();
        assert_eq!(verify_scheme(&r.table).unwrap(), sub.tensor);
    }
}
