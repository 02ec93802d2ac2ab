use std::collections::BTreeMap;

use scheme_forge::constructions::*;
use scheme_forge::exactnum::Scalar;
use scheme_forge::imprimitivity::find_imprimitivity_systems;
use scheme_forge::schemes::verify_scheme;
use scheme_forge::spectral::{cometric_orderings, eigendata, krein_tensor};

fn analyse(t: &scheme_forge::schemes::RelationTable) -> Vec<String> {
    let p = verify_scheme(t).expect("scheme");
    let e = eigendata(&p).expect("eigendata");
    let k = krein_tensor(&e).unwrap();
    cometric_orderings(&k, &p)
        .unwrap()
        .arrays
        .iter()
        .map(|a| a.to_string())
        .collect()
}

#[test]
fn hoffman_singleton_is_moore() {
    let g = hoffman_singleton();
    assert_eq!(g.srg_parameters(), Some((50, 7, 0, 1)));
    assert_eq!(g.triangles(), 0);
    let p = SrgParams::new(50, 7, 0, 1).unwrap();
    assert_eq!(
        (p.r.clone(), p.s.clone(), p.f, p.g),
        (Scalar::int(2), Scalar::int(-3), 28, 21)
    );
}

#[test]
fn linked_hosi_and_higman_sims() {
    let l = linked_hosi_scheme().unwrap();
    assert_eq!(l.cocliques.len(), 100);
    assert!(l.cocliques.iter().all(|c| c.len() == 15));
    assert_eq!(l.table.valencies(), vec![1, 30, 42, 70, 7]);
    assert_eq!(
        analyse(&l.table),
        vec!["{21, 16, 8, 1; 1, 4, 16, 21}".to_string()]
    );
    let p = verify_scheme(&l.table).unwrap();
    let e = eigendata(&p).unwrap();
    let k = krein_tensor(&e).unwrap();
    let sys = find_imprimitivity_systems(&l.table, &p, &e, &k).unwrap();
    let s = sys
        .iter()
        .find(|s| s.i_set() == [0, 2, 4])
        .expect("three fibres");
    assert_eq!((s.w(), s.n()), (3, 50));
    assert_eq!(s.j_set, vec![0, 4]);
    assert!(is_cometric_q_antipodal(&l.table, &p).unwrap());

    let (hs, ys) = higman_sims(&l).unwrap();
    assert_eq!(hs.srg_parameters(), Some((100, 22, 0, 6)));
    // HS into two Hoffman-Singleton graphs, split along the coclique fibres
    let fibre_a: Vec<usize> = (0..100)
        .filter(|&a| matches!(l.table.cell(ys[0], ys[a]), 0 | 2 | 4))
        .collect();
    let fibre_b: Vec<usize> = (0..100).filter(|a| !fibre_a.contains(a)).collect();
    assert_eq!(fibre_a.len(), 50);
    let inp = DecompositionInput {
        ambient: hs.clone(),
        u1: fibre_a,
        u2: fibre_b,
    };
    match from_srg_decomposition(&inp).unwrap() {
        Decomposition::Scheme { table, fibre, .. } => {
            assert_eq!(fibre.tuple(), (50, 7, 0, 1));
            assert_eq!(
                analyse(&table),
                vec!["{21, 16, 6, 1; 1, 6, 16, 21}".to_string()]
            );
        }
        other => panic!("unexpected {other:?}"),
    }
    let inp = DecompositionInput {
        ambient: hs.complement(),
        ..inp
    };
    assert!(matches!(
        from_srg_decomposition(&inp).unwrap(),
        Decomposition::Scheme { .. }
    ));
}

#[test]
fn petersen_pentagons_are_exceptional() {
    let d = from_srg_decomposition(&petersen_pentagons()).unwrap();
    assert!(matches!(d, Decomposition::Exceptional { .. }));
}

#[test]
fn clebsch_decompositions_have_hamming_parameters() {
    let h = verify_scheme(&hamming(4, 2).unwrap()).unwrap();
    let mut hv = h.valencies();
    hv.sort();
    for inp in [clebsch_matchings(), clebsch_complement_halves()] {
        match from_srg_decomposition(&inp).unwrap() {
            Decomposition::Scheme { tensor, .. } => {
                let mut v = tensor.valencies();
                v.sort();
                assert_eq!(v, hv);
                // some relabelling of the relations gives the H(4,2) intersection numbers
                let found = permutations(5)
                    .into_iter()
                    .any(|perm| tensor.permuted(&perm) == h);
                assert!(found);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn go(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            if cur[0] == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            go(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    go(0, &mut cur, &mut out);
    out
}

#[test]
fn decomposition_rejects_bad_partitions() {
    let mut inp = clebsch_matchings();
    inp.u2.pop();
    assert!(matches!(
        from_srg_decomposition(&inp),
        Err(ConstructionError::Decomposition(_))
    ));
    let mut inp = clebsch_matchings();
    inp.u1.swap(0, 0);
    inp.u2[0] = inp.u1[0];
    assert!(matches!(
        from_srg_decomposition(&inp),
        Err(ConstructionError::Decomposition(_))
    ));
}

fn single_link(c: Vec<Vec<bool>>) -> BTreeMap<(usize, usize), Vec<Vec<bool>>> {
    BTreeMap::from([((0, 1), c)])
}

#[test]
fn biplane_linked_scheme() {
    let s = three_class_linked_designs(&single_link(biplane16()), 2, 16, 6).unwrap();
    assert!(s.uniform && !s.decomposable);
    assert_eq!(s.p11, Scalar::int(2));
    let e = &s.eigen;
    let j = (0..4).find(|&j| *e.p(j, 1) == Scalar::int(2)).unwrap();
    assert_eq!(*e.q(1, j), Scalar::int(5));
    // w = 2 with m1 = m2: both E1 and E2 generate
    assert_eq!(analyse(&s.table).len(), 2);
}

#[test]
fn fano_linked_scheme_lives_over_sqrt2() {
    let s = three_class_linked_designs(&single_link(fano()), 2, 7, 3).unwrap();
    assert_eq!(s.p11, Scalar::sqrt_of(2));
    assert_eq!(s.eigen.field(), 2);
}

#[test]
fn permutation_links_give_rectangular_schemes() {
    for (w, n) in [(2usize, 3usize), (3, 2), (3, 3)] {
        let mut links = BTreeMap::new();
        for u in 0..w {
            for v in u + 1..w {
                links.insert(
                    (u, v),
                    (0..n).map(|a| (0..n).map(|b| a == b).collect()).collect(),
                );
            }
        }
        let s = three_class_linked_designs(&links, w, n, 1).unwrap();
        assert!(s.decomposable);
        let mut a = verify_scheme(&s.table).unwrap().valencies();
        let mut b = verify_scheme(&rectangular(w, n)).unwrap().valencies();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(!analyse(&s.table).is_empty(), (w == 2) != (n == 2));
    }
}

#[test]
fn linked_design_errors() {
    let mut c = biplane16();
    c[0][0] = !c[0][0];
    assert!(matches!(
        three_class_linked_designs(&single_link(c), 2, 16, 6),
        Err(ConstructionError::Design(_))
    ));
    assert!(three_class_linked_designs(&BTreeMap::new(), 2, 16, 6).is_err());
}

#[test]
fn class_i_eigenmatrices_match_table_rows() {
    let srg = SrgParams::new(50, 42, 35, 36).unwrap();
    let e = class_i_eigenmatrices(&srg, 2, 15, 21).unwrap();
    let row0: Vec<Scalar> = [1, 15, 42, 35, 7].iter().map(|&x| Scalar::int(x)).collect();
    assert_eq!(e.p_matrix()[0], row0);
    let col: Vec<Scalar> = (0..5).map(|j| e.p(j, 1).clone()).collect();
    assert_eq!(col, [15, 5, 0, -5, -15].map(Scalar::int));
    // m1 = m3 splits P11 symmetrically
    assert_eq!(*e.p(3, 1), -e.p(1, 1));

    let e = class_i_eigenmatrices(&srg, 3, 15, 21).unwrap();
    let col: Vec<Scalar> = (0..5).map(|j| e.p(j, 1).clone()).collect();
    assert_eq!(col, [30, 10, 0, -5, -15].map(Scalar::int));
    assert!(matches!(
        class_i_eigenmatrices(&srg, 1, 15, 21),
        Err(ConstructionError::Domain(_))
    ));
    assert!(matches!(
        class_i_eigenmatrices(&srg, 2, 15, 42),
        Err(ConstructionError::Domain(_))
    ));
}

#[test]
fn hemisystem_parameters() {
    let h = hemisystem_krein_array(3).unwrap();
    assert_eq!(
        h.array.exact_string(),
        "{20, 49/3, 14/3, 1; 1, 14/3, 49/3, 20}"
    );
    assert_eq!(h.fibre.tuple(), (56, 10, 0, 2));
    assert_eq!(h.table_srg.tuple(), (56, 45, 36, 36));
    let h = hemisystem_krein_array(5).unwrap();
    assert_eq!(
        h.array.to_string(),
        "{104, 88.2, 16.8, 1; 1, 16.8, 88.2, 104}"
    );
    assert_eq!(h.table_srg.tuple(), (378, 325, 280, 275));
    let h = hemisystem_krein_array(7).unwrap();
    assert_eq!(h.array.b[1], Scalar::frac(1849, 7));
    assert_eq!(h.array.b[1].render3(), "264.143");
    assert!(hemisystem_krein_array(4).is_err());
    assert!(hemisystem_krein_array(1).is_err());
}

#[test]
fn bipartite_doubles() {
    // K2 doubles to K2 x K2, whose distance fusion is the 4-cycle
    let d = bipartite_double(&complete(2));
    assert_eq!(d.d(), 3);
    assert!(analyse(&d).is_empty());
    let c4 = d.fuse(&[0, 1, 1, 2]).unwrap();
    assert_eq!(
        verify_scheme(&c4).unwrap(),
        verify_scheme(&cycle(4)).unwrap()
    );

    for t in [
        cycle(5),
        clebsch().to_table().unwrap(),
        complete(5),
        hamming(3, 2).unwrap(),
    ] {
        let p = verify_scheme(&t).unwrap();
        let e = eigendata(&p).unwrap();
        let k = krein_tensor(&e).unwrap();
        let orders = cometric_orderings(&k, &p).unwrap();
        let criterion = double_criterion(&orders.arrays);
        let doubled = bipartite_double(&t);
        assert_eq!(
            !analyse(&doubled).is_empty(),
            criterion,
            "{} vertices",
            t.v()
        );
    }
    let clebsch_double = bipartite_double(&clebsch().to_table().unwrap());
    assert_eq!(clebsch_double.d(), 5);
    assert!(!analyse(&clebsch_double).is_empty());
}

#[test]
fn products() {
    let w = wreath(&complete(2), &complete(3));
    assert_eq!(w.v(), 6);
    assert_eq!(w.d(), 2);
    let wp = wreath(&complete(2), &cycle(5));
    assert_eq!((wp.v(), wp.d()), (10, 3));
    verify_scheme(&wp).unwrap();
    let r = tensor(&complete(2), &complete(3));
    assert_eq!((r.v(), r.d()), (6, 3));
    assert_eq!(r, rectangular(2, 3));
    for (w, n) in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 3)] {
        assert_eq!(
            !analyse(&rectangular(w, n)).is_empty(),
            (w == 2) != (n == 2),
            "R({w},{n})"
        );
    }
    let h = hamming(4, 2).unwrap();
    assert_eq!(h.valencies(), vec![1, 4, 6, 4, 1]);
    // the 4-cube is isomorphic to its distance-3 graph, so two orderings
    assert_eq!(analyse(&h).len(), 2);
    let f = folded_cube(8);
    assert_eq!(f.valencies(), vec![1, 8, 28, 56, 35]);
}
