use std::sync::OnceLock;

use scheme_forge::constructions::*;
use scheme_forge::exactnum::{rat, Scalar};
use scheme_forge::imprimitivity::find_imprimitivity_systems;
use scheme_forge::qantipodal::*;
use scheme_forge::schemes::{verify_scheme, RelationTable};
use scheme_forge::spectral::{
    cometric_orderings, eigendata, krein_array, krein_tensor, Eigendata, KreinArray, KreinTensor,
};

fn classify(t: &RelationTable) -> Vec<Classification> {
    let p = verify_scheme(t).unwrap();
    let e = eigendata(&p).unwrap();
    let k = krein_tensor(&e).unwrap();
    let arrays = cometric_orderings(&k, &p).unwrap().arrays;
    let systems = find_imprimitivity_systems(t, &p, &e, &k).unwrap();
    classify_cometric_imprimitive(t, &p, &e, &arrays, &systems).unwrap()
}

struct HoSi {
    table: RelationTable,
    k: KreinTensor,
    array: KreinArray,
}

fn linked_hosi() -> &'static HoSi {
    static F: OnceLock<HoSi> = OnceLock::new();
    F.get_or_init(|| {
        let table = linked_hosi_scheme().unwrap().table;
        let p = verify_scheme(&table).unwrap();
        let k = krein_tensor(&eigendata(&p).unwrap()).unwrap();
        let array = cometric_orderings(&k, &p).unwrap().arrays.remove(0);
        HoSi { table, k, array }
    })
}

fn krein_arrays_of(t: &RelationTable) -> Vec<KreinArray> {
    let p = verify_scheme(t).unwrap();
    let k = krein_tensor(&eigendata(&p).unwrap()).unwrap();
    cometric_orderings(&k, &p).unwrap().arrays
}

#[test]
fn linked_hosi_is_q_antipodal_only() {
    let c = classify(&linked_hosi().table);
    assert_eq!(c.len(), 1);
    assert!(c[0].q_antipodal && !c[0].q_bipartite && !c[0].rectangular_exception);
    // relation 1 is the edge class, so the natural ordering starts 0, 1
    assert_eq!(&c[0].natural_ordering[..2], &[0, 1]);
}

#[test]
fn array_determines_the_krein_tensor() {
    let h = linked_hosi();
    let from_array = krein_tensor_from_array(&h.array);
    assert_eq!(from_array, h.k.permuted(&h.array.ordering));
    let m: Vec<Scalar> = multiplicities_from_array(&h.array);
    assert_eq!(m, [1, 21, 84, 42, 2].map(Scalar::int));
}

#[test]
fn linked_hosi_profile() {
    let h = linked_hosi();
    let prof = profile(&h.array, 3).unwrap();
    assert_eq!((prof.d, prof.w, prof.ell), (4, 3, 2));
    assert_eq!(prof.subscheme.to_string(), "{21, 16; 1, 12}");
    assert_eq!(prof.sub_multiplicities, [1, 21, 28].map(Scalar::int));
    assert_eq!(prof.dismantled.len(), 1);
    assert_eq!(prof.dismantled[0].0, 2);
    assert_eq!(
        prof.dismantled[0].1.to_string(),
        "{21, 16, 6, 1; 1, 6, 16, 21}"
    );
    // the complement of Hoffman-Singleton has the subscheme's Krein array
    let brute = krein_arrays_of(&hoffman_singleton().complement().to_table().unwrap());
    assert!(
        brute.iter().any(|a| a.same_parameters(&prof.subscheme)),
        "{brute:?}"
    );
    // and dismantling to two fibres gives the Higman-Sims scheme's array
    assert!(profile(&prof.dismantled[0].1, 2).is_ok());
}

#[test]
fn dismantling_edge_cases() {
    let a = &linked_hosi().array;
    assert_eq!(dismantled_krein_array(a, 3, 3).unwrap(), *a);
    assert!(matches!(
        dismantled_krein_array(a, 3, 1),
        Err(QAntipodalError::Domain(_))
    ));
    assert!(matches!(
        dismantled_krein_array(a, 3, 4),
        Err(QAntipodalError::Domain(_))
    ));
    let srg = krein_arrays_of(&cycle(5));
    assert!(matches!(
        subscheme_krein_array(&srg[0], 2),
        Err(QAntipodalError::Domain(_))
    ));
    assert!(matches!(
        profile(&srg[0], 2),
        Err(QAntipodalError::Domain(_))
    ));
}

#[test]
fn hamming_cube_is_both() {
    let c = classify(&hamming(4, 2).unwrap());
    assert_eq!(c.len(), 2);
    for x in &c {
        assert!(x.q_antipodal && x.q_bipartite);
        let prof = profile(&x.array, 2).unwrap();
        assert!(prof.dismantled.is_empty());
    }
}

#[test]
fn rectangular_three_by_two_is_flagged() {
    let c = classify(&rectangular(3, 2));
    assert!(!c.is_empty());
    assert!(c.iter().any(|x| x.rectangular_exception));
    // the cube and the hexagon are R(4,2) and R(3,2) in disguise
    assert!(classify(&hamming(3, 2).unwrap())
        .iter()
        .any(|x| x.rectangular_exception));
    assert!(classify(&cycle(6)).iter().any(|x| x.rectangular_exception));
    assert!(classify(&rectangular(2, 3))
        .iter()
        .any(|x| x.rectangular_exception));
    for t in [
        hamming(4, 2).unwrap(),
        cycle(8),
        folded_cube(7),
        linked_hosi().table.clone(),
    ] {
        assert!(classify(&t).iter().all(|x| !x.rectangular_exception));
    }
}

#[test]
fn uniform_iff_q_antipodal_on_cometric_fixtures() {
    // classify errors out if a uniform system and J = {0, last} disagree
    for t in [
        cycle(6),
        cycle(8),
        hamming(3, 2).unwrap(),
        folded_cube(7),
        bipartite_double(&cycle(5)),
        rectangular(2, 4),
    ] {
        let c = classify(&t);
        assert!(!c.is_empty(), "{} vertices", t.v());
    }
}

#[test]
fn hemisystem_arrays_satisfy_the_invariants() {
    for t in [3, 5, 7, 9] {
        let h = hemisystem_krein_array(t).unwrap();
        let prof = profile(&h.array, 2).unwrap();
        assert!(prof.dismantled.is_empty());
        if t == 3 {
            assert_eq!(prof.subscheme.exact_string(), "{20, 49/3; 1, 28/3}");
        }
    }
}

/// Linked system of w copies of the (16,6,2) biplane, from the uniform
/// three-class eigenmatrix.
fn linked_biplanes(w: i64) -> (Eigendata, KreinArray) {
    let (n, k1) = (16i64, 6i64);
    // sqrt(k1 (n - k1) / (n - 1)) (w - 1)
    let p11 = Scalar::int(2 * (w - 1));
    let rows = vec![
        vec![
            Scalar::one(),
            Scalar::int((w - 1) * k1),
            Scalar::int(n - 1),
            Scalar::int((w - 1) * (n - k1)),
        ],
        vec![Scalar::one(), p11.clone(), Scalar::int(-1), -&p11],
        vec![
            Scalar::one(),
            p11.scale(&rat(-1, w - 1)),
            Scalar::int(-1),
            p11.scale(&rat(1, w - 1)),
        ],
        vec![
            Scalar::one(),
            Scalar::int(-k1),
            Scalar::int(n - 1),
            Scalar::int(k1 - n),
        ],
    ];
    let vals = vec![
        1,
        ((w - 1) * k1) as u64,
        (n - 1) as u64,
        ((w - 1) * (n - k1)) as u64,
    ];
    let m = vec![
        1,
        (n - 1) as u64,
        ((w - 1) * (n - 1)) as u64,
        (w - 1) as u64,
    ];
    let e = Eigendata::from_p(vals, m, rows);
    e.check().unwrap();
    let k = krein_tensor(&e).unwrap();
    let a = krein_array(&k, &[0, 1, 2, 3]);
    assert_eq!(krein_tensor_from_array(&a), k);
    (e, a)
}

#[test]
fn odd_diameter_corollary() {
    let (_, a) = linked_biplanes(3);
    let prof = profile(&a, 3).unwrap();
    assert_eq!(prof.subscheme.to_string(), "{15; 1}");
    assert!(!a.a[2].is_zero());
    let (_, bar) = &prof.dismantled[0];
    assert!(!bar.a[1].is_zero());
    assert_eq!(bar, &linked_biplanes(2).1);
    odd_d_corollary(&a, 3).unwrap();
    assert!(matches!(
        odd_d_corollary(&a, 2),
        Err(QAntipodalError::Domain(_))
    ));
}

#[test]
fn broken_arrays_are_infeasible() {
    let a = &linked_hosi().array;
    let mut bad = a.clone();
    bad.b[1] = Scalar::int(15);
    bad.a[1] = &bad.b[0] - &bad.b[1] - &bad.c[0];
    assert!(matches!(
        profile(&bad, 3),
        Err(QAntipodalError::Infeasible(_))
    ));
    // right array, wrong w
    assert!(matches!(profile(a, 2), Err(QAntipodalError::Infeasible(_))));
    assert!(matches!(profile(a, 4), Err(QAntipodalError::Infeasible(_))));
}
