//! Exact results against independent computations.

mod common;

use common::*;

#[test]
fn krein_tensor_matches_float_idempotents() {
    for f in primitive().iter().chain(imprimitive().iter()) {
        check_float(f);
    }
    check_float(linked_hosi());
}

#[test]
fn intersection_numbers_match_path_counts() {
    // p^h_ij counted from a pair in relation h, for every h
    for f in primitive().iter().chain(imprimitive().iter()) {
        let v = f.t.v();
        let r = f.t.d() + 1;
        for h in 0..r {
            let (x, y) = (0..v)
                .flat_map(|x| (0..v).map(move |y| (x, y)))
                .find(|&(x, y)| f.t.cell(x, y) == h)
                .unwrap();
            for i in 0..r {
                for j in 0..r {
                    let n = (0..v)
                        .filter(|&z| f.t.cell(x, z) == i && f.t.cell(z, y) == j)
                        .count() as u64;
                    assert_eq!(n, f.p.p(h, i, j), "{}", f.name);
                }
            }
        }
    }
}

#[test]
fn subscheme_krein_lemma_matches_direct_computation() {
    for f in imprimitive() {
        check_subscheme_lemma(&f);
    }
    check_subscheme_lemma(linked_hosi());
}
