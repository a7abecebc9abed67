use rtlab::cohomology::torsion_functoriality_check;
use rtlab::instances;

#[test]
fn exact_sequence_on_torsion_sample() {
    for (label, w) in instances::torsion_sample(11, 40) {
        for n in 1..=2 {
            let r = torsion_functoriality_check(&w, n, &[]).unwrap();
            assert!(r.exact && r.image_in_kernel, "{label} n={n}");
            if r.h0_w_log == 0 {
                assert!(r.iso_onto_torsion, "{label} n={n}");
                assert_eq!(r.h1_wn_log, r.torsion_log);
            }
        }
    }
}

/// `|H^1(W_n)| = |H^0(W)/p^n| * |H^1(W)[p^n]|` whenever `H^0(W) != 0`.
/// This is false in general: the first term of the exact sequence is
/// `H^0(p^n W)/p^n H^0(W)`, not `H^0(W)/p^n H^0(W)`.
#[test]
#[ignore = "the product formula with H^0(W)/p^n fails; see the exact sequence test"]
fn product_formula_with_invariants() {
    for (label, w) in instances::torsion_sample(11, 40) {
        for n in 1..=2 {
            let r = torsion_functoriality_check(&w, n, &[]).unwrap();
            if r.h0_w_log != 0 {
                assert!(r.product_formula_holds, "{label} n={n}: {r:?}");
            }
        }
    }
}
