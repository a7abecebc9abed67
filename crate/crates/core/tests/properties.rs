use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rtlab::catalog;
use rtlab::cohomology::{scalar_module, GModule};
use rtlab::criterion::{self, Outcome};
use rtlab::group_rep::GroupRep;
use rtlab::instances;
use rtlab::linalg::{self, Row, Span};
use rtlab::pseudochar::{self, Pseudocharacter};
use rtlab::ring_core::{all_ideals, AlgebraHom, Ideal, LocalAlgebra};
use rtlab::BaseRing;

fn small_base() -> impl Strategy<Value = BaseRing> {
    prop_oneof![
        Just((3u64, 1u32)),
        Just((3, 2)),
        Just((3, 3)),
        Just((5, 1)),
        Just((5, 2)),
        Just((7, 1))
    ]
    .prop_map(|(p, e)| BaseRing::new(p, e).unwrap())
}

fn small_algebra(k: usize) -> LocalAlgebra {
    let b = |p, e| BaseRing::new(p, e).unwrap();
    match k % 8 {
        0 => catalog::base_ring_algebra(b(3, 3)),
        1 => catalog::dual_numbers(b(3, 1)),
        2 => catalog::dual_numbers(b(3, 2)),
        3 => catalog::delta_algebra(b(3, 2)),
        4 => catalog::truncated_polynomial(b(3, 1), 3),
        5 => catalog::monogenic(b(3, 2), &[-3, 0]),
        6 => catalog::square_zero(b(3, 1), 2),
        _ => catalog::monogenic(b(5, 2), &[0, -5]),
    }
}

fn rows(b: &BaseRing, raw: &[Vec<u64>]) -> Vec<Row> {
    raw.iter()
        .map(|r| r.iter().map(|x| b.reduce(*x)).collect())
        .collect()
}

fn element(alg: &LocalAlgebra, raw: &[u64]) -> Row {
    alg.reduce(
        &raw.iter()
            .take(alg.rank())
            .copied()
            .chain(std::iter::repeat(0))
            .take(alg.rank())
            .collect::<Vec<_>>(),
    )
}

fn brute_span(b: &BaseRing, gens: &[Row], ncols: usize) -> std::collections::HashSet<Row> {
    let mut seen = std::collections::HashSet::new();
    seen.insert(vec![0; ncols]);
    let mut frontier: Vec<Row> = vec![vec![0; ncols]];
    while let Some(v) = frontier.pop() {
        for g in gens {
            let w = linalg::add(b, &v, g);
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn span_order_matches_enumeration(b in small_base(), raw in prop::collection::vec(prop::collection::vec(0u64..1000, 3), 0..4)) {
        let gens = rows(&b, &raw);
        let span = Span::new(&b, 3, gens.clone());
        let brute = brute_span(&b, &gens, 3);
        prop_assert_eq!(b.log_p(brute.len() as u128), span.log_order());
        for v in &brute {
            prop_assert!(span.contains(v));
        }
    }

    #[test]
    fn howell_form_is_canonical(b in small_base(), raw in prop::collection::vec(prop::collection::vec(0u64..1000, 3), 1..4), c in 1u64..1000) {
        let gens = rows(&b, &raw);
        let a = Span::new(&b, 3, gens.clone());
        let mut shuffled: Vec<Row> = gens.iter().rev().cloned().collect();
        let mixed = linalg::add(&b, &shuffled[0], &linalg::scale(&b, &gens[0], c));
        shuffled.push(mixed);
        prop_assert_eq!(a, Span::new(&b, 3, shuffled));
    }

    #[test]
    fn modular_law(b in small_base(), x in prop::collection::vec(prop::collection::vec(0u64..1000, 3), 1..3), y in prop::collection::vec(prop::collection::vec(0u64..1000, 3), 1..3)) {
        let a = Span::new(&b, 3, rows(&b, &x));
        let c = Span::new(&b, 3, rows(&b, &y));
        prop_assert_eq!(a.sum(&c).log_order() + a.intersect(&c).log_order(), a.log_order() + c.log_order());
        prop_assert!(a.sum(&c).contains_span(&a));
        prop_assert!(a.contains_span(&a.intersect(&c)));
    }

    #[test]
    fn solve_left_agrees_with_membership(b in small_base(), m in prop::collection::vec(prop::collection::vec(0u64..1000, 2), 2..4), rhs in prop::collection::vec(0u64..1000, 2)) {
        let mat = rows(&b, &m);
        let rhs: Row = rhs.iter().map(|x| b.reduce(*x)).collect();
        let image = Span::new(&b, 2, mat.clone());
        let zero = Span::zero(&b, 2);
        match linalg::solve_left(&b, &mat, 2, &rhs, &zero) {
            Some(x) => prop_assert_eq!(linalg::vec_mat(&b, &x, &mat, 2), rhs),
            None => prop_assert!(!image.contains(&rhs)),
        }
        let ker = linalg::left_kernel(&b, &mat, 2, &zero);
        for v in ker.rows() {
            prop_assert!(linalg::is_zero(&linalg::vec_mat(&b, v, &mat, 2)));
        }
        prop_assert_eq!(ker.log_order() + image.log_order(), mat.len() as u32 * b.e());
    }

    #[test]
    fn algebra_axioms(k in 0usize..8, x in prop::collection::vec(0u64..1000, 4), y in prop::collection::vec(0u64..1000, 4), z in prop::collection::vec(0u64..1000, 4)) {
        let alg = small_algebra(k);
        let (x, y, z) = (element(&alg, &x), element(&alg, &y), element(&alg, &z));
        prop_assert_eq!(alg.mul(&x, &y), alg.mul(&y, &x));
        prop_assert_eq!(alg.mul(&alg.mul(&x, &y), &z), alg.mul(&x, &alg.mul(&y, &z)));
        prop_assert_eq!(alg.mul(&x, &alg.add(&y, &z)), alg.add(&alg.mul(&x, &y), &alg.mul(&x, &z)));
        prop_assert_eq!(alg.mul(&alg.one(), &x), x.clone());
        prop_assert_eq!(alg.is_unit(&x), !alg.max_ideal().contains(&x));
        if let Some(inv) = alg.inv(&x) {
            prop_assert_eq!(alg.mul(&inv, &x), alg.one());
        }
    }

    #[test]
    fn ideal_operations_against_enumeration(k in 0usize..8, g in prop::collection::vec(prop::collection::vec(0u64..1000, 4), 1..3)) {
        let alg = small_algebra(k);
        let gens: Vec<Row> = g.iter().map(|v| element(&alg, v)).collect();
        let i = Ideal::from_generators(&alg, &gens);
        let elems = alg.elements();
        let ann: Vec<&Row> = elems.iter().filter(|a| gens.iter().all(|x| alg.is_zero(&alg.mul(a, x)))).collect();
        prop_assert_eq!(ann.len() as u128, (alg.base().p() as u128).pow(i.annihilator().log_order()));
        for a in &ann {
            prop_assert!(i.annihilator().contains(a));
        }
        let (p, w) = i.is_principal();
        prop_assert_eq!(p, i.is_principal_exhaustive().0);
        if let Some(w) = w {
            prop_assert_eq!(Ideal::from_generators(&alg, &[w]), i.clone());
        }
        prop_assert_eq!(i.minimal_generators().min_generators, i.minimal_generators_exhaustive());
        let m = alg.max_ideal();
        let prod = i.product(&m).unwrap();
        prop_assert!(i.intersect(&m).unwrap().contains_ideal(&prod));
    }

    #[test]
    fn quotient_maps_preserve_cyclicity(k in 0usize..8) {
        let alg = small_algebra(k);
        let ideals = all_ideals(&alg);
        for i in &ideals {
            if criterion::structure_surjectivity_check(&alg, i).cyclic {
                for j in ideals.iter().filter(|j| j.contains_ideal(i)) {
                    prop_assert!(criterion::structure_surjectivity_check(&alg, j).cyclic);
                }
            }
        }
    }

    #[test]
    fn h1_matches_enumeration(n in 2usize..5, b in small_base(), u in 1i64..30) {
        let g = catalog::cyclic(n);
        let unit = (0..).map(|k| u + k).find(|v| v % b.p() as i64 != 0).unwrap();
        let alg = catalog::base_ring_algebra(b);
        let w = b.from_i64(unit);
        // the generator must act with order dividing n
        prop_assume!(b.pow(w, n as u64) == 1);
        let m = scalar_module(&g, &alg, &[unit]);
        let h = m.h1().unwrap();
        let (z, bd) = m.h1_exhaustive();
        prop_assert_eq!(h.z1.log_order(), z);
        prop_assert_eq!(h.b1.log_order(), bd);
        prop_assert_eq!(h.log_order, z - bd);
        prop_assert_eq!(h.invariants.iter().sum::<u32>(), h.log_order);
    }

    #[test]
    fn gma_instances_principal_with_involution(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(inst) = instances::random_instance(&mut rng) {
            for inv in &inst.involutions {
                let a = pseudochar::analyze(&inst.rho, inst.n1, Some(inv)).unwrap();
                let cert = a.certificate.as_ref().unwrap();
                prop_assert!(cert.matches_reducibility_ideal, "{}", inst.label);
                prop_assert!(a.reducibility.is_principal().0);
                prop_assert_eq!(a.decomposition.orders_multiply, true);
                prop_assert!(a.decomposition.off_diagonal_in_max_ideal);
            }
            let a = pseudochar::analyze(&inst.rho, inst.n1, None).unwrap();
            prop_assert!(a.algebra.is_idempotent(&a.idempotents.e[0]));
            prop_assert_eq!(a.algebra.add(&a.idempotents.e[0], &a.idempotents.e[1]), a.algebra.one());
            prop_assert!(a.algebra.mul(&a.idempotents.e[0], &a.idempotents.e[1]).iter().all(|c| *c == 0));
        }
    }

    #[test]
    fn traces_satisfy_identity(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(inst) = instances::random_instance(&mut rng) {
            let t = Pseudocharacter::from_rep(&inst.rho);
            prop_assert!(t.satisfies_identity(t.degree()));
            prop_assert_eq!(t.value(0), &t.algebra().scalar(t.degree() as u64));
            let id = AlgebraHom::identity(t.algebra());
            prop_assert_eq!(t.base_change(&id), t);
        }
    }

    #[test]
    fn criterion_identity_is_consistent(k in 0usize..8, raw in prop::collection::vec(0u64..1000, 4)) {
        let alg = small_algebra(k);
        let pi = element(&alg, &raw);
        let rep = criterion::check_cri1(&AlgebraHom::identity(&alg), &pi).unwrap();
        prop_assert!(rep.bijective);
        prop_assert!(rep.power_inequality);
        prop_assert!(!rep.outcome.violated());
        prop_assert!(rep.levels.windows(2).all(|w| w[0].r_log <= w[1].r_log));
    }
}

#[test]
fn criterion_fuzz_consistent() {
    let s = criterion::fuzz(7, 100);
    assert_eq!(s.count, 100);
    assert!(s.violations.is_empty());
    assert!(s.hypotheses_hold > 0);
}

#[test]
fn h0_of_trivial_modules() {
    let b = BaseRing::new(3, 2).unwrap();
    let alg = catalog::base_ring_algebra(b);
    let m = GModule::from_rep(&GroupRep::trivial(&catalog::symmetric3(), &alg, 2));
    assert_eq!(m.h0_log_order(), 4);
    assert!(matches!(criterion::fuzz(1, 0).violations.len(), 0));
    assert_eq!(
        criterion::check_cri1(&AlgebraHom::identity(&alg), &[3])
            .unwrap()
            .outcome,
        Outcome::Consistent
    );
}
