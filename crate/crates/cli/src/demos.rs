//! Built-in scenario sets.

use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use rtlab::catalog;
use rtlab::cohomology::{self, scalar_module, GModule};
use rtlab::criterion::{self, Fixture, Outcome};
use rtlab::group_rep::Involution;
use rtlab::instances;
use rtlab::linalg::Row;
use rtlab::pseudochar::{self, TracedAlgebra};
use rtlab::ring_core::{AlgebraHom, LocalAlgebra};
use rtlab::BaseRing;

use crate::runner::{self, Section};
use crate::Options;

pub const DEMOS: [&str; 5] = ["s3_p3", "m2_full", "cri1_suite", "wl_suite", "all"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DemoError {
    #[error("unknown demo {0:?}; expected one of s3_p3, m2_full, cri1_suite, wl_suite, all")]
    UnknownDemo(String),
}

fn base(p: u64, e: u32) -> BaseRing {
    BaseRing::new(p, e).expect("odd prime")
}

fn f3() -> LocalAlgebra {
    catalog::base_ring_algebra(base(3, 1))
}

pub fn demo_section(name: &str, opts: &Options) -> Result<Section, DemoError> {
    Ok(match name {
        "s3_p3" => s3_p3(opts),
        "m2_full" => m2_full(),
        "cri1_suite" => cri1_suite(),
        "wl_suite" => wl_suite(),
        "all" => {
            let parts: Vec<(&str, Section)> = ["s3_p3", "m2_full", "cri1_suite", "wl_suite"]
                .par_iter()
                .map(|n| (*n, demo_section(n, opts).expect("known demo")))
                .collect();
            let mut s = Section::default();
            for (n, part) in parts {
                s.absorb(n, part);
            }
            s
        }
        other => return Err(DemoError::UnknownDemo(other.into())),
    })
}

/// `dim H^1(S_3, F_3(chi))` by linear algebra and by enumeration.
pub fn s3_h1(sign: bool) -> (u32, u32) {
    let w = scalar_module(
        &catalog::symmetric3(),
        &f3(),
        &[1, if sign { -1 } else { 1 }],
    );
    let h = w.h1().expect("small module");
    let (z, b) = w.h1_exhaustive();
    (h.log_order, z - b)
}

fn s3_p3(opts: &Options) -> Section {
    let mut s = Section::default();
    let g = catalog::symmetric3();
    for (label, sign) in [("sign", true), ("trivial", false)] {
        let (linear, brute) = s3_h1(sign);
        s.put(
            &format!("h1_{label}"),
            json!({ "linear": linear, "exhaustive": brute }),
        );
        s.check(
            &format!("h1_{label}_agrees"),
            linear == brute,
            format!("{linear} vs {brute}"),
        );
    }
    let rho0 = instances::s3_reflection(&f3());
    let tangent = cohomology::tangent_space(&rho0, 1, &[]).expect("field coefficients");
    s.put("tangent", json!({ "dimension": tangent.dimension, "upper_triangular_dimension": tangent.upper_triangular_dimension, "block_dimensions": tangent.block_dimensions }));
    let inv = Involution::inverse(&g);
    s.absorb(
        "gma_residual",
        runner::gma_section(&rho0, 1, Some(&inv), opts).expect("valid"),
    );

    // every F_3[eps] deformation is strictly equivalent to rho_0 here
    let dual = catalog::dual_numbers(base(3, 1));
    let ad = GModule::ad(&rho0);
    let z1 = ad
        .cocycles(cohomology::DEFAULT_BUDGET)
        .expect("small module");
    let dirs: Vec<Row> = z1.rows().to_vec();
    let mut reducibility_zero = true;
    for c in &dirs {
        let rho = instances::perturb(
            &rho0,
            &dual,
            &[(dual.generator(1), ad.unflatten_cochain(c))],
        )
        .expect("cocycle");
        reducibility_zero &=
            pseudochar::analyze(&rho, 1, None).is_ok_and(|a| a.reducibility.is_zero());
    }
    s.put("dual_number_deformations", dirs.len());
    s.check(
        "dual_number_reducibility_ideal_zero",
        reducibility_zero,
        "vanishing tangent space",
    );

    let rho = instances::s3_over_z9();
    s.absorb(
        "gma_z9",
        runner::gma_section(&rho, 1, Some(&inv), opts).expect("valid"),
    );

    let g_dir: Vec<Row> = (0..g.order())
        .map(|h| rho0.image(h)[0][1].clone())
        .collect();
    let conj = pseudochar::strict_equivalence_conjugator(&rho0, &g_dir).expect("prime field");
    s.put(
        "strict_conjugator",
        json!({ "conjugator": conj.conjugator, "explicit_formula": conj.explicit_formula }),
    );
    s.check("strict_conjugator_verified", conj.verified, "");
    s
}

fn m2_full() -> Section {
    let mut s = Section::default();
    let algebras: Vec<(String, LocalAlgebra)> = vec![
        ("F3".into(), f3()),
        ("F5".into(), catalog::base_ring_algebra(base(5, 1))),
        ("F9".into(), catalog::finite_field(3, 2).expect("prime")),
        ("Z/9".into(), catalog::base_ring_algebra(base(3, 2))),
        ("F3[eps]".into(), catalog::dual_numbers(base(3, 1))),
        ("Z/9[d]/(d^2,3d)".into(), catalog::delta_algebra(base(3, 2))),
    ];
    let results: Vec<(String, Section)> = algebras
        .par_iter()
        .map(|(n, a)| (n.clone(), m2_one(a)))
        .collect();
    for (n, part) in results {
        s.absorb(&n, part);
    }
    s
}

fn m2_one(a: &LocalAlgebra) -> Section {
    let mut s = Section::default();
    let m = TracedAlgebra::full_matrix(a, 2, 1).expect("full matrix algebra");
    let idem = pseudochar::lift_idempotents(&m, None, true).expect("diagonal idempotents");
    let gma = pseudochar::gma_decompose(&m, &idem);
    let it = pseudochar::reducibility_ideal(&m, &gma);
    s.put("corner_log_orders", gma.corner_log_orders);
    s.check(
        "reducibility_ideal_is_unit",
        it.is_unit(),
        format!("{:?}", it.rows()),
    );
    match pseudochar::principality_certificate(&m, &idem, &gma, true) {
        Ok(c) => {
            s.put("certificate_generator", &c.generator);
            s.check("certificate_generates", c.matches_reducibility_ideal, "");
        }
        Err(e) => s.check("certificate_generates", false, e.to_string()),
    }
    s
}

fn fixture_section(f: &Fixture) -> Section {
    let mut s = Section::default();
    let rep = criterion::check_cri1(&f.phi, &f.pi).expect("fixtures are surjective");
    s.put("violates", f.violates);
    s.check(
        "implication",
        !rep.outcome.violated(),
        format!("{:?}", rep.outcome),
    );
    match f.violates {
        None => s.check(
            "all_hypotheses_and_bijective",
            rep.outcome == Outcome::Consistent,
            format!("{:?}", rep.failed()),
        ),
        Some(h) => s.check(
            "names_only_violated_hypothesis",
            rep.failed() == vec![h],
            format!("{:?}", rep.failed()),
        ),
    }
    s.put("report", &rep);
    s
}

pub fn cri1_suite() -> Section {
    let mut s = Section::default();
    let mut pos = Section::default();
    for f in criterion::positive_fixtures() {
        pos.absorb(&f.name, fixture_section(&f));
    }
    s.absorb("positive", pos);
    let mut neg = Section::default();
    for f in criterion::negative_fixtures() {
        neg.absorb(&f.name, fixture_section(&f));
    }
    s.absorb("negative", neg);
    let mut extra = Section::default();
    for f in [criterion::delta_fixture(), criterion::fixture_x3x9()] {
        let rep = criterion::check_cri1(&f.phi, &f.pi).expect("surjective");
        extra.check(
            &format!("{}.implication", f.name),
            !rep.outcome.violated(),
            format!("{:?}", rep.failed()),
        );
        extra.put(&f.name, &rep);
    }
    s.absorb("documented", extra);
    s
}

pub fn wl_suite() -> Section {
    let mut s = Section::default();
    let (phi, pi_r, pi_s) = criterion::wiles_lenstra_fixture();
    let wl = criterion::wiles_lenstra_data(&phi, &pi_r, &pi_s).expect("commuting");
    s.check(
        "fixture_phi_equals_eta",
        wl.phi_r_log == 1 && wl.eta_s_log == 1,
        format!(
            "|Phi_R| = 3^{}, |O/eta_S| = 3^{}",
            wl.phi_r_log, wl.eta_s_log
        ),
    );
    s.check(
        "fixture_implication",
        !wl.outcome.violated(),
        format!("{:?}", wl.outcome),
    );
    s.put("fixture", &wl);
    let z27 = catalog::base_ring_algebra(base(3, 3));
    let id = AlgebraHom::identity(&z27);
    let zero = criterion::wiles_lenstra_data(&id, &id, &id).expect("commuting");
    s.check(
        "zero_kernel",
        zero.phi_r_log == 0 && zero.eta_s_log == 0 && zero.outcome == Outcome::Consistent,
        "",
    );
    s.put("zero_kernel", &zero);
    let fuzz = criterion::fuzz(7, 100);
    s.check(
        "fuzz_no_violations",
        fuzz.violations.is_empty(),
        format!("{} violations", fuzz.violations.len()),
    );
    s.put("fuzz", json!({ "seed": fuzz.seed, "count": fuzz.count, "hypotheses_hold": fuzz.hypotheses_hold, "lenstra_applies": fuzz.lenstra_applies }));
    s
}
