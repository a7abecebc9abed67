//! Seeded randomized runs.

use rayon::prelude::*;
use serde_json::json;

use rtlab::cohomology;
use rtlab::criterion;
use rtlab::instances;
use rtlab::pseudochar;

use crate::runner::{self, Section};

pub const KINDS: [&str; 4] = ["gma", "criterion", "cohomology", "nonsplit"];

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FuzzError {
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("unknown fuzz kind {0:?}; expected gma, criterion, cohomology or nonsplit")]
    UnknownKind(String),
}

pub fn fuzz_section(kind: &str, count: usize, seed: u64) -> Result<Section, FuzzError> {
    if count == 0 {
        return Err(FuzzError::ZeroCount);
    }
    let mut s = Section::default();
    s.put("kind", kind);
    s.put("count", count);
    s.put("seed", seed);
    match kind {
        "gma" => gma(&mut s, count, seed),
        "criterion" => {
            let f = criterion::fuzz(seed, count);
            s.check(
                "no_implication_violations",
                f.violations.is_empty(),
                format!("{} violations", f.violations.len()),
            );
            s.put("hypotheses_hold", f.hypotheses_hold);
            s.put("lenstra_applies", f.lenstra_applies);
            s.put("violations", &f.violations);
        }
        "cohomology" => torsion(&mut s, count, seed),
        "nonsplit" => nonsplit(&mut s, count, seed),
        other => return Err(FuzzError::UnknownKind(other.into())),
    }
    Ok(s)
}

fn gma(s: &mut Section, count: usize, seed: u64) {
    let sample = instances::sample(seed, count);
    let rows: Vec<_> = sample
        .par_iter()
        .map(|inst| {
            let runs: Vec<_> = std::iter::once(None)
                .chain(inst.involutions.iter().map(Some))
                .map(|inv| {
                    let an = pseudochar::analyze(&inst.rho, inst.n1, inv);
                    match an {
                        Ok(a) => json!({
                            "involution": inv.map(|i| i.kind().clone()),
                            "reducibility_generators": a.reducibility.generators(),
                            "principal": a.reducibility.is_principal().0,
                            "certificate": a.certificate.as_ref().ok().map(|c| c.matches_reducibility_ideal),
                        }),
                        Err(e) => json!({ "involution": inv.map(|i| i.kind().clone()), "error": e.to_string() }),
                    }
                })
                .collect();
            json!({ "label": inst.label, "nonsplit": inst.nonsplit, "runs": runs })
        })
        .collect();
    let mut with_inv = 0;
    let mut failures = Vec::new();
    for r in &rows {
        for run in r["runs"].as_array().expect("array") {
            if !run["involution"].is_null() {
                with_inv += 1;
                if run["principal"] != json!(true) {
                    failures.push(json!({ "label": r["label"], "run": run }));
                }
            }
        }
    }
    s.put("instances", rows.len());
    s.put("involution_runs", with_inv);
    s.check(
        "principal_with_involution",
        failures.is_empty(),
        format!("{} failures in {with_inv} runs", failures.len()),
    );
    s.put("violations", failures);
    s.put("runs", rows);
}

fn torsion(s: &mut Section, count: usize, seed: u64) {
    let modules = instances::torsion_sample(seed, count);
    let rows: Vec<_> = modules
        .par_iter()
        .map(|(label, w)| {
            let levels: Vec<_> = (1..=2)
                .map(|n| cohomology::torsion_functoriality_check(w, n, &[]).expect("small module"))
                .collect();
            (label.clone(), levels)
        })
        .collect();
    let mut bad = Vec::new();
    for (label, levels) in &rows {
        for r in levels {
            let ok = r.exact && r.image_in_kernel && (r.h0_w_log != 0 || r.iso_onto_torsion);
            if !ok {
                bad.push(json!({ "label": label, "n": r.n }));
            }
        }
    }
    s.check(
        "sequence_exact_and_iso_when_h0_zero",
        bad.is_empty(),
        format!("{} failures", bad.len()),
    );
    s.put("violations", bad);
    s.put(
        "modules",
        rows.iter()
            .map(|(l, lv)| json!({ "label": l, "levels": lv }))
            .collect::<Vec<_>>(),
    );
}

fn nonsplit(s: &mut Section, count: usize, seed: u64) {
    let insts = instances::nonsplit_residuals(seed, count);
    let rows: Vec<_> = insts
        .par_iter()
        .map(|inst| {
            let r = runner::residual_section(&inst.rho, inst.n1);
            (inst.label.clone(), r)
        })
        .collect();
    let mut sub = Section::default();
    for (i, (label, r)) in rows.into_iter().enumerate() {
        sub.absorb(&format!("{i:04} {label}"), r);
    }
    s.absorb("instances", sub);
}
