//! Pipelines behind each scenario kind.

use serde::Serialize;
use serde_json::{json, Value};

use rtlab::cohomology::{self, GModule};
use rtlab::criterion;
use rtlab::group_rep::{self, GroupRep};
use rtlab::pseudochar::{self, GmaAnalysis, Triangularization};
use rtlab::ring_core::{all_ideals, Ideal};

use crate::scenario::{self, Kind, Scenario, ScenarioError};
use crate::{demos, Options};

/// One invariant of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, holds: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            holds,
            detail: detail.into(),
        }
    }
}

/// Results plus invariants; the exit code is 1 iff some invariant fails.
#[derive(Clone, Debug, Default)]
pub struct Section {
    pub results: serde_json::Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Section {
    pub fn put(&mut self, key: &str, v: impl Serialize) {
        self.results
            .insert(key.into(), serde_json::to_value(v).expect("serializable"));
    }

    pub fn check(&mut self, name: &str, holds: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, holds, detail));
    }

    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    /// Nests `other` under `key`, keeping its checks with a prefix.
    pub fn absorb(&mut self, key: &str, other: Section) {
        for c in other.checks {
            self.checks.push(Check {
                name: format!("{key}.{}", c.name),
                ..c
            });
        }
        self.results
            .insert(key.into(), Value::Object(other.results));
    }

    pub fn into_report(self, head: Value) -> Value {
        let status = if self.ok() { "ok" } else { "invariant_failure" };
        json!({
            "scenario": head,
            "results": Value::Object(self.results),
            "invariants": self.checks,
            "status": status,
        })
    }
}

fn precondition(section: &str, e: impl ToString) -> ScenarioError {
    ScenarioError::Schema {
        section: section.into(),
        message: e.to_string(),
    }
}

pub fn exhaustive_allowed(opts: &Options, log_order: u32, p: u64) -> bool {
    opts.exhaustive()
        && (p as u128)
            .checked_pow(log_order)
            .is_some_and(|n| n <= opts.max_order as u128)
}

fn ideal_rows(i: &Ideal) -> Vec<Vec<u64>> {
    i.rows().to_vec()
}

/// Reducibility, principality and the checks around them for one
/// representation.
pub fn gma_section(
    rho: &GroupRep,
    n1: usize,
    inv: Option<&group_rep::Involution>,
    opts: &Options,
) -> Result<Section, ScenarioError> {
    let an = pseudochar::analyze(rho, n1, inv).map_err(|e| precondition("rep", e))?;
    let mut s = Section::default();
    let report = an.report();
    s.put("gma", &report);
    s.put("involution", inv.map(|i| i.kind().clone()));
    if inv.is_some() {
        s.check(
            "reducibility_ideal_principal",
            report.principal,
            format!("generators {:?}", report.reducibility_generators),
        );
    }
    if let Ok(cert) = &an.certificate {
        s.check(
            "certificate_generates_reducibility_ideal",
            cert.matches_reducibility_ideal,
            format!("t = {:?}", cert.generator),
        );
    }
    s.check(
        "orders_multiply",
        report.decomposition.orders_multiply,
        "sum of corner orders",
    );
    s.check(
        "off_diagonal_in_max_ideal",
        report.decomposition.off_diagonal_in_max_ideal,
        "T(e1 S e2 S e1) in m_A",
    );

    let alg = rho.algebra();
    let residual = residual_section(rho, n1);
    let nonsplit = residual.results.get("split") == Some(&Value::Bool(false));
    s.absorb("residual", residual);

    let tri = pseudochar::block_triangularize(rho, &an.reducibility, n1)
        .map_err(|e| precondition("rep", e))?;
    s.put("triangularizes_mod_reducibility_ideal", tri.succeeded());
    if nonsplit {
        s.check(
            "triangularizes_mod_reducibility_ideal",
            tri.succeeded(),
            describe(&tri),
        );
    }
    s.put(
        "quotient_by_reducibility_ideal",
        criterion::structure_surjectivity_check(alg, &an.reducibility),
    );
    s.put("trace_generation", criterion::trace_generation_check(rho));

    if exhaustive_allowed(opts, alg.log_order(), alg.base().p()) {
        s.absorb("oracle", gma_oracle(rho, n1, &an, nonsplit)?);
    }
    Ok(s)
}

fn describe(t: &Triangularization) -> String {
    match t {
        Triangularization::Vacuous => "unit ideal".into(),
        Triangularization::Success { .. } => "conjugated into block upper-triangular form".into(),
        Triangularization::Failure { layer } => {
            format!("lower-left block not clearable at layer {layer}")
        }
    }
}

/// Brute-force comparisons: smallest splitting ideal and triangularization
/// over every ideal of the coefficient algebra.
fn gma_oracle(
    rho: &GroupRep,
    n1: usize,
    an: &GmaAnalysis,
    nonsplit: bool,
) -> Result<Section, ScenarioError> {
    let mut s = Section::default();
    let alg = rho.algebra();
    let lifts = an.shape.block_traces();
    if n1 == 1 || rho.degree() - n1 == 1 {
        match pseudochar::smallest_splitting_ideal_exhaustive(&an.pseudochar, n1, Some(&lifts)) {
            Ok(found) => {
                s.put("smallest_splitting_ideal", found.as_ref().map(ideal_rows));
                s.check(
                    "smallest_splitting_ideal_equals_reducibility_ideal",
                    found.as_ref() == Some(&an.reducibility),
                    format!("reducibility ideal {:?}", ideal_rows(&an.reducibility)),
                );
            }
            Err(e) => s.put("smallest_splitting_ideal_error", e.to_string()),
        }
    }
    if nonsplit {
        let mut tested = 0;
        let mut exceptions = Vec::new();
        for j in all_ideals(alg) {
            let ok = pseudochar::block_triangularize(rho, &j, n1)
                .map_err(|e| precondition("rep", e))?
                .succeeded();
            tested += 1;
            if ok != j.contains_ideal(&an.reducibility) {
                exceptions.push(ideal_rows(&j));
            }
        }
        s.put("triangularization_ideals_tested", tested);
        s.check(
            "triangularizes_iff_contains_reducibility_ideal",
            exceptions.is_empty(),
            format!("{} exceptions among {tested} ideals", exceptions.len()),
        );
        s.put("triangularization_exceptions", exceptions);
    }
    Ok(s)
}

/// Splitting and centralizer of `rho mod m`.
pub fn residual_section(rho: &GroupRep, n1: usize) -> Section {
    let mut s = Section::default();
    let alg = rho.algebra();
    let Some((rho0, _)) = rho.reduce_mod(&alg.max_ideal()) else {
        return s;
    };
    match group_rep::is_split(&rho0, n1) {
        Ok(split) => s.put("split", split),
        Err(e) => s.put("split_error", e.to_string()),
    }
    let c = group_rep::centralizer(&rho0);
    s.put("centralizer_dimension", c.dimension);
    s.put("centralizer_scalar", c.is_scalar);
    let blocks: Vec<Option<bool>> = [(0, n1), (n1, rho0.degree())]
        .iter()
        .map(|&(lo, hi)| {
            rho0.block(lo, hi)
                .ok()
                .and_then(|b| b.is_absolutely_irreducible().ok())
        })
        .collect();
    s.put("blocks_absolutely_irreducible", &blocks);
    let distinct = match (rho0.block(0, n1), rho0.block(n1, rho0.degree())) {
        (Ok(a), Ok(b)) => a.degree() != b.degree() || a.traces() != b.traces(),
        _ => false,
    };
    s.put("blocks_distinct_traces", distinct);
    if s.results.get("split") == Some(&Value::Bool(false))
        && distinct
        && blocks.iter().all(|b| *b == Some(true))
    {
        s.check(
            "scalar_centralizer",
            c.is_scalar,
            format!("dimension {:?}", c.dimension),
        );
    }
    s
}

pub fn cohomology_section(
    w: &GModule,
    sc: &Scenario,
    opts: &Options,
) -> Result<Section, ScenarioError> {
    let mut s = Section::default();
    s.put("module_log_order", w.log_order());
    s.put("h0_log_order", w.h0_log_order());
    let h1 = w.h1().map_err(|e| precondition("module", e))?;
    s.put("h1", json!({ "log_order": h1.log_order, "invariants": h1.invariants, "z1_log_order": h1.z1.log_order(), "b1_log_order": h1.b1.log_order() }));
    let k = w.group().generators().len() as u32;
    if exhaustive_allowed(opts, w.log_order() * k.max(1), w.base().p()) {
        let (z, b) = w.h1_exhaustive();
        s.put(
            "h1_exhaustive",
            json!({ "z1_log_order": z, "b1_log_order": b, "log_order": z - b }),
        );
        s.check(
            "h1_linear_matches_enumeration",
            z == h1.z1.log_order() && b == h1.b1.log_order(),
            format!("linear {} / enumerated {}", h1.log_order, z - b),
        );
    }
    if !sc.conditions.is_empty() {
        let sel = w
            .selmer(&sc.conditions)
            .map_err(|e| precondition("conditions", e))?;
        s.put(
            "selmer",
            json!({ "log_order": sel.selmer.log_order, "invariants": sel.selmer.invariants }),
        );
    }
    let mut levels = Vec::new();
    for &n in &sc.functoriality {
        if n == 0 || n > w.base().e() {
            return Err(precondition(
                "functoriality",
                format!("level {n} outside 1..={}", w.base().e()),
            ));
        }
        let r = cohomology::torsion_functoriality_check(w, n, &sc.conditions)
            .map_err(|e| precondition("module", e))?;
        s.check(
            &format!("sequence_exact_n{n}"),
            r.exact && r.image_in_kernel,
            format!("|H1(W_n)| = p^{}", r.h1_wn_log),
        );
        if r.h0_w_log == 0 {
            s.check(
                &format!("iso_onto_torsion_n{n}"),
                r.iso_onto_torsion,
                format!("|H1(W)[p^n]| = p^{}", r.torsion_log),
            );
        }
        if let Some(sel) = &r.selmer {
            s.check(
                &format!("selmer_iso_n{n}"),
                sel.iso || r.h0_w_log != 0,
                format!("{} vs {}", sel.wn_log, sel.w_torsion_log),
            );
        }
        levels.push(r);
    }
    if !levels.is_empty() {
        s.put("functoriality", levels);
    }
    if !sc.tamagawa.is_empty() {
        s.put(
            "tamagawa",
            cohomology::tamagawa_inputs(w, &sc.tamagawa)
                .map_err(|e| precondition("tamagawa", e))?,
        );
    }
    Ok(s)
}

pub fn tangent_section(rho: &GroupRep, n1: usize, sc: &Scenario) -> Result<Section, ScenarioError> {
    let t =
        cohomology::tangent_space(rho, n1, &sc.conditions).map_err(|e| precondition("rep", e))?;
    let mut s = Section::default();
    s.put("dimension", t.dimension);
    s.put("upper_triangular_dimension", t.upper_triangular_dimension);
    s.put("block_dimensions", t.block_dimensions);
    s.put("basis", &t.basis);
    s.check(
        "upper_triangular_within_total",
        t.upper_triangular_dimension <= t.dimension,
        "",
    );
    Ok(s)
}

pub fn criterion_section(
    ctx: &scenario::CriterionContext,
    skeleton: bool,
) -> Result<Section, ScenarioError> {
    let mut s = Section::default();
    let rep = criterion::check_cri1(&ctx.phi, &ctx.pi).map_err(|e| precondition("criterion", e))?;
    s.check(
        "criterion_implication",
        !rep.outcome.violated(),
        format!("{:?}", rep.outcome),
    );
    s.put("criterion", &rep);
    if let Some((pi_r, pi_s)) = &ctx.augmentation {
        let wl = criterion::wiles_lenstra_data(&ctx.phi, pi_r, pi_s)
            .map_err(|e| precondition("criterion.augmentation", e))?;
        s.check(
            "wiles_lenstra_implication",
            !wl.outcome.violated(),
            format!("{:?}", wl.outcome),
        );
        s.put("wiles_lenstra", &wl);
    }
    if skeleton {
        let c = criterion::structure_surjectivity_check(ctx.phi.source(), &ctx.ideal);
        s.put("cyclicity", &c);
    }
    Ok(s)
}

fn head(sc: &Scenario) -> Value {
    json!({ "kind": format!("{:?}", sc.kind).to_lowercase(), "name": sc.name })
}

/// Looks up a dotted path, indexing arrays by number.
fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |cur, key| match cur {
        Value::Object(m) => m.get(key),
        Value::Array(a) => key.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

fn expectations(sc: &Scenario, s: &mut Section) {
    let results = Value::Object(s.results.clone());
    for (path, want) in &sc.expect {
        let want = serde_json::to_value(want).expect("toml values serialize");
        let got = lookup(&results, path);
        s.check(
            &format!("expect.{path}"),
            got == Some(&want),
            format!(
                "expected {want}, got {}",
                got.map_or("nothing".into(), |g| g.to_string())
            ),
        );
    }
}

/// Runs one scenario; `Err` means a parse or schema problem (exit 2).
pub fn run_scenario(sc: &Scenario, opts: &Options) -> Result<Value, ScenarioError> {
    let mut s = match sc.kind {
        Kind::Gma => {
            let ctx = scenario::build_context(sc)?;
            let rho = ctx
                .rho
                .as_ref()
                .ok_or_else(|| precondition("rep", "gma needs a [rep] section"))?;
            gma_section(rho, ctx.n1, ctx.involution.as_ref(), opts)?
        }
        Kind::Cohomology => {
            let ctx = scenario::build_context(sc)?;
            let w = scenario::build_module(sc, &ctx)?;
            cohomology_section(&w, sc, opts)?
        }
        Kind::Tangent => {
            let ctx = scenario::build_context(sc)?;
            let rho = ctx
                .rho
                .as_ref()
                .ok_or_else(|| precondition("rep", "tangent needs a [rep] section"))?;
            tangent_section(rho, ctx.n1, sc)?
        }
        Kind::Criterion => criterion_section(&scenario::build_criterion(sc)?, false)?,
        Kind::Cons1Skeleton => criterion_section(&scenario::build_criterion(sc)?, true)?,
        Kind::Demo => {
            let name = sc
                .demo
                .as_deref()
                .ok_or_else(|| precondition("demo", "missing demo name"))?;
            demos::demo_section(name, opts).map_err(|e| precondition("demo", e))?
        }
    };
    expectations(sc, &mut s);
    Ok(s.into_report(head(sc)))
}
