//! The numerical isomorphism criterion for surjections of local algebras,
//! Wiles-Lenstra comparison data and the cyclicity checks feeding them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::catalog;
use crate::group_rep::GroupRep;
use crate::linalg::{self, Row, Span};
use crate::ring_core::{AlgebraError, AlgebraHom, HomError, Ideal, LocalAlgebra};
use crate::zmod::BaseRing;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CriterionError {
    #[error("the map is not surjective")]
    NotSurjective,
    #[error("not an algebra map: {0}")]
    NotAlgebraHom(#[from] HomError),
    #[error("the augmentations do not commute with the map")]
    DiagramNotCommuting,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub const HYP_FIBRE: &str = "H1: R/piR -> S/phi(pi)S is an isomorphism";
pub const HYP_CYCLIC: &str = "H2: R/piR is O-cyclic of positive length";
pub const HYP_SQUARE: &str = "H3: piR/pi^2R -> phi(pi)S/phi(pi)^2S is an isomorphism (full length)";
pub const HYP_FREE: &str = "S is free over O";
pub const HYP_GROWTH: &str = "|xS/x^kS| = |xS/x^2S|^(k-1) up to the stable level of R, x = phi(pi)";
pub const NO_CLAIM: &str = "hypothesis failure, no implication claimed";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisResult {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Outcome {
    /// Every hypothesis holds and the conclusion was confirmed independently.
    Consistent,
    /// Some hypothesis fails; nothing is claimed.
    HypothesisFailure {
        failed: Vec<String>,
        message: String,
    },
    /// Every hypothesis holds but the conclusion fails.
    ImplicationViolated,
}

impl Outcome {
    pub fn violated(&self) -> bool {
        matches!(self, Outcome::ImplicationViolated)
    }

    fn decide(failed: Vec<String>, conclusion: bool) -> Outcome {
        if !failed.is_empty() {
            Outcome::HypothesisFailure {
                failed,
                message: NO_CLAIM.into(),
            }
        } else if conclusion {
            Outcome::Consistent
        } else {
            Outcome::ImplicationViolated
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelData {
    pub n: u32,
    /// `log_p |R / pi^n R|`.
    pub r_log: u32,
    /// `log_p |S / phi(pi)^n S|`.
    pub s_log: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub hypotheses: Vec<HypothesisResult>,
    /// `R/piR = O/p^r`, when cyclic.
    pub r: Option<u32>,
    pub e: u32,
    pub levels: Vec<LevelData>,
    /// `|piR/pi^kR| <= |piR/pi^2R|^(k-1)` for every level.
    pub power_inequality: bool,
    pub s_invariant_factors: Vec<u64>,
    pub bijective: bool,
    pub outcome: Outcome,
}

impl CriterionReport {
    pub fn failed(&self) -> Vec<&str> {
        self.hypotheses
            .iter()
            .filter(|h| !h.holds)
            .map(|h| h.name.as_str())
            .collect()
    }
}

fn principal(alg: &LocalAlgebra, x: &[u64]) -> Ideal {
    Ideal::from_generators(alg, &[x.to_vec()])
}

/// `O . 1 + I = A`, i.e. `A/I` is generated by the image of `O`.
fn o_cyclic_mod(alg: &LocalAlgebra, i: &Ideal) -> Option<Row> {
    let span = i.span().extend([alg.one()]);
    (0..alg.rank())
        .map(|k| alg.generator(k))
        .find(|g| !span.contains(g))
}

/// Whether every invariant factor of `A` equals `p^e`.
pub fn is_free(alg: &LocalAlgebra) -> bool {
    alg.torsion().iter().all(|t| *t == alg.base().e())
}

pub fn check_cri1(phi: &AlgebraHom, pi: &[u64]) -> Result<CriterionReport, CriterionError> {
    if !phi.is_surjective() {
        return Err(CriterionError::NotSurjective);
    }
    let r = phi.source();
    let s = phi.target();
    let e = r.base().e();
    let pi = r.reduce(pi);
    let spi = phi.apply(&pi);
    let (rl, sl) = (r.log_order(), s.log_order());
    let mut levels = Vec::new();
    let mut rpow = r.one();
    let mut spow = s.one();
    let mut n = 0;
    loop {
        n += 1;
        rpow = r.mul(&rpow, &pi);
        spow = s.mul(&spow, &spi);
        let lv = LevelData {
            n,
            r_log: rl - principal(r, &rpow).log_order(),
            s_log: sl - principal(s, &spow).log_order(),
        };
        let stable = levels
            .last()
            .is_some_and(|l: &LevelData| l.r_log == lv.r_log && l.s_log == lv.s_log);
        if stable {
            break;
        }
        levels.push(lv);
    }
    let level = |k: usize| {
        levels
            .get(k - 1)
            .unwrap_or(levels.last().expect("one level"))
    };
    let r1 = level(1).r_log;
    let s1 = level(1).s_log;
    let mut hyps = Vec::new();
    hyps.push(HypothesisResult {
        name: HYP_FIBRE.into(),
        holds: r1 == s1,
        detail: format!("|R/piR| = p^{r1}, |S/phi(pi)S| = p^{s1}"),
    });
    let cyclic_witness = o_cyclic_mod(r, &principal(r, &pi));
    let cyclic = cyclic_witness.is_none() && r1 >= 1;
    hyps.push(HypothesisResult {
        name: HYP_CYCLIC.into(),
        holds: cyclic,
        detail: match &cyclic_witness {
            Some(w) => format!("basis element {w:?} is not in O + piR"),
            None if r1 == 0 => "pi is a unit".into(),
            None => format!("R/piR = O/p^{r1}"),
        },
    });
    if cyclic && r1 == e {
        // |piR/pi^2R| = |R/pi^2R| - |R/piR| in logs
        let a = level(2).r_log - r1;
        let b = level(2).s_log - s1;
        hyps.push(HypothesisResult {
            name: HYP_SQUARE.into(),
            holds: a == b,
            detail: format!("|piR/pi^2R| = p^{a}, |phi(pi)S/phi(pi)^2S| = p^{b}"),
        });
    }
    let free = is_free(s);
    let mut exps = linalg::quotient_invariants(&Span::full(s.base(), s.rank()), s.relations());
    exps.sort();
    hyps.push(HypothesisResult {
        name: HYP_FREE.into(),
        holds: free,
        detail: format!("invariant factors p^{exps:?}"),
    });
    let n_stable = levels.len();
    let step = level(2).s_log - s1;
    let growth_bad = (2..=n_stable).find(|&k| level(k).s_log - s1 != (k as u32 - 1) * step);
    hyps.push(HypothesisResult {
        name: HYP_GROWTH.into(),
        holds: growth_bad.is_none(),
        detail: match growth_bad {
            Some(k) => format!(
                "|xS/x^{k}S| = p^{}, expected p^{}",
                level(k).s_log - s1,
                (k as u32 - 1) * step
            ),
            None => format!("checked through k = {n_stable}"),
        },
    });
    let pr_log = rl - level(1).r_log;
    let pr2 = level(2).r_log - level(1).r_log;
    let power_inequality = (2..=levels.len() + 1).all(|k| {
        let quotient = (rl - level(1).r_log) - (rl - level(k).r_log);
        let _ = pr_log;
        quotient <= (k as u32 - 1) * pr2
    });
    let bijective = phi.is_bijective();
    let failed: Vec<String> = hyps
        .iter()
        .filter(|h| !h.holds)
        .map(|h| h.name.clone())
        .collect();
    Ok(CriterionReport {
        hypotheses: hyps,
        r: cyclic.then_some(r1),
        e,
        levels,
        power_inequality,
        s_invariant_factors: exps.iter().map(|k| s.base().p().pow(*k)).collect(),
        bijective,
        outcome: Outcome::decide(failed, bijective),
    })
}

/// Builds `phi` from generator images and runs [`check_cri1`].
pub fn check_cri1_from_images(
    r: &LocalAlgebra,
    s: &LocalAlgebra,
    images: Vec<Row>,
    pi: &[u64],
) -> Result<CriterionReport, CriterionError> {
    let phi = AlgebraHom::new(r, s, images)?;
    check_cri1(&phi, pi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WilesLenstraReport {
    /// `log_p |ker pi_R / (ker pi_R)^2|`.
    pub phi_r_log: u32,
    pub phi_s_log: u32,
    /// `log_p |O / eta_S|`, `eta_S = pi_S(Ann_S ker pi_S)`.
    pub eta_s_log: u32,
    pub ker_principal: bool,
    pub s_free: bool,
    pub bijective: bool,
    pub outcome: Outcome,
}

fn cotangent_log(aug: &AlgebraHom) -> u32 {
    let k = aug.kernel();
    k.log_order() - k.power(2).log_order()
}

/// `pi_S o phi = pi_R` is required; the conclusion `phi` bijective is tested
/// whenever `S` is `O`-free, `eta_S != 0`, `ker pi_R` is principal and `|Phi_R| <= |O/eta_S|`.
pub fn wiles_lenstra_data(
    phi: &AlgebraHom,
    pi_r: &AlgebraHom,
    pi_s: &AlgebraHom,
) -> Result<WilesLenstraReport, CriterionError> {
    if pi_r.source() != phi.source()
        || pi_s.source() != phi.target()
        || pi_r.target() != pi_s.target()
    {
        return Err(CriterionError::DiagramNotCommuting);
    }
    if phi.compose(pi_s) != *pi_r {
        return Err(CriterionError::DiagramNotCommuting);
    }
    let o = pi_s.target();
    let phi_r_log = cotangent_log(pi_r);
    let phi_s_log = cotangent_log(pi_s);
    let eta = pi_s.map_ideal(&pi_s.kernel().annihilator());
    let eta_s_log = o.log_order() - eta.log_order();
    let ker_principal = pi_r.kernel().is_principal().0;
    let bijective = phi.is_bijective();
    let s_free = is_free(phi.target());
    let mut failed = Vec::new();
    if !s_free {
        failed.push(HYP_FREE.to_string());
    }
    if eta_s_log >= o.base().e() {
        failed.push("eta_S is nonzero".to_string());
    }
    if !ker_principal {
        failed.push("ker pi_R is principal".to_string());
    }
    if phi_r_log > eta_s_log {
        failed.push("|Phi_R| <= |O/eta_S|".to_string());
    }
    Ok(WilesLenstraReport {
        phi_r_log,
        phi_s_log,
        eta_s_log,
        ker_principal,
        s_free,
        bijective,
        outcome: Outcome::decide(failed, bijective),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicityReport {
    pub cyclic: bool,
    /// `R/I = O/p^s` when cyclic.
    pub level: Option<u32>,
    pub witness: Option<Row>,
}

/// Whether `O -> R/I` is surjective, with the length of `R/I` when it is.
pub fn structure_surjectivity_check(alg: &LocalAlgebra, i: &Ideal) -> CyclicityReport {
    let witness = o_cyclic_mod(alg, i);
    CyclicityReport {
        cyclic: witness.is_none(),
        level: witness.is_none().then(|| alg.log_order() - i.log_order()),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceGenerationReport {
    pub generated: bool,
    pub subalgebra_log: u32,
    pub witness: Option<Row>,
}

/// The `O`-subalgebra generated by the traces, compared with the algebra.
pub fn trace_generation_check(rho: &GroupRep) -> TraceGenerationReport {
    let alg = rho.algebra();
    let mut span = alg
        .relations()
        .extend(std::iter::once(alg.one()).chain(rho.traces()));
    loop {
        let rows: Vec<Row> = span.rows().to_vec();
        let products = rows
            .iter()
            .flat_map(|a| rows.iter().map(move |b| alg.mul(a, b)));
        let next = span.extend(products);
        if next == span {
            break;
        }
        span = next;
    }
    let witness = (0..alg.rank())
        .map(|k| alg.generator(k))
        .find(|g| !span.contains(g));
    TraceGenerationReport {
        generated: witness.is_none(),
        subalgebra_log: span.log_order() - alg.relations().log_order(),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cons1Skeleton {
    pub cyclicity: CyclicityReport,
    pub criterion: CriterionReport,
}

/// Cyclicity of `R/I` followed by the criterion for `phi`.
pub fn cons1_skeleton(
    phi: &AlgebraHom,
    pi: &[u64],
    i: &Ideal,
) -> Result<Cons1Skeleton, CriterionError> {
    Ok(Cons1Skeleton {
        cyclicity: structure_surjectivity_check(phi.source(), i),
        criterion: check_cri1(phi, pi)?,
    })
}

/// A named criterion instance.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub phi: AlgebraHom,
    pub pi: Row,
    /// The hypothesis a negative fixture is built to violate.
    pub violates: Option<&'static str>,
}

fn b(p: u64, e: u32) -> BaseRing {
    BaseRing::new(p, e).expect("odd prime")
}

/// `O[x,y]/(x^2, y^2)` with basis `1, x, y, xy`.
pub fn bi_dual(base: BaseRing) -> LocalAlgebra {
    let idx = |i: usize, j: usize| i + 2 * j;
    let mut st = vec![vec![vec![0u64; 4]; 4]; 4];
    for a in 0..4 {
        for c in 0..4 {
            let (i, j) = (a % 2 + c % 2, a / 2 + c / 2);
            if i < 2 && j < 2 {
                st[a][c][idx(i, j)] = 1;
            }
        }
    }
    LocalAlgebra::new(base, None, st, vec![1, 0, 0, 0]).expect("local")
}

fn fixture(
    name: &str,
    r: &LocalAlgebra,
    s: &LocalAlgebra,
    images: &[Vec<i64>],
    pi: &[i64],
    violates: Option<&'static str>,
) -> Fixture {
    let images = images.iter().map(|v| s.from_i64s(v)).collect();
    Fixture {
        name: name.into(),
        phi: AlgebraHom::new(r, s, images).expect("fixture map"),
        pi: r.from_i64s(pi),
        violates,
    }
}

/// Instances satisfying every hypothesis.
pub fn positive_fixtures() -> Vec<Fixture> {
    let z9 = catalog::base_ring_algebra(b(3, 2));
    let z27 = catalog::base_ring_algebra(b(3, 3));
    let z25 = catalog::base_ring_algebra(b(5, 2));
    let wl = catalog::monogenic(b(3, 3), &[0, -3]);
    let ram = catalog::monogenic(b(3, 2), &[-3, 0]);
    let ram7 = catalog::monogenic(b(7, 2), &[-7, 0]);
    let dual9 = catalog::dual_numbers(b(3, 2));
    let t3 = catalog::truncated_polynomial(b(3, 1), 3);
    let t5 = catalog::truncated_polynomial(b(5, 1), 4);
    let eis = catalog::monogenic(b(5, 2), &[5, 5, 0]);
    let id2 = [vec![1, 0], vec![0, 1]];
    vec![
        fixture("Z/9 id pi=3", &z9, &z9, &[vec![1]], &[3], None),
        fixture("Z/27 id pi=9", &z27, &z27, &[vec![1]], &[9], None),
        fixture("Z/27 id pi=3", &z27, &z27, &[vec![1]], &[3], None),
        fixture("Z/25 id pi=5", &z25, &z25, &[vec![1]], &[5], None),
        fixture("Z/27[x]/(x^2-3x) id pi=x", &wl, &wl, &id2, &[0, 1], None),
        fixture("Z/9[x]/(x^2-3) id pi=x", &ram, &ram, &id2, &[0, 1], None),
        fixture(
            "Z/9[x]/(x^2-3) x->-x pi=x",
            &ram,
            &ram,
            &[vec![1, 0], vec![0, -1]],
            &[0, 1],
            None,
        ),
        fixture("Z/49[x]/(x^2-7) id pi=x", &ram7, &ram7, &id2, &[0, 1], None),
        fixture("Z/9[eps] id pi=eps", &dual9, &dual9, &id2, &[0, 1], None),
        fixture(
            "F3[x]/(x^3) x->x+x^2 pi=x",
            &t3,
            &t3,
            &[vec![1, 0, 0], vec![0, 1, 1], vec![0, 0, 1]],
            &[0, 1, 0],
            None,
        ),
        fixture(
            "F5[x]/(x^4) id pi=x",
            &t5,
            &t5,
            &[
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
            ],
            &[0, 1, 0, 0],
            None,
        ),
        fixture(
            "Z/25[x]/(x^3+5x+5) id pi=x",
            &eis,
            &eis,
            &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]],
            &[0, 1, 0],
            None,
        ),
    ]
}

/// Instances each violating exactly one hypothesis.
pub fn negative_fixtures() -> Vec<Fixture> {
    let z9 = catalog::base_ring_algebra(b(3, 2));
    let z27 = catalog::base_ring_algebra(b(3, 3));
    let x3x27 = catalog::monogenic(b(3, 3), &[0, -3]);
    let delta = catalog::delta_algebra(b(3, 2));
    let bd = bi_dual(b(3, 1));
    let t3 = catalog::truncated_polynomial(b(3, 1), 3);
    let t2 = catalog::truncated_polynomial(b(3, 1), 2);
    // Z/27 + (Z/9) y with y^2 = 9
    let st = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![9, 0]]];
    let y9 = LocalAlgebra::new(b(3, 3), Some(vec![3, 2]), st, vec![1, 0]).expect("local");
    let dual3 = catalog::dual_numbers(b(3, 1));
    vec![
        fixture(
            "Z/27+(Z/9)y, y^2=9 -> Z/27, y->3, pi=y",
            &y9,
            &z27,
            &[vec![1], vec![3]],
            &[0, 1],
            Some(HYP_FIBRE),
        ),
        fixture(
            "F3[x,y]/(x^2,y^2) -> F3[y]/(y^2), x->0, pi=x",
            &bd,
            &dual3,
            &[vec![1, 0], vec![0, 0], vec![0, 1], vec![0, 0]],
            &[0, 1, 0, 0],
            Some(HYP_CYCLIC),
        ),
        fixture("Z/9 id pi=1", &z9, &z9, &[vec![1]], &[1], Some(HYP_CYCLIC)),
        fixture(
            "Z/27[x]/(x^2-3x) -> Z/27, x->0, pi=x",
            &x3x27,
            &z27,
            &[vec![1], vec![0]],
            &[0, 1],
            Some(HYP_SQUARE),
        ),
        fixture(
            "Z/9[d]/(d^2,3d) id pi=d",
            &delta,
            &delta,
            &[vec![1, 0], vec![0, 1]],
            &[0, 1],
            Some(HYP_FREE),
        ),
        fixture(
            "F3[x]/(x^3) -> F3[x]/(x^2), pi=x",
            &t3,
            &t2,
            &[vec![1, 0], vec![0, 1], vec![0, 0]],
            &[0, 1, 0],
            Some(HYP_GROWTH),
        ),
    ]
}

/// `Z/9[d]/(d^2, 3d) -> Z/9`, `pi = 3`: violates both the fibre and the
/// cyclicity hypotheses.
pub fn delta_fixture() -> Fixture {
    let z9 = catalog::base_ring_algebra(b(3, 2));
    let delta = catalog::delta_algebra(b(3, 2));
    fixture(
        "Z/9[d]/(d^2,3d) -> Z/9, d->0, pi=3",
        &delta,
        &z9,
        &[vec![1], vec![0]],
        &[3, 0],
        None,
    )
}

/// `Z/9[x]/(x^2 - 3x) -> Z/9`, `x -> 3`, `pi = x`: fibre and growth both fail.
pub fn fixture_x3x9() -> Fixture {
    let z9 = catalog::base_ring_algebra(b(3, 2));
    let x3x9 = catalog::monogenic(b(3, 2), &[0, -3]);
    fixture(
        "Z/9[x]/(x^2-3x) -> Z/9, x->3, pi=x",
        &x3x9,
        &z9,
        &[vec![1], vec![3]],
        &[0, 1],
        None,
    )
}

/// `R = S = (Z/27)[x]/(x^2 - 3x)` with the augmentation `x -> 0`.
pub fn wiles_lenstra_fixture() -> (AlgebraHom, AlgebraHom, AlgebraHom) {
    let r = catalog::monogenic(b(3, 3), &[0, -3]);
    let o = catalog::base_ring_algebra(b(3, 3));
    let aug = AlgebraHom::new(&r, &o, vec![vec![1], vec![0]]).expect("augmentation");
    (AlgebraHom::identity(&r), aug.clone(), aug)
}

/// Random local algebra over `Z/p^e` with an augmentation `x -> 0`.
fn random_augmented(rng: &mut ChaCha8Rng) -> (LocalAlgebra, AlgebraHom) {
    let p = [3u64, 5][rng.random_range(0..2)];
    let e = rng.random_range(1..=3);
    let base = b(p, e);
    let o = catalog::base_ring_algebra(base);
    loop {
        let deg = rng.random_range(1..=3);
        // x * g(x), g with coefficients in pO except the leading one
        let mut g: Vec<i64> = (0..deg - 1)
            .map(|_| (p * rng.random_range(0..p.pow(e))) as i64)
            .collect();
        g.push(1);
        // coefficients of x g(x) - x^deg, lowest first, then drop the constant
        let mut f = vec![0i64];
        f.extend(g.iter().take(deg - 1).copied());
        let coeffs: Vec<i64> = f.iter().map(|c| -c).collect();
        if let Ok(r) = catalog::try_monogenic(base, &coeffs) {
            let mut images = vec![vec![0]; r.rank()];
            images[0] = vec![1];
            if let Ok(aug) = AlgebraHom::new(&r, &o, images) {
                return (r, aug);
            }
        }
    }
}

/// Random element of the maximal ideal.
fn random_max(alg: &LocalAlgebra, rng: &mut ChaCha8Rng) -> Row {
    let b = alg.base();
    alg.max_ideal()
        .generators()
        .iter()
        .fold(alg.zero(), |acc, g| {
            alg.add(&acc, &alg.scale(g, rng.random_range(0..b.modulus())))
        })
}

/// `S = R/J` with `J` inside the augmentation ideal, and `pi_S`.
fn random_quotient(
    r: &LocalAlgebra,
    aug: &AlgebraHom,
    rng: &mut ChaCha8Rng,
) -> (AlgebraHom, AlgebraHom) {
    let k = aug.kernel();
    let gens: Vec<Row> = (0..rng.random_range(0..=2))
        .map(|_| {
            let x = random_max(r, rng);
            // project into ker(aug)
            r.sub(&x, &r.scalar(aug.apply(&x)[0]))
        })
        .filter(|x| k.contains(x))
        .collect();
    let j = Ideal::from_generators(r, &gens);
    let (s, q) = j.quotient_map().expect("proper ideal");
    let pi_s = factor_through(&q, aug).expect("J lies in the kernel");
    let _ = s;
    (q, pi_s)
}

/// The map `S -> T` with `f = g o q` for a surjection `q: R -> S`.
pub fn factor_through(q: &AlgebraHom, f: &AlgebraHom) -> Result<AlgebraHom, HomError> {
    let s = q.target();
    let images = (0..s.rank())
        .map(|k| {
            let pre = linalg::solve_left(
                s.base(),
                q.matrix(),
                s.rank(),
                &s.generator(k),
                s.relations(),
            )
            .ok_or(HomError::Shape)?;
            Ok(f.apply(&pre))
        })
        .collect::<Result<Vec<Row>, HomError>>()?;
    AlgebraHom::new(s, f.target(), images)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzCase {
    pub index: usize,
    pub r_rank: usize,
    pub p: u64,
    pub e: u32,
    pub criterion: CriterionReport,
    pub wiles_lenstra: WilesLenstraReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub seed: u64,
    pub count: usize,
    pub hypotheses_hold: usize,
    pub lenstra_applies: usize,
    pub violations: Vec<FuzzCase>,
}

/// Random `(R, S = R/J, pi)` triples; any implication violation is kept.
pub fn fuzz(seed: u64, count: usize) -> FuzzSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hypotheses_hold = 0;
    let mut lenstra_applies = 0;
    let mut violations = Vec::new();
    for index in 0..count {
        let (r, aug) = random_augmented(&mut rng);
        let (phi, pi_s) = random_quotient(&r, &aug, &mut rng);
        let pi = random_max(&r, &mut rng);
        let criterion = check_cri1(&phi, &pi).expect("quotient maps are surjective");
        let wiles_lenstra =
            wiles_lenstra_data(&phi, &aug, &pi_s).expect("commuting by construction");
        if criterion.outcome == Outcome::Consistent || criterion.outcome.violated() {
            hypotheses_hold += 1;
        }
        if wiles_lenstra.outcome == Outcome::Consistent || wiles_lenstra.outcome.violated() {
            lenstra_applies += 1;
        }
        if criterion.outcome.violated() || wiles_lenstra.outcome.violated() {
            violations.push(FuzzCase {
                index,
                r_rank: r.rank(),
                p: r.base().p(),
                e: r.base().e(),
                criterion,
                wiles_lenstra,
            });
        }
    }
    FuzzSummary {
        seed,
        count,
        hypotheses_hold,
        lenstra_applies,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_suite_is_consistent() {
        let fx = positive_fixtures();
        assert!(fx.len() >= 10);
        for f in fx {
            let rep = check_cri1(&f.phi, &f.pi).unwrap();
            assert_eq!(
                rep.outcome,
                Outcome::Consistent,
                "{}: {:?}",
                f.name,
                rep.failed()
            );
            assert!(rep.power_inequality, "{}", f.name);
        }
    }

    #[test]
    fn negative_suite_names_one_hypothesis() {
        for f in negative_fixtures() {
            let rep = check_cri1(&f.phi, &f.pi).unwrap();
            assert_eq!(rep.failed(), vec![f.violates.unwrap()], "{}", f.name);
            assert!(matches!(rep.outcome, Outcome::HypothesisFailure { .. }));
        }
        let rep = check_cri1(&delta_fixture().phi, &delta_fixture().pi).unwrap();
        assert_eq!(rep.failed(), vec![HYP_FIBRE, HYP_CYCLIC]);
        let f = fixture_x3x9();
        let rep = check_cri1(&f.phi, &f.pi).unwrap();
        assert_eq!(rep.failed(), vec![HYP_FIBRE, HYP_GROWTH]);
        assert!(!rep.bijective);
    }

    #[test]
    fn levels_for_z27() {
        let z27 = catalog::base_ring_algebra(b(3, 3));
        let rep = check_cri1(&AlgebraHom::identity(&z27), &[9]).unwrap();
        assert_eq!(rep.r, Some(2));
        assert_eq!(
            rep.levels[0],
            LevelData {
                n: 1,
                r_log: 2,
                s_log: 2
            }
        );
        assert_eq!(rep.levels[1].r_log, 3);
    }

    #[test]
    fn not_surjective_rejected() {
        let z9 = catalog::base_ring_algebra(b(3, 2));
        let dual = catalog::dual_numbers(b(3, 2));
        let inc = AlgebraHom::new(&z9, &dual, vec![vec![1, 0]]).unwrap();
        assert_eq!(check_cri1(&inc, &[3]), Err(CriterionError::NotSurjective));
        let bad = check_cri1_from_images(&dual, &z9, vec![vec![1], vec![1]], &[3, 0]);
        assert!(matches!(bad, Err(CriterionError::NotAlgebraHom(_))));
    }

    #[test]
    fn wiles_lenstra_numbers() {
        let (phi, pr, ps) = wiles_lenstra_fixture();
        let rep = wiles_lenstra_data(&phi, &pr, &ps).unwrap();
        assert_eq!((rep.phi_r_log, rep.eta_s_log), (1, 1));
        assert!(rep.ker_principal);
        assert_eq!(rep.outcome, Outcome::Consistent);
        // zero kernel
        let z27 = catalog::base_ring_algebra(b(3, 3));
        let id = AlgebraHom::identity(&z27);
        let rep = wiles_lenstra_data(&id, &id, &id).unwrap();
        assert_eq!((rep.phi_r_log, rep.eta_s_log), (0, 0));
        // non-commuting square
        let r = phi.source().clone();
        let o = pr.target().clone();
        let other = AlgebraHom::new(&r, &o, vec![vec![1], vec![3]]).unwrap();
        assert_eq!(
            wiles_lenstra_data(&phi, &pr, &other),
            Err(CriterionError::DiagramNotCommuting)
        );
    }

    #[test]
    fn cyclicity_checks() {
        let z9 = catalog::base_ring_algebra(b(3, 2));
        let rep = structure_surjectivity_check(&z9, &Ideal::from_generators(&z9, &[vec![3]]));
        assert_eq!((rep.cyclic, rep.level), (true, Some(1)));
        let dual = catalog::dual_numbers(b(3, 1));
        let rep = structure_surjectivity_check(&dual, &dual.zero_ideal());
        assert_eq!(rep.witness, Some(vec![0, 1]));
        // cyclic quotients stay cyclic under further quotients
        for i in crate::ring_core::all_ideals(&dual) {
            if structure_surjectivity_check(&dual, &i).cyclic {
                for j in crate::ring_core::all_ideals(&dual) {
                    if j.contains_ideal(&i) {
                        assert!(structure_surjectivity_check(&dual, &j).cyclic);
                    }
                }
            }
        }
    }

    #[test]
    fn trace_generation() {
        let dual = catalog::dual_numbers(b(3, 1));
        let g = catalog::symmetric3();
        let rep = trace_generation_check(&GroupRep::trivial(&g, &dual, 2));
        assert_eq!(rep.witness, Some(vec![0, 1]));
        let chi = GroupRep::character(&catalog::cyclic(3), &dual, vec![vec![1, 1]]).unwrap();
        assert!(trace_generation_check(&chi).generated);
    }

    #[test]
    fn fuzz_has_no_violations() {
        let s = fuzz(7, 400);
        assert!(s.violations.is_empty(), "{:?}", s.violations.first());
        assert!(s.hypotheses_hold > 0);
    }
}
