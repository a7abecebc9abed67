//! Seeded generators of two-dimensional representations whose reduction is
//! block upper triangular, used by demos, fuzzing and property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog;
use crate::cohomology::{GModule, DEFAULT_BUDGET};
use crate::group_rep::{FiniteGroup, GroupRep, Involution, RepError};
use crate::linalg::Row;
use crate::ring_core::{AlgebraHom, LocalAlgebra, Mat};
use crate::zmod::BaseRing;

#[derive(Clone, Debug)]
pub struct GmaInstance {
    pub label: String,
    pub rho: GroupRep,
    pub n1: usize,
    /// Involutions with `T o tau = T` fixing both residual block traces.
    pub involutions: Vec<Involution>,
    /// Whether the residual representation is a non-split extension.
    pub nonsplit: bool,
}

fn base(p: u64, e: u32) -> BaseRing {
    BaseRing::new(p, e).expect("odd prime")
}

fn mat(alg: &LocalAlgebra, m: [[i64; 2]; 2]) -> Mat {
    alg.mat_from_scalars(&m.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

/// The reflection representation of `S_3` over an algebra with `p = 3`,
/// in a basis where the sign line comes first.
pub fn s3_reflection(alg: &LocalAlgebra) -> GroupRep {
    let g = catalog::symmetric3();
    let rho = GroupRep::new(
        &g,
        alg,
        vec![mat(alg, [[0, -1], [1, -1]]), mat(alg, [[0, 1], [1, 0]])],
    )
    .expect("integral representation");
    rho.conjugate(&mat(alg, [[1, 0], [1, 1]]))
        .expect("unimodular")
}

/// `D_p` over `F_p` acting through a unipotent rotation; sign line first.
pub fn dihedral_residual(p: u64) -> GroupRep {
    let alg = catalog::base_ring_algebra(base(p, 1));
    let g = catalog::dihedral(p as usize);
    let rho = GroupRep::new(
        &g,
        &alg,
        vec![mat(&alg, [[0, -1], [1, 2]]), mat(&alg, [[0, 1], [1, 0]])],
    )
    .expect("dihedral representation");
    rho.conjugate(&mat(&alg, [[1, 0], [1, 1]]))
        .expect("unimodular")
}

/// `Z/p x| Z/q` over `F_p`: `a -> [[1, 1], [0, 1]]`, `b -> diag(u^{j+1}, u^j)`.
pub fn semidirect_residual(p: u64, q: usize, j: u32) -> Result<GroupRep, RepError> {
    let g = catalog::semidirect(p as usize, q)
        .map_err(|e| RepError::InvalidInvolution(e.to_string()))?;
    let alg = catalog::base_ring_algebra(base(p, 1));
    let fb = *alg.base();
    // recover the acting unit from the group table: b a b^-1 = a^u
    let (a, b) = (g.generators()[0], g.generators()[1]);
    let conj = g.mul(g.mul(b, a), g.inv(b));
    let u = (1..p)
        .find(|k| (0..*k).fold(g.identity(), |acc, _| g.mul(acc, a)) == conj)
        .expect("power of a");
    let lam = fb.pow(u, j as u64 + 1) as i64;
    let mu = fb.pow(u, j as u64) as i64;
    GroupRep::new(
        &g,
        &alg,
        vec![mat(&alg, [[1, 1], [0, 1]]), mat(&alg, [[lam, 0], [0, mu]])],
    )
}

/// `chi1 (+) chi2` for characters given by `+-1` on generators.
pub fn split_pair(
    group: &FiniteGroup,
    alg: &LocalAlgebra,
    chi1: &[i64],
    chi2: &[i64],
) -> Result<GroupRep, RepError> {
    let c = |v: &[i64]| {
        GroupRep::character(
            group,
            alg,
            v.iter()
                .map(|x| alg.scalar(alg.base().from_i64(*x)))
                .collect(),
        )
    };
    Ok(c(chi1)?.direct_sum(&c(chi2)?))
}

/// `rho'(g) = rho(g) + sum_i x_i c_i(g) rho(g)` in `M_n(alg)`, where `rho` is
/// over `Z/p^e` and each `x_i` squares into the kernel of the relevant terms.
pub fn perturb(
    rho: &GroupRep,
    alg: &LocalAlgebra,
    dirs: &[(Row, Vec<Mat>)],
) -> Result<GroupRep, RepError> {
    let src = rho.algebra();
    let sb = src.base();
    let n = rho.degree();
    let images = (0..rho.group().order())
        .map(|g| {
            let m = rho.image(g);
            let mut out = alg.mat_map(m, |x| alg.scalar(x[0]));
            for (x, c) in dirs {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 0;
                        for k in 0..n {
                            v = sb.add(v, sb.mul(sb.reduce(c[g][i][k][0]), m[k][j][0]));
                        }
                        out[i][j] = alg.add(&out[i][j], &alg.scale(x, v));
                    }
                }
            }
            out
        })
        .collect();
    GroupRep::from_all_images(rho.group(), alg, images)
}

/// A random cocycle of `ad rho` as matrices.
pub fn random_cocycle(rho: &GroupRep, rng: &mut ChaCha8Rng) -> Vec<Mat> {
    let ad = GModule::ad(rho);
    let z1 = ad.cocycles(DEFAULT_BUDGET).expect("small module");
    let b = *rho.algebra().base();
    let mut c = vec![0; ad.cochain_len()];
    for r in z1.rows() {
        let k = rng.random_range(0..b.modulus());
        crate::linalg::axpy(&b, &mut c, r, k);
    }
    ad.unflatten_cochain(&c)
}

/// Conjugation by a random matrix that is upper triangular modulo `m_A`.
pub fn scramble(rho: &GroupRep, n1: usize, rng: &mut ChaCha8Rng) -> GroupRep {
    let alg = rho.algebra();
    let n = rho.degree();
    let b = *alg.base();
    let m_gens = alg.max_ideal().generators();
    let random_elt = |rng: &mut ChaCha8Rng| -> Row {
        let mut v = alg.zero();
        for k in 0..alg.rank() {
            v[k] = rng.random_range(0..b.modulus());
        }
        alg.reduce(&v)
    };
    let random_m = |rng: &mut ChaCha8Rng| -> Row {
        m_gens.iter().fold(alg.zero(), |acc, g| {
            alg.add(&acc, &alg.scale(g, rng.random_range(0..b.modulus())))
        })
    };
    loop {
        let mut p = alg.mat_zero(n, n);
        for i in 0..n {
            for j in 0..n {
                let lower = i >= n1 && j < n1;
                p[i][j] = if lower {
                    random_m(rng)
                } else {
                    random_elt(rng)
                };
            }
        }
        if let Some(r) = rho.conjugate(&p) {
            return r;
        }
    }
}

/// Candidate involutions compatible with `T` and with both residual blocks.
pub fn compatible_involutions(rho: &GroupRep, n1: usize) -> Vec<Involution> {
    let g = rho.group();
    let alg = rho.algebra();
    let mut cands = vec![Involution::inverse(g)];
    for c in 0..g.order() {
        if let Ok(inv) = Involution::conjugate_inverse(g, c) {
            cands.push(inv);
        }
    }
    if rho.degree() == 2 {
        let vals: Vec<Row> = g
            .generators()
            .iter()
            .map(|s| {
                let m = rho.image(*s);
                let det = alg.sub(&alg.mul(&m[0][0], &m[1][1]), &alg.mul(&m[0][1], &m[1][0]));
                alg.inv(&det).expect("invertible")
            })
            .collect();
        if let Ok(chi) = GroupRep::character(g, alg, vals) {
            if let Ok(inv) = Involution::twisted(&chi) {
                cands.push(inv);
            }
        }
    }
    let t = rho.traces();
    let shape = match crate::pseudochar::ResidualShape::new(rho, n1) {
        Ok(s) => s,
        Err(_) => return vec![],
    };
    let [t1, t2] = shape.block_traces();
    let m = alg.max_ideal();
    cands
        .into_iter()
        .filter(|inv| {
            let fixed = |vals: &[Row]| {
                (0..g.order()).all(|x| {
                    let v = &vals[inv.sigma(x)];
                    let tv = inv
                        .twist(x)
                        .map(|tw| alg.mul(tw, v))
                        .unwrap_or_else(|| v.clone());
                    m.contains(&alg.sub(&tv, &vals[x]))
                })
            };
            inv.check_self_dual(alg, &t) && fixed(&t1) && fixed(&t2)
        })
        .collect()
}

fn finish(label: String, rho: GroupRep, nonsplit: bool) -> GmaInstance {
    let involutions = compatible_involutions(&rho, 1);
    GmaInstance {
        label,
        rho,
        n1: 1,
        involutions,
        nonsplit,
    }
}

/// Coefficient algebras for a prime: `F_p`, `Z/p^2`, `F_p[eps]`, `Z/p^2[d]/(d^2, p d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraKind {
    Field,
    Truncated,
    Dual,
    Delta,
}

impl AlgebraKind {
    pub const ALL: [AlgebraKind; 4] = [
        AlgebraKind::Field,
        AlgebraKind::Truncated,
        AlgebraKind::Dual,
        AlgebraKind::Delta,
    ];

    pub fn build(self, p: u64) -> LocalAlgebra {
        match self {
            AlgebraKind::Field => catalog::base_ring_algebra(base(p, 1)),
            AlgebraKind::Truncated => catalog::base_ring_algebra(base(p, 2)),
            AlgebraKind::Dual => catalog::dual_numbers(base(p, 1)),
            AlgebraKind::Delta => catalog::delta_algebra(base(p, 2)),
        }
    }

    pub fn name(self, p: u64) -> String {
        match self {
            AlgebraKind::Field => format!("F{p}"),
            AlgebraKind::Truncated => format!("Z/{p}^2"),
            AlgebraKind::Dual => format!("F{p}[eps]"),
            AlgebraKind::Delta => format!("Z/{p}^2[d]"),
        }
    }
}

/// Deforms a residual representation `rho0` over `F_p` (or its integral lift
/// `lift` over `Z/p^2`) to the requested algebra along random cocycles.
fn deform_to(
    rho0: &GroupRep,
    lift: Option<&GroupRep>,
    kind: AlgebraKind,
    rng: &mut ChaCha8Rng,
) -> Option<GroupRep> {
    let p = rho0.algebra().base().p();
    let alg = kind.build(p);
    match kind {
        AlgebraKind::Field => Some(rho0.clone()),
        AlgebraKind::Dual => {
            perturb(rho0, &alg, &[(alg.generator(1), random_cocycle(rho0, rng))]).ok()
        }
        AlgebraKind::Truncated => {
            let lift = lift?;
            perturb(lift, &alg, &[(alg.scalar(p), random_cocycle(rho0, rng))]).ok()
        }
        AlgebraKind::Delta => {
            let lift = lift?;
            let dirs = [
                (alg.scalar(p), random_cocycle(rho0, rng)),
                (alg.generator(1), random_cocycle(rho0, rng)),
            ];
            perturb(lift, &alg, &dirs).ok()
        }
    }
}

/// One random instance; `None` when the drawn family has no lift to the
/// drawn algebra.
pub fn random_instance(rng: &mut ChaCha8Rng) -> Option<GmaInstance> {
    let kind = AlgebraKind::ALL[rng.random_range(0..4)];
    let family = rng.random_range(0..6);
    let (label, rho, nonsplit) = match family {
        0 | 1 => {
            let r0 = s3_reflection(&catalog::base_ring_algebra(base(3, 1)));
            let lift = s3_reflection(&catalog::base_ring_algebra(base(3, 2)));
            (
                format!("S3/{}", kind.name(3)),
                deform_to(&r0, Some(&lift), kind, rng)?,
                true,
            )
        }
        2 => (
            format!("D5/{}", kind.name(5)),
            deform_to(&dihedral_residual(5), None, kind, rng)?,
            true,
        ),
        3 => {
            let (p, q) = if rng.random_bool(0.5) { (5, 4) } else { (7, 3) };
            let j = rng.random_range(0..q as u32);
            let r0 = semidirect_residual(p, q, j).ok()?;
            (
                format!("Z/{p}x|Z/{q}[{j}]/{}", kind.name(p)),
                deform_to(&r0, None, kind, rng)?,
                true,
            )
        }
        _ => {
            let p = [3u64, 5, 7][rng.random_range(0..3)];
            let (g, name) = if family == 4 {
                (catalog::dihedral(4), "D4")
            } else {
                (catalog::quaternion(), "Q8")
            };
            let signs = [[1, 1], [1, -1], [-1, 1], [-1, -1]];
            let i = rng.random_range(0..4);
            let j = (i + rng.random_range(1..4)) % 4;
            let f = catalog::base_ring_algebra(base(p, 1));
            let z = catalog::base_ring_algebra(base(p, 2));
            let r0 = split_pair(&g, &f, &signs[i], &signs[j]).ok()?;
            let lift = split_pair(&g, &z, &signs[i], &signs[j]).ok()?;
            (
                format!("{name}/{}", kind.name(p)),
                deform_to(&r0, Some(&lift), kind, rng)?,
                false,
            )
        }
    };
    let rho = scramble(&rho, 1, rng);
    Some(finish(label, rho, nonsplit))
}

/// `count` instances from a seed, skipping draws without a lift.
pub fn sample(seed: u64, count: usize) -> Vec<GmaInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if let Some(inst) = random_instance(&mut rng) {
            out.push(inst);
        }
    }
    out
}

/// Non-split residual representations with distinct one-dimensional blocks,
/// over prime fields and their quadratic extensions, randomly conjugated.
pub fn nonsplit_residuals(seed: u64, count: usize) -> Vec<GmaInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base_reps: Vec<(String, GroupRep)> = vec![
        (
            "S3/F3".into(),
            s3_reflection(&catalog::base_ring_algebra(base(3, 1))),
        ),
        ("D5/F5".into(), dihedral_residual(5)),
    ];
    for j in 0..4 {
        base_reps.push((
            format!("Z/5x|Z/4[{j}]/F5"),
            semidirect_residual(5, 4, j).expect("valid"),
        ));
    }
    for j in 0..3 {
        base_reps.push((
            format!("Z/7x|Z/3[{j}]/F7"),
            semidirect_residual(7, 3, j).expect("valid"),
        ));
    }
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < count {
        let (name, r) = &base_reps[k % base_reps.len()];
        let p = r.algebra().base().p();
        let (label, rho) = if (k / base_reps.len()) % 2 == 1 {
            let f2 = catalog::finite_field(p, 2).expect("prime");
            let hom =
                AlgebraHom::new(r.algebra(), &f2, vec![f2.one()]).expect("prime field embeds");
            (format!("{name}->F{p}^2"), r.base_change(&hom))
        } else {
            (name.clone(), r.clone())
        };
        let rho = scramble(&rho, 1, &mut rng);
        out.push(finish(label, rho, true));
        k += 1;
    }
    out
}

/// A random finite `G`-module over `Z/p^3`: a sum of rank-one pieces
/// `Z/p^t` for a cyclic group, or the reflection representation of `S_3`
/// and its sign twist. With `trivial_h0`, every piece has `H^0 = 0`.
pub fn random_torsion_module(rng: &mut ChaCha8Rng, trivial_h0: bool) -> (String, GModule) {
    let p = [3u64, 5, 7][rng.random_range(0..3)];
    let b = base(p, 3);
    if p == 3 && rng.random_bool(0.25) {
        let alg = catalog::base_ring_algebra(b);
        let refl = s3_reflection(&alg);
        let sign = GroupRep::character(
            refl.group(),
            &alg,
            vec![alg.scalar(1), alg.scalar(b.from_i64(-1))],
        )
        .expect("sign");
        let twisted = rng.random_bool(0.5);
        let rho = if twisted {
            tensor_character(&refl, &sign)
        } else {
            refl
        };
        let label = if twisted {
            "S3 reflection x sign / Z/27"
        } else {
            "S3 reflection / Z/27"
        };
        return (label.into(), GModule::from_rep(&rho));
    }
    let orders: &[usize] = match p {
        3 => &[2, 3, 6],
        5 => &[2, 4, 5, 10],
        _ => &[2, 3, 6, 7],
    };
    let m = loop {
        let m = orders[rng.random_range(0..orders.len())];
        if !trivial_h0 || !m.is_multiple_of(p as usize) || m > p as usize {
            break m;
        }
    };
    let units: Vec<u64> = (1..b.modulus())
        .filter(|u| b.is_unit(*u) && b.pow(*u, m as u64) == 1)
        .filter(|u| !trivial_h0 || (u % p) != 1)
        .collect();
    let k = rng.random_range(1..=3);
    let torsion: Vec<u32> = (0..k).map(|_| rng.random_range(1..=3)).collect();
    let us: Vec<u64> = (0..k)
        .map(|_| units[rng.random_range(0..units.len())])
        .collect();
    let mat: Vec<Row> = (0..k)
        .map(|i| (0..k).map(|j| if i == j { us[i] } else { 0 }).collect())
        .collect();
    let g = catalog::cyclic(m);
    let w = GModule::new(&g, b, torsion.clone(), &[mat]).expect("diagonal action");
    (format!("Z/{m} on (+)Z/{p}^{torsion:?} by {us:?}"), w)
}

/// `count` torsion modules from a seed, alternating the `H^0 = 0` request.
pub fn torsion_sample(seed: u64, count: usize) -> Vec<(String, GModule)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| random_torsion_module(&mut rng, i % 2 == 0))
        .collect()
}

fn tensor_character(rho: &GroupRep, chi: &GroupRep) -> GroupRep {
    let alg = rho.algebra();
    let images = (0..rho.group().order())
        .map(|g| alg.mat_scale(rho.image(g), &chi.image(g)[0][0]))
        .collect();
    GroupRep::from_all_images(rho.group(), alg, images).expect("twist of a representation")
}

fn first_irreducible(rho0: &GroupRep, lift: &GroupRep, alg: &LocalAlgebra, dir: Row) -> GroupRep {
    let ad = GModule::ad(rho0);
    let z1 = ad.cocycles(DEFAULT_BUDGET).expect("small module");
    z1.elements()
        .iter()
        .filter_map(|r| perturb(lift, alg, &[(dir.clone(), ad.unflatten_cochain(r))]).ok())
        .find(|rho| {
            !crate::pseudochar::analyze(rho, 1, None).is_ok_and(|a| a.reducibility.is_zero())
        })
        .expect("a deformation with nonzero reducibility ideal")
}

/// A deformation of the `D_5` residual representation to `F_5[eps]` whose
/// reducibility ideal is `(eps)`.
pub fn d5_deformation() -> GroupRep {
    let rho0 = dihedral_residual(5);
    let dual = catalog::dual_numbers(*rho0.algebra().base());
    first_irreducible(&rho0, &rho0, &dual, dual.generator(1))
}

/// A deformation of the `S_3` reflection representation to `Z/9` whose
/// reducibility ideal is `(3)`.
pub fn s3_over_z9() -> GroupRep {
    let rho0 = s3_reflection(&catalog::base_ring_algebra(base(3, 1)));
    let z9 = catalog::base_ring_algebra(base(3, 2));
    let lift = s3_reflection(&z9);
    first_irreducible(&rho0, &lift, &z9, z9.scalar(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pseudochar::analyze;
    use crate::ring_core::Ideal;

    #[test]
    fn named_deformations() {
        let rho = s3_over_z9();
        let z9 = rho.algebra().clone();
        let an = analyze(&rho, 1, Some(&Involution::inverse(rho.group()))).unwrap();
        assert_eq!(
            an.reducibility,
            Ideal::from_generators(&z9, &[z9.scalar(3)])
        );
        assert!(an.certificate.unwrap().matches_reducibility_ideal);
        let rho = d5_deformation();
        let an = analyze(&rho, 1, None).unwrap();
        assert_eq!(an.reducibility, rho.algebra().max_ideal());
    }

    #[test]
    fn torsion_modules_are_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let (la, wa) = random_torsion_module(&mut a, true);
            let (lb, wb) = random_torsion_module(&mut b, true);
            assert_eq!(la, lb);
            assert_eq!(wa.torsion(), wb.torsion());
            assert_eq!(wa.base().e(), 3);
        }
    }
}
