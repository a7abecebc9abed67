//! Scenario files: TOML documents describing one pipeline run.

use serde::Deserialize;
use thiserror::Error;

use rtlab::catalog;
use rtlab::cohomology::{GModule, LocalCondition, TamagawaDeclaration};
use rtlab::group_rep::{FiniteGroup, GroupRep, Involution, InvolutionKind};
use rtlab::linalg::Row;
use rtlab::ring_core::{AlgebraHom, Ideal, LocalAlgebra, Mat};
use rtlab::BaseRing;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{section}: {message}")]
    Schema { section: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

fn schema(section: &str, message: impl ToString) -> ScenarioError {
    ScenarioError::Schema {
        section: section.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gma,
    Cohomology,
    Tangent,
    Criterion,
    Cons1Skeleton,
    Demo,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub base: Option<BaseDecl>,
    #[serde(default)]
    pub algebra: Option<AlgebraDecl>,
    #[serde(default)]
    pub group: Option<GroupDecl>,
    #[serde(default)]
    pub rep: Option<RepDecl>,
    #[serde(default)]
    pub involution: Option<InvolutionKind>,
    #[serde(default)]
    pub module: Option<ModuleDecl>,
    #[serde(default)]
    pub conditions: Vec<LocalCondition>,
    #[serde(default)]
    pub tamagawa: Vec<TamagawaDeclaration>,
    #[serde(default)]
    pub functoriality: Vec<u32>,
    #[serde(default)]
    pub criterion: Option<CriterionDecl>,
    #[serde(default)]
    pub demo: Option<String>,
    /// Expected report values, keyed by dotted paths into the report.
    #[serde(default)]
    pub expect: toml::Table,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseDecl {
    pub p: u64,
    pub e: u32,
}

/// Either a catalog entry or explicit structure constants.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDecl {
    #[serde(default)]
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Vec<i64>,
    #[serde(default)]
    pub torsion: Option<Vec<u32>>,
    #[serde(default)]
    pub structure: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default)]
    pub unit: Option<Vec<i64>>,
    #[serde(default)]
    pub base: Option<BaseDecl>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDecl {
    #[serde(default)]
    pub catalog: Option<String>,
    #[serde(default)]
    pub params: Vec<usize>,
    #[serde(default)]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub generators: Option<Vec<usize>>,
}

/// A matrix entry: an integer scalar or a coordinate vector.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Scalar(i64),
    Coords(Vec<i64>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepDecl {
    /// One matrix per group generator.
    pub images: Vec<Vec<Vec<Entry>>>,
    #[serde(default = "one")]
    pub n1: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", tag = "from", deny_unknown_fields)]
pub enum ModuleDecl {
    /// The representation itself as a module over `Z/p^e`.
    Rep,
    /// The adjoint module of the representation.
    Ad,
    /// Explicit torsion exponents and generator matrices.
    Explicit {
        torsion: Vec<u32>,
        images: Vec<Vec<Vec<i64>>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionDecl {
    pub source: AlgebraDecl,
    pub target: AlgebraDecl,
    /// Images of the source basis, as target coordinates.
    pub images: Vec<Vec<i64>>,
    pub pi: Vec<i64>,
    /// Images of the source basis in `O`, for Wiles-Lenstra data.
    #[serde(default)]
    pub augmentation: Option<Vec<i64>>,
    /// Generators of the ideal `I` of the source, for the cyclicity check.
    #[serde(default)]
    pub ideal: Vec<Vec<i64>>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    toml::from_str::<Scenario>(text).map_err(|e| ScenarioError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })
}

pub fn load(path: &str) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.into(),
        message: e.to_string(),
    })?;
    parse(&text)
}

fn base_ring(decl: Option<BaseDecl>, section: &str) -> Result<BaseRing, ScenarioError> {
    let b = decl.ok_or_else(|| schema(section, "missing base ring"))?;
    BaseRing::new(b.p, b.e).map_err(|e| schema(section, e))
}

pub fn build_algebra(
    decl: Option<&AlgebraDecl>,
    base: Option<BaseDecl>,
    section: &str,
) -> Result<LocalAlgebra, ScenarioError> {
    let Some(decl) = decl else {
        return Ok(catalog::base_ring_algebra(base_ring(base, section)?));
    };
    if decl.catalog.is_some() && decl.structure.is_some() {
        return Err(schema(
            section,
            "give either a catalog name or structure constants",
        ));
    }
    if let Some(name) = &decl.catalog {
        let param = |i: usize| decl.params.get(i).copied();
        let need = |i: usize| {
            param(i).ok_or_else(|| schema(section, format!("{name} needs {} parameter(s)", i + 1)))
        };
        if name == "finite_field" {
            let p = need(0)? as u64;
            let f = need(1)? as usize;
            return catalog::finite_field(p, f).map_err(|e| schema(section, e));
        }
        let b = base_ring(decl.base.or(base), section)?;
        return Ok(match name.as_str() {
            "base" => catalog::base_ring_algebra(b),
            "dual_numbers" => catalog::dual_numbers(b),
            "delta" => catalog::delta_algebra(b),
            "truncated" => catalog::truncated_polynomial(b, need(0)? as usize),
            "square_zero" => catalog::square_zero(b, need(0)? as usize),
            "monogenic" => {
                catalog::try_monogenic(b, &decl.params).map_err(|e| schema(section, e))?
            }
            other => return Err(schema(section, format!("unknown algebra {other:?}"))),
        });
    }
    let b = base_ring(decl.base.or(base), section)?;
    let structure = decl
        .structure
        .as_ref()
        .ok_or_else(|| schema(section, "missing structure constants"))?;
    let unit = decl
        .unit
        .as_ref()
        .ok_or_else(|| schema(section, "missing unit"))?;
    let st = structure
        .iter()
        .map(|r| {
            r.iter()
                .map(|v| v.iter().map(|x| b.from_i64(*x)).collect())
                .collect()
        })
        .collect();
    let unit = unit.iter().map(|x| b.from_i64(*x)).collect();
    LocalAlgebra::new(b, decl.torsion.clone(), st, unit).map_err(|e| schema(section, e))
}

pub fn build_group(decl: Option<&GroupDecl>) -> Result<FiniteGroup, ScenarioError> {
    let decl = decl.ok_or_else(|| schema("group", "missing group"))?;
    let mut g = if let Some(table) = &decl.table {
        FiniteGroup::from_table(table.clone(), None).map_err(|e| schema("group", e))?
    } else {
        let name = decl
            .catalog
            .as_deref()
            .ok_or_else(|| schema("group", "give a catalog name or a table"))?;
        let need = |i: usize| {
            decl.params
                .get(i)
                .copied()
                .ok_or_else(|| schema("group", format!("{name} needs {} parameter(s)", i + 1)))
        };
        match name {
            "cyclic" => catalog::cyclic(need(0)?),
            "dihedral" => catalog::dihedral(need(0)?),
            "symmetric3" => catalog::symmetric3(),
            "quaternion" => catalog::quaternion(),
            "sl2_f3" => catalog::sl2_f3(),
            "semidirect" => {
                catalog::semidirect(need(0)?, need(1)?).map_err(|e| schema("group", e))?
            }
            other => return Err(schema("group", format!("unknown group {other:?}"))),
        }
    };
    if let Some(gens) = &decl.generators {
        if gens.iter().any(|x| *x >= g.order()) {
            return Err(schema("group", "generator index out of range"));
        }
        g.set_generators(gens.clone());
    }
    Ok(g)
}

fn entry(alg: &LocalAlgebra, e: &Entry) -> Result<Row, ScenarioError> {
    match e {
        Entry::Scalar(x) => Ok(alg.scalar(alg.base().from_i64(*x))),
        Entry::Coords(v) if v.len() == alg.rank() => Ok(alg.from_i64s(v)),
        Entry::Coords(v) => Err(schema(
            "rep",
            format!(
                "entry has {} coordinates, algebra rank is {}",
                v.len(),
                alg.rank()
            ),
        )),
    }
}

pub fn build_rep(
    decl: &RepDecl,
    group: &FiniteGroup,
    alg: &LocalAlgebra,
) -> Result<GroupRep, ScenarioError> {
    if decl.images.len() != group.generators().len() {
        return Err(schema(
            "rep",
            format!(
                "{} generator images for {} generators",
                decl.images.len(),
                group.generators().len()
            ),
        ));
    }
    let mats: Vec<Mat> = decl
        .images
        .iter()
        .map(|m| {
            m.iter()
                .map(|r| r.iter().map(|e| entry(alg, e)).collect())
                .collect::<Result<Mat, _>>()
        })
        .collect::<Result<_, _>>()?;
    let n = mats.first().map_or(0, |m| m.len());
    if mats
        .iter()
        .any(|m| m.len() != n || m.iter().any(|r| r.len() != n))
    {
        return Err(schema("rep", "generator images must be square of one size"));
    }
    GroupRep::new(group, alg, mats).map_err(|e| schema("rep", e))
}

/// The parts of a scenario shared by the representation pipelines.
pub struct RepContext {
    pub group: FiniteGroup,
    pub algebra: LocalAlgebra,
    pub rho: Option<GroupRep>,
    pub n1: usize,
    pub involution: Option<Involution>,
}

pub fn build_context(s: &Scenario) -> Result<RepContext, ScenarioError> {
    let group = build_group(s.group.as_ref())?;
    let algebra = build_algebra(s.algebra.as_ref(), s.base, "algebra")?;
    let (rho, n1) = match &s.rep {
        Some(r) => (Some(build_rep(r, &group, &algebra)?), r.n1),
        None => (None, 1),
    };
    if let Some(r) = &rho {
        if n1 == 0 || n1 >= r.degree() {
            return Err(schema(
                "rep",
                format!("n1 = {n1} must split degree {}", r.degree()),
            ));
        }
    }
    let involution = match &s.involution {
        Some(k) => {
            Some(Involution::from_kind(&group, &algebra, k).map_err(|e| schema("involution", e))?)
        }
        None => None,
    };
    Ok(RepContext {
        group,
        algebra,
        rho,
        n1,
        involution,
    })
}

pub fn build_module(s: &Scenario, ctx: &RepContext) -> Result<GModule, ScenarioError> {
    let rho = || {
        ctx.rho
            .as_ref()
            .ok_or_else(|| schema("module", "needs a [rep] section"))
    };
    match s.module.as_ref().unwrap_or(&ModuleDecl::Rep) {
        ModuleDecl::Rep => Ok(GModule::from_rep(rho()?)),
        ModuleDecl::Ad => Ok(GModule::ad(rho()?)),
        ModuleDecl::Explicit { torsion, images } => {
            let b = *ctx.algebra.base();
            let mats: Vec<Vec<Row>> = images
                .iter()
                .map(|m| {
                    m.iter()
                        .map(|r| r.iter().map(|x| b.from_i64(*x)).collect())
                        .collect()
                })
                .collect();
            GModule::new(&ctx.group, b, torsion.clone(), &mats).map_err(|e| schema("module", e))
        }
    }
}

pub struct CriterionContext {
    pub phi: AlgebraHom,
    pub pi: Row,
    pub augmentation: Option<(AlgebraHom, AlgebraHom)>,
    pub ideal: Ideal,
}

pub fn build_criterion(s: &Scenario) -> Result<CriterionContext, ScenarioError> {
    let c = s
        .criterion
        .as_ref()
        .ok_or_else(|| schema("criterion", "missing [criterion] section"))?;
    let r = build_algebra(Some(&c.source), s.base, "criterion.source")?;
    let t = build_algebra(Some(&c.target), s.base, "criterion.target")?;
    let coords = |alg: &LocalAlgebra, v: &[i64], what: &str| -> Result<Row, ScenarioError> {
        if v.len() != alg.rank() {
            return Err(schema(
                "criterion",
                format!("{what} has {} coordinates, rank is {}", v.len(), alg.rank()),
            ));
        }
        Ok(alg.from_i64s(v))
    };
    let images = c
        .images
        .iter()
        .map(|v| coords(&t, v, "image"))
        .collect::<Result<Vec<_>, _>>()?;
    let phi = AlgebraHom::new(&r, &t, images).map_err(|e| schema("criterion", e))?;
    let pi = coords(&r, &c.pi, "pi")?;
    let augmentation = match &c.augmentation {
        Some(aug) => {
            let o = catalog::base_ring_algebra(*r.base());
            let images = aug
                .iter()
                .map(|x| o.scalar(o.base().from_i64(*x)))
                .collect();
            let pi_r =
                AlgebraHom::new(&r, &o, images).map_err(|e| schema("criterion.augmentation", e))?;
            let pi_s = rtlab::criterion::factor_through(&phi, &pi_r)
                .map_err(|e| schema("criterion.augmentation", e))?;
            Some((pi_r, pi_s))
        }
        None => None,
    };
    let gens = c
        .ideal
        .iter()
        .map(|v| coords(&r, v, "ideal generator"))
        .collect::<Result<Vec<_>, _>>()?;
    let ideal = Ideal::from_generators(&r, &gens);
    Ok(CriterionContext {
        phi,
        pi,
        augmentation,
        ideal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse("kind = \"gma\"\n\n[base]\np = \"three\"\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 4, .. }), "{err}");
        let err = parse("kind = \"gma\"\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err}");
        let err = parse("kind = \"nonsense\"\n").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn builds_s3_reflection() {
        let s = parse(
            "kind = \"gma\"\n[base]\np = 3\ne = 1\n[group]\ncatalog = \"symmetric3\"\n[rep]\nimages = [[[1, 0], [0, 1]], [[1, 0], [0, 1]]]\n",
        )
        .unwrap();
        let ctx = build_context(&s).unwrap();
        assert_eq!(ctx.rho.unwrap().degree(), 2);
        let s =
            parse("kind = \"gma\"\n[base]\np = 3\ne = 1\n[group]\ncatalog = \"cyclic\"\n").unwrap();
        assert!(build_context(&s).is_err());
    }
}
