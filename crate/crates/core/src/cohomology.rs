//! `H^0` and `H^1` of finite groups with coefficients in finite `Z/p^e`-modules,
//! Selmer subgroups, torsion functoriality and tangent spaces.
//!
//! Modules are `(+) Z/p^{t_i}` with the group acting on row vectors from the
//! right: `g.v = v * A_g`. Cochains are stored on every group element, with
//! coordinate `g * m + i`.

use crate::group_rep::{self, FiniteGroup, GroupRep};
use crate::linalg::{self, Row, Span, SubquotientPresentation};
use crate::ring_core::{LocalAlgebra, Mat};
use crate::zmod::BaseRing;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// Default cap on `|G| * rank(M)` for cocycle systems.
pub const DEFAULT_BUDGET: usize = 8192;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomologyError {
    #[error("cocycle system of size {size} exceeds the budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("invalid local condition: {0}")]
    InvalidCondition(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct HomShape {
    alg: LocalAlgebra,
    rows: usize,
    cols: usize,
}

/// A finite module with a group action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    group: FiniteGroup,
    base: BaseRing,
    torsion: Vec<u32>,
    rel: Span,
    act: Vec<Vec<Row>>,
    shape: Option<HomShape>,
}

/// Cocycles, coboundaries and the invariants of `H^1`.
#[derive(Clone, Debug)]
pub struct CocycleSpace {
    pub z1: Span,
    pub b1: Span,
    /// Exponents `k_i` with `H^1 = (+) Z/p^{k_i}`, ascending.
    pub invariants: Vec<u32>,
    pub log_order: u32,
    /// Cocycle representatives of generators of `H^1`.
    pub basis: Vec<Row>,
}

impl CocycleSpace {
    fn from_spans(z1: Span, b1: Span) -> CocycleSpace {
        let sq = SubquotientPresentation::new(&z1, &b1);
        let mut invariants = sq.exps().to_vec();
        invariants.sort();
        CocycleSpace {
            log_order: sq.log_order(),
            basis: sq.generators(),
            invariants,
            z1,
            b1,
        }
    }

    /// Dimension over a residue field of degree `f`, for modules killed by `p`.
    pub fn dimension(&self, f: u32) -> u32 {
        self.log_order / f
    }
}

impl GModule {
    /// `images` are generator matrices in the usual column convention:
    /// `(g.v)_i = sum_j images[g][i][j] v_j`.
    pub fn new(
        group: &FiniteGroup,
        base: BaseRing,
        torsion: Vec<u32>,
        images: &[Vec<Row>],
    ) -> Result<GModule, CohomologyError> {
        let m = torsion.len();
        if images.len() != group.generators().len() {
            return Err(CohomologyError::InvalidModule(
                "one matrix per generator expected".into(),
            ));
        }
        let gen_act: Vec<Vec<Row>> = images
            .iter()
            .map(|a| {
                (0..m)
                    .map(|i| (0..m).map(|j| base.reduce(a[j][i])).collect())
                    .collect()
            })
            .collect();
        GModule::from_row_generators(group, base, torsion, gen_act, None)
    }

    fn from_row_generators(
        group: &FiniteGroup,
        base: BaseRing,
        torsion: Vec<u32>,
        gen_act: Vec<Vec<Row>>,
        shape: Option<HomShape>,
    ) -> Result<GModule, CohomologyError> {
        let m = torsion.len();
        let rel = Span::torsion(&base, &torsion);
        let (order, parent) = group.spanning_tree();
        let mut act: Vec<Vec<Row>> = vec![vec![]; group.order()];
        act[group.identity()] = linalg::identity(m);
        for g in order.iter().skip(1) {
            let (h, k) = parent[*g].expect("tree");
            // (h s).v = h.(s.v) = (v A_s) A_h
            act[*g] = linalg::mat_mul(&base, &gen_act[k], &act[h], m);
        }
        for a in act.iter_mut() {
            for r in a.iter_mut() {
                *r = rel.reduce(r);
            }
        }
        let module = GModule {
            group: group.clone(),
            base,
            torsion,
            rel,
            act,
            shape,
        };
        module.validate()?;
        Ok(module)
    }

    fn validate(&self) -> Result<(), CohomologyError> {
        let m = self.rank();
        for (i, t) in self.torsion.iter().enumerate() {
            for g in self.group.generators() {
                let v = linalg::scale(&self.base, &self.act[*g][i], self.base.p_pow(*t));
                if !self.rel.contains(&v) {
                    return Err(CohomologyError::InvalidModule(format!(
                        "action does not preserve the torsion of coordinate {i}"
                    )));
                }
            }
        }
        for g in self.group.generators() {
            let ker = linalg::left_kernel(&self.base, &self.act[*g], m, &self.rel);
            if !self.rel.contains_span(&ker) {
                return Err(CohomologyError::InvalidModule(format!(
                    "element {g} acts non-invertibly"
                )));
            }
        }
        let n = self.group.order();
        for g in 0..n {
            for h in 0..n {
                let gh = self.group.mul(g, h);
                for i in 0..m {
                    let lhs = self.rel.reduce(&self.act[gh][i]);
                    let rhs = self.apply(g, &self.apply(h, &linalg::unit_vector(m, i)));
                    if lhs != rhs {
                        return Err(CohomologyError::InvalidModule(format!(
                            "action is not a homomorphism at ({g},{h})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `A^n` with the action of `rho`.
    pub fn from_rep(rho: &GroupRep) -> GModule {
        let alg = rho.algebra();
        let n = rho.degree();
        let d = alg.rank();
        let gens: Vec<Vec<Row>> = rho
            .group()
            .generators()
            .iter()
            .map(|g| {
                let img = rho.image(*g);
                let mut rows = Vec::with_capacity(n * d);
                for j in 0..n {
                    for k in 0..d {
                        let mut col = alg.mat_zero(n, 1);
                        col[j][0] = alg.generator(k);
                        rows.push(group_rep::flatten(&alg.mat_mul(img, &col)));
                    }
                }
                rows
            })
            .collect();
        let torsion = (0..n).flat_map(|_| alg.torsion().iter().copied()).collect();
        let shape = HomShape {
            alg: alg.clone(),
            rows: n,
            cols: 1,
        };
        GModule::from_row_generators(rho.group(), *alg.base(), torsion, gens, Some(shape))
            .expect("valid representation")
    }

    /// `Hom_A(rho2, rho1) = M_{n1 x n2}(A)` with `g.phi = rho1(g) phi rho2(g)^{-1}`.
    pub fn hom(rho2: &GroupRep, rho1: &GroupRep) -> GModule {
        assert_eq!(rho1.algebra(), rho2.algebra());
        assert_eq!(rho1.group(), rho2.group());
        let alg = rho1.algebra();
        let group = rho1.group();
        let (n1, n2) = (rho1.degree(), rho2.degree());
        let d = alg.rank();
        let gens: Vec<Vec<Row>> = group
            .generators()
            .iter()
            .map(|g| {
                let inv2 = rho2.image(group.inv(*g));
                let mut rows = Vec::with_capacity(n1 * n2 * d);
                for i in 0..n1 {
                    for j in 0..n2 {
                        for k in 0..d {
                            let mut phi = alg.mat_zero(n1, n2);
                            phi[i][j] = alg.generator(k);
                            let img = alg.mat_mul(&alg.mat_mul(rho1.image(*g), &phi), inv2);
                            rows.push(group_rep::flatten(&img));
                        }
                    }
                }
                rows
            })
            .collect();
        let torsion = (0..n1 * n2)
            .flat_map(|_| alg.torsion().iter().copied())
            .collect();
        let shape = HomShape {
            alg: alg.clone(),
            rows: n1,
            cols: n2,
        };
        GModule::from_row_generators(group, *alg.base(), torsion, gens, Some(shape))
            .expect("valid hom module")
    }

    pub fn ad(rho: &GroupRep) -> GModule {
        GModule::hom(rho, rho)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn base(&self) -> &BaseRing {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.torsion.len()
    }

    pub fn torsion(&self) -> &[u32] {
        &self.torsion
    }

    pub fn relations(&self) -> &Span {
        &self.rel
    }

    pub fn log_order(&self) -> u32 {
        self.torsion.iter().sum()
    }

    /// Row-convention matrix of `g`.
    pub fn action(&self, g: usize) -> &[Row] {
        &self.act[g]
    }

    pub fn apply(&self, g: usize, v: &[u64]) -> Row {
        self.rel
            .reduce(&linalg::vec_mat(&self.base, v, &self.act[g], self.rank()))
    }

    pub fn full_span(&self) -> Span {
        Span::full(&self.base, self.rank())
    }

    pub fn elements(&self) -> Vec<Row> {
        let set: BTreeSet<Row> = self
            .full_span()
            .elements()
            .iter()
            .map(|v| self.rel.reduce(v))
            .collect();
        set.into_iter().collect()
    }

    fn cochain_relations(&self) -> Span {
        let t: Vec<u32> = (0..self.group.order())
            .flat_map(|_| self.torsion.iter().copied())
            .collect();
        Span::torsion(&self.base, &t)
    }

    pub fn cochain_len(&self) -> usize {
        self.group.order() * self.rank()
    }

    pub fn cochain_value(&self, f: &[u64], g: usize) -> Row {
        let m = self.rank();
        self.rel.reduce(&f[g * m..(g + 1) * m])
    }

    pub fn reduce_cochain(&self, f: &[u64]) -> Row {
        self.cochain_relations().reduce(f)
    }

    /// Exhaustive cocycle identity over all pairs.
    pub fn is_cocycle(&self, f: &[u64]) -> bool {
        let n = self.group.order();
        (0..n).all(|g| {
            let fg = self.cochain_value(f, g);
            (0..n).all(|h| {
                let rhs = linalg::add(&self.base, &fg, &self.apply(g, &self.cochain_value(f, h)));
                self.rel.reduce(&rhs) == self.cochain_value(f, self.group.mul(g, h))
            })
        })
    }

    pub fn coboundary_of(&self, v: &[u64]) -> Row {
        (0..self.group.order())
            .flat_map(|g| {
                self.rel
                    .reduce(&linalg::sub(&self.base, &self.apply(g, v), v))
            })
            .collect()
    }

    /// Extends values on the generators along the Cayley graph; `None` when
    /// the result is not a cocycle.
    pub fn extend_cocycle(&self, gen_values: &[Row]) -> Option<Row> {
        let m = self.rank();
        let (order, parent) = self.group.spanning_tree();
        let mut f = vec![0u64; self.cochain_len()];
        for g in order.iter().skip(1) {
            let (h, k) = parent[*g].expect("tree");
            // f(h s) = f(h) + h.f(s)
            let v = linalg::add(
                &self.base,
                &self.cochain_value(&f, h),
                &self.apply(h, &gen_values[k]),
            );
            f[*g * m..(*g + 1) * m].copy_from_slice(&self.rel.reduce(&v));
        }
        self.is_cocycle(&f).then_some(f)
    }

    fn check_budget(&self, budget: usize) -> Result<(), CohomologyError> {
        let size = self.cochain_len();
        if size > budget {
            return Err(CohomologyError::BudgetExceeded { size, budget });
        }
        Ok(())
    }

    /// Invariants `H^0`, as a span containing the relations.
    pub fn h0(&self) -> Span {
        let m = self.rank();
        let gens = self.group.generators();
        let width = m * gens.len().max(1);
        let mat: Vec<Row> = (0..m)
            .map(|i| {
                let mut row = Vec::with_capacity(width);
                for g in gens {
                    let mut r = self.act[*g][i].clone();
                    r[i] = self.base.sub(r[i], 1);
                    row.extend(r);
                }
                row.resize(width, 0);
                row
            })
            .collect();
        let rel_t: Vec<u32> = (0..gens.len().max(1))
            .flat_map(|_| self.torsion.iter().copied())
            .collect();
        let rel = Span::torsion(&self.base, &rel_t);
        self.rel
            .sum(&linalg::left_kernel(&self.base, &mat, width, &rel))
    }

    pub fn h0_log_order(&self) -> u32 {
        self.h0().log_order() - self.rel.log_order()
    }

    /// `Z^1`, solved from `f(gs) = f(g) + g.f(s)` for generators `s` and
    /// `f(1) = 0`.
    pub fn cocycles(&self, budget: usize) -> Result<Span, CohomologyError> {
        self.check_budget(budget)?;
        let n = self.group.order();
        let m = self.rank();
        let gens = self.group.generators();
        let blocks = n * gens.len() + 1;
        let width = blocks * m;
        let mut mat = vec![vec![0u64; width]; n * m];
        let b = &self.base;
        for g in 0..n {
            for (k, s) in gens.iter().enumerate() {
                let col = (g * gens.len() + k) * m;
                let gs = self.group.mul(g, *s);
                for i in 0..m {
                    let r = &mut mat[gs * m + i];
                    r[col + i] = b.add(r[col + i], 1);
                    let r = &mut mat[g * m + i];
                    r[col + i] = b.sub(r[col + i], 1);
                    let ai = &self.act[g][i];
                    let r = &mut mat[*s * m + i];
                    for j in 0..m {
                        r[col + j] = b.sub(r[col + j], ai[j]);
                    }
                }
            }
        }
        let e = self.group.identity();
        for i in 0..m {
            mat[e * m + i][(blocks - 1) * m + i] = 1;
        }
        let rel_t: Vec<u32> = (0..blocks)
            .flat_map(|_| self.torsion.iter().copied())
            .collect();
        let rel = Span::torsion(b, &rel_t);
        Ok(self
            .cochain_relations()
            .sum(&linalg::left_kernel(b, &mat, width, &rel)))
    }

    pub fn coboundaries(&self) -> Span {
        let m = self.rank();
        self.cochain_relations()
            .extend((0..m).map(|i| self.coboundary_of(&linalg::unit_vector(m, i))))
    }

    pub fn h1(&self) -> Result<CocycleSpace, CohomologyError> {
        self.h1_with_budget(DEFAULT_BUDGET)
    }

    pub fn h1_with_budget(&self, budget: usize) -> Result<CocycleSpace, CohomologyError> {
        let z1 = self.cocycles(budget)?;
        Ok(CocycleSpace::from_spans(z1, self.coboundaries()))
    }

    pub fn is_coboundary(&self, f: &[u64]) -> bool {
        self.coboundaries().contains(f)
    }

    /// `(log |Z^1|, log |B^1|)` by enumerating every assignment on the
    /// generators and every module element.
    pub fn h1_exhaustive(&self) -> (u32, u32) {
        let elems = self.elements();
        let k = self.group.generators().len();
        let mut z_count: u128 = 0;
        let mut idx = vec![0usize; k];
        loop {
            let vals: Vec<Row> = idx.iter().map(|i| elems[*i].clone()).collect();
            if self.extend_cocycle(&vals).is_some() {
                z_count += 1;
            }
            let mut t = 0;
            while t < k {
                idx[t] += 1;
                if idx[t] < elems.len() {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == k {
                break;
            }
        }
        let b: BTreeSet<Row> = elems.iter().map(|v| self.coboundary_of(v)).collect();
        (self.base.log_p(z_count), self.base.log_p(b.len() as u128))
    }

    /// The module on a `G`-stable span `N` (containing the relations), with
    /// the matrix whose rows are the ambient images of the new basis.
    pub fn submodule(&self, n: &Span) -> (GModule, Vec<Row>) {
        let sq = SubquotientPresentation::new(n, &self.rel);
        let basis = sq.generators();
        let torsion = sq.exps().to_vec();
        let gens = self
            .group
            .generators()
            .iter()
            .map(|g| {
                basis
                    .iter()
                    .map(|b| sq.coords(&self.apply(*g, b)).expect("stable span"))
                    .collect()
            })
            .collect();
        let sub = GModule::from_row_generators(&self.group, self.base, torsion, gens, None)
            .expect("submodule");
        (sub, basis)
    }

    /// The same module restricted to the subgroup with the given elements.
    pub fn restrict(&self, elements: &[usize]) -> Result<(GModule, Vec<usize>), CohomologyError> {
        let (h, map) = subgroup_of(&self.group, elements)?;
        let gens = h
            .generators()
            .iter()
            .map(|x| self.act[map[*x]].clone())
            .collect();
        let module = GModule::from_row_generators(
            &h,
            self.base,
            self.torsion.clone(),
            gens,
            self.shape.clone(),
        )
        .map_err(|e| CohomologyError::InvalidCondition(e.to_string()))?;
        Ok((module, map))
    }

    /// Restriction of a cochain to a subgroup (in the subgroup's indexing).
    pub fn restrict_cochain(&self, f: &[u64], map: &[usize]) -> Row {
        map.iter().flat_map(|g| self.cochain_value(f, *g)).collect()
    }

    pub fn flatten_cochain(&self, f: &[Mat]) -> Row {
        f.iter().flat_map(group_rep::flatten).collect()
    }

    /// Cochain values as matrices, for modules built from representations.
    pub fn unflatten_cochain(&self, f: &[u64]) -> Vec<Mat> {
        let s = self.shape.as_ref().expect("module carries a matrix shape");
        let m = self.rank();
        (0..self.group.order())
            .map(|g| group_rep::unflatten(&s.alg, &f[g * m..(g + 1) * m], s.rows, s.cols))
            .collect()
    }

    /// Selmer subgroup cut out by local conditions.
    pub fn selmer(&self, conditions: &[LocalCondition]) -> Result<SelmerSpace, CohomologyError> {
        let h1 = self.h1()?;
        let mut res_rows: Vec<Row> = vec![vec![]; h1.z1.rows().len()];
        let mut rel_spans = Vec::new();
        let mut width = 0;
        for c in conditions {
            let (mh, map) = self.restrict(&c.subgroup)?;
            let target = c.allowed(&mh)?;
            for (r, z) in res_rows.iter_mut().zip(h1.z1.rows()) {
                r.extend(self.restrict_cochain(z, &map));
            }
            rel_spans.push((width, target));
            width += mh.cochain_len();
        }
        let selmer = if conditions.is_empty() {
            h1.z1.clone()
        } else {
            let rel = Span::new(
                &self.base,
                width,
                rel_spans.iter().flat_map(|(off, s)| {
                    s.rows().iter().map(move |r| {
                        let mut v = vec![0; width];
                        v[*off..*off + r.len()].copy_from_slice(r);
                        v
                    })
                }),
            );
            let ker = linalg::left_kernel(&self.base, &res_rows, width, &rel);
            self.cochain_relations().extend(
                ker.rows()
                    .iter()
                    .map(|l| linalg::vec_mat(&self.base, l, h1.z1.rows(), self.cochain_len())),
            )
        };
        let space = CocycleSpace::from_spans(selmer.clone(), h1.b1.clone());
        Ok(SelmerSpace { h1, selmer: space })
    }
}

/// `H^1` together with a Selmer subgroup.
#[derive(Clone, Debug)]
pub struct SelmerSpace {
    pub h1: CocycleSpace,
    pub selmer: CocycleSpace,
}

/// Builds the subgroup on `elements`, returning it with the map from its
/// indices to the ambient ones.
pub fn subgroup_of(
    g: &FiniteGroup,
    elements: &[usize],
) -> Result<(FiniteGroup, Vec<usize>), CohomologyError> {
    let mut elems: Vec<usize> = elements.to_vec();
    elems.sort();
    elems.dedup();
    let closure = g.subgroup(&elems);
    if closure != elems {
        return Err(CohomologyError::InvalidCondition(
            "element list is not a subgroup".into(),
        ));
    }
    let pos = |x: usize| elems.binary_search(&x).expect("closed");
    let table = elems
        .iter()
        .map(|a| elems.iter().map(|b| pos(g.mul(*a, *b))).collect())
        .collect();
    let h = FiniteGroup::from_table(table, None)
        .map_err(|e| CohomologyError::InvalidCondition(e.to_string()))?;
    Ok((h, elems))
}

/// The designated subgroup `L` of a local condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum ConditionSpec {
    Zero,
    Full,
    /// Cocycles on the subgroup, values listed in increasing element order.
    Generators {
        cocycles: Vec<Vec<i64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub subgroup: Vec<usize>,
    pub condition: ConditionSpec,
}

impl LocalCondition {
    pub fn zero(subgroup: Vec<usize>) -> LocalCondition {
        LocalCondition {
            subgroup,
            condition: ConditionSpec::Zero,
        }
    }

    pub fn full(subgroup: Vec<usize>) -> LocalCondition {
        LocalCondition {
            subgroup,
            condition: ConditionSpec::Full,
        }
    }

    /// `L + B^1(H)` as a span of cochains on `H`.
    fn allowed(&self, mh: &GModule) -> Result<Span, CohomologyError> {
        let b1 = mh.coboundaries();
        match &self.condition {
            ConditionSpec::Zero => Ok(b1),
            ConditionSpec::Full => mh.cocycles(DEFAULT_BUDGET),
            ConditionSpec::Generators { cocycles } => {
                let mut rows = Vec::new();
                for c in cocycles {
                    let v: Row = c.iter().map(|x| mh.base.from_i64(*x)).collect();
                    if v.len() != mh.cochain_len() || !mh.is_cocycle(&v) {
                        return Err(CohomologyError::InvalidCondition(
                            "generator is not a cocycle on the subgroup".into(),
                        ));
                    }
                    rows.push(v);
                }
                Ok(b1.extend(rows))
            }
        }
    }
}

/// Orders in the finite-level torsion sequence for `W_n = W[p^n]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctorialityReport {
    pub n: u32,
    pub e: u32,
    pub h0_w_log: u32,
    /// `log |H^1(W_n)|`.
    pub h1_wn_log: u32,
    /// `log |H^0(p^n W) / p^n H^0(W)|`: the cokernel term of the sequence.
    pub first_log: u32,
    /// `log |ker(H^1(W) -> H^1(p^n W))|`.
    pub third_log: u32,
    /// `log |H^1(W)[p^n]|`.
    pub torsion_log: u32,
    /// `log |H^0(W) / p^n H^0(W)|`.
    pub h0_mod_pn_log: u32,
    /// `log` of the image of `H^1(W_n) -> H^1(W)`.
    pub image_log: u32,
    /// `|H^1(W_n)| = |first| * |third|`.
    pub exact: bool,
    /// The image of `H^1(W_n)` lies in the kernel term.
    pub image_in_kernel: bool,
    /// The map `H^1(W_n) -> H^1(W)` is injective with image `H^1(W)[p^n]`.
    pub iso_onto_torsion: bool,
    /// `|H^1(W_n)| = |H^0(W)/p^n| * |H^1(W)[p^n]|`.
    pub product_formula_holds: bool,
    pub selmer: Option<SelmerFunctoriality>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelmerFunctoriality {
    pub wn_log: u32,
    pub w_torsion_log: u32,
    /// Selmer of `W_n` with induced conditions maps isomorphically onto the
    /// `p^n`-torsion of the Selmer group of `W`.
    pub iso: bool,
}

/// Checks the sequence `0 -> H^0(p^n W)/p^n H^0(W) -> H^1(W_n) -> ker(H^1(W) -> H^1(p^n W)) -> 0`
/// and its comparison with `H^1(W)[p^n]`.
pub fn torsion_functoriality_check(
    w: &GModule,
    n: u32,
    conditions: &[LocalCondition],
) -> Result<FunctorialityReport, CohomologyError> {
    let b = *w.base();
    let m = w.rank();
    let pn = b.p_pow(n);
    let rel = w.relations().clone();
    let pn_mat: Vec<Row> = (0..m)
        .map(|i| linalg::scale(&b, &linalg::unit_vector(m, i), pn))
        .collect();
    let wn_span = rel.sum(&linalg::left_kernel(&b, &pn_mat, m, &rel));
    let pw_span = rel.extend(pn_mat.iter().cloned());
    let h0 = w.h0();
    let pn_h0 = rel.extend(h0.rows().iter().map(|r| linalg::scale(&b, r, pn)));
    let first_log = pw_span.intersect(&h0).log_order() - pn_h0.log_order();
    let h0_mod_pn_log = h0.log_order() - pn_h0.log_order();

    let h1 = w.h1()?;
    let clen = w.cochain_len();
    let b1_pw = w
        .cochain_relations()
        .extend(pw_span.rows().iter().map(|y| w.coboundary_of(y)));
    let scaled: Vec<Row> = h1
        .z1
        .rows()
        .iter()
        .map(|z| linalg::scale(&b, z, pn))
        .collect();
    let preimage = |target: &Span| -> Span {
        let ker = linalg::left_kernel(&b, &scaled, clen, target);
        h1.b1.extend(
            ker.rows()
                .iter()
                .map(|l| linalg::vec_mat(&b, l, h1.z1.rows(), clen)),
        )
    };
    let third = preimage(&b1_pw);
    let torsion = preimage(&h1.b1);
    let third_log = third.log_order() - h1.b1.log_order();
    let torsion_log = torsion.log_order() - h1.b1.log_order();

    let (wn, emb) = w.submodule(&wn_span);
    let h1n = wn.h1()?;
    let push = |f: &[u64]| -> Row {
        (0..w.group().order())
            .flat_map(|g| {
                w.relations()
                    .reduce(&linalg::vec_mat(&b, &wn.cochain_value(f, g), &emb, m))
            })
            .collect()
    };
    let image = h1.b1.extend(h1n.z1.rows().iter().map(|f| push(f)));
    let image_log = image.log_order() - h1.b1.log_order();
    let injective = image_log == h1n.log_order;

    let selmer = if conditions.is_empty() {
        None
    } else {
        let sel_w = w.selmer(conditions)?;
        let induced = induced_conditions(w, &wn, &emb, conditions)?;
        let sel_wn = wn.selmer(&induced)?;
        let sel_torsion = sel_w.selmer.z1.intersect(&torsion);
        let w_torsion_log = sel_torsion.log_order() - h1.b1.log_order();
        let sel_image = h1
            .b1
            .extend(sel_wn.selmer.z1.rows().iter().map(|f| push(f)));
        let iso = sel_image == sel_torsion
            && sel_image.log_order() - h1.b1.log_order() == sel_wn.selmer.log_order;
        Some(SelmerFunctoriality {
            wn_log: sel_wn.selmer.log_order,
            w_torsion_log,
            iso,
        })
    };

    Ok(FunctorialityReport {
        n,
        e: b.e(),
        h0_w_log: h0.log_order() - rel.log_order(),
        h1_wn_log: h1n.log_order,
        first_log,
        third_log,
        torsion_log,
        h0_mod_pn_log,
        image_log,
        exact: h1n.log_order == first_log + third_log,
        image_in_kernel: third.contains_span(&image),
        iso_onto_torsion: injective && image == torsion,
        product_formula_holds: h1n.log_order == h0_mod_pn_log + torsion_log,
        selmer,
    })
}

/// Conditions on a submodule pulled back along the inclusion.
fn induced_conditions(
    w: &GModule,
    wn: &GModule,
    emb: &[Row],
    conditions: &[LocalCondition],
) -> Result<Vec<LocalCondition>, CohomologyError> {
    let b = *w.base();
    let m = w.rank();
    let mut out = Vec::new();
    for c in conditions {
        let (mh, map) = w.restrict(&c.subgroup)?;
        let (mhn, _) = wn.restrict(&c.subgroup)?;
        let allowed = c.allowed(&mh)?;
        let zn = mhn.cocycles(DEFAULT_BUDGET)?;
        let pushed: Vec<Row> = zn
            .rows()
            .iter()
            .map(|f| {
                (0..map.len())
                    .flat_map(|h| {
                        w.relations()
                            .reduce(&linalg::vec_mat(&b, &mhn.cochain_value(f, h), emb, m))
                    })
                    .collect()
            })
            .collect();
        let ker = linalg::left_kernel(&b, &pushed, mh.cochain_len(), &allowed);
        let gens: Vec<Vec<i64>> = ker
            .rows()
            .iter()
            .map(|l| linalg::vec_mat(&b, l, zn.rows(), mhn.cochain_len()))
            .filter(|v| !linalg::is_zero(&mhn.reduce_cochain(v)))
            .map(|v| v.iter().map(|x| *x as i64).collect())
            .collect();
        out.push(LocalCondition {
            subgroup: c.subgroup.clone(),
            condition: ConditionSpec::Generators { cocycles: gens },
        });
    }
    Ok(out)
}

/// Deformations of `rho_0` to dual numbers.
#[derive(Clone, Debug)]
pub struct TangentReport {
    /// Dimension of `H^1(G, ad rho_0)` (with conditions) over the field.
    pub dimension: u32,
    /// Dimension of the classes with block upper-triangular cocycles.
    pub upper_triangular_dimension: u32,
    /// `block_dimensions[i][j] = dim H^1(Hom(rho_j, rho_i))` for the diagonal
    /// blocks.
    pub block_dimensions: [[u32; 2]; 2],
    /// Cocycle representatives of a basis.
    pub basis: Vec<Row>,
    pub module: GModule,
}

pub fn tangent_space(
    rho0: &GroupRep,
    n1: usize,
    conditions: &[LocalCondition],
) -> Result<TangentReport, CohomologyError> {
    let alg = rho0.algebra();
    if !alg.is_field() {
        return Err(CohomologyError::InvalidModule(
            "tangent space needs a field of coefficients".into(),
        ));
    }
    let f = alg.residue_degree();
    let n = rho0.degree();
    let ad = GModule::ad(rho0);
    let sel = ad.selmer(conditions)?;
    let d = alg.rank();
    let lower: Vec<usize> = (n1..n)
        .flat_map(|i| (0..n1).flat_map(move |j| (0..d).map(move |k| (i * n + j) * d + k)))
        .collect();
    let clen = ad.cochain_len();
    let m = ad.rank();
    // cocycles with vanishing lower-left block
    let proj: Vec<Row> = sel
        .h1
        .z1
        .rows()
        .iter()
        .map(|z| {
            (0..rho0.group().order())
                .flat_map(|g| lower.iter().map(move |c| z[g * m + c]))
                .collect()
        })
        .collect();
    let plen = rho0.group().order() * lower.len();
    let upper_z = linalg::left_kernel(alg.base(), &proj, plen, &Span::zero(alg.base(), plen));
    let upper = sel.h1.b1.extend(
        upper_z
            .rows()
            .iter()
            .map(|l| linalg::vec_mat(alg.base(), l, sel.h1.z1.rows(), clen)),
    );
    let upper_sel = upper.intersect(&sel.selmer.z1);
    let upper_log = upper_sel.log_order() - sel.h1.b1.log_order();
    let mut block_dimensions = [[0; 2]; 2];
    if n1 > 0 && n1 < n {
        let blocks = [
            rho0.block(0, n1)
                .map_err(|e| CohomologyError::InvalidModule(e.to_string()))?,
            rho0.block(n1, n)
                .map_err(|e| CohomologyError::InvalidModule(e.to_string()))?,
        ];
        for i in 0..2 {
            for j in 0..2 {
                block_dimensions[i][j] = GModule::hom(&blocks[j], &blocks[i]).h1()?.log_order / f;
            }
        }
    }
    Ok(TangentReport {
        dimension: sel.selmer.log_order / f,
        upper_triangular_dimension: upper_log / f,
        block_dimensions,
        basis: sel.selmer.basis.clone(),
        module: ad,
    })
}

/// The deformation `(1 + eps c) rho_0` over `F[eps]` attached to a cocycle of
/// `ad rho_0`.
pub fn deformation_from_cocycle(rho0: &GroupRep, ad: &GModule, c: &[u64]) -> GroupRep {
    let alg = rho0.algebra();
    let dual = crate::catalog::dual_numbers(*alg.base());
    assert_eq!(alg.rank(), 1, "deformations are built over a prime field");
    let vals = ad.unflatten_cochain(c);
    let n = rho0.degree();
    let images = (0..rho0.group().order())
        .map(|g| {
            let mut m = dual.mat_zero(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut x = vec![0; 2];
                    x[0] = rho0.image(g)[i][j][0];
                    let mut y = 0;
                    for k in 0..n {
                        y = alg
                            .base()
                            .add(y, alg.base().mul(vals[g][i][k][0], rho0.image(g)[k][j][0]));
                    }
                    x[1] = y;
                    m[i][j] = x;
                }
            }
            m
        })
        .collect();
    GroupRep::from_all_images(rho0.group(), &dual, images).expect("cocycle gives a deformation")
}

/// Declared inertia data at one place.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamagawaDeclaration {
    pub place: String,
    /// Elements of the inertia subgroup, if declared.
    #[serde(default)]
    pub inertia: Option<Vec<usize>>,
    /// Generators of the declared `W^I`; defaults to the computed invariants.
    #[serde(default)]
    pub invariants: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamagawaEntry {
    pub place: String,
    pub flag: String,
    /// Invariant exponents of the declared `W^I`.
    pub invariants: Vec<u32>,
    /// The declared submodule equals the computed inertia invariants.
    pub matches_computed: Option<bool>,
}

/// Records the declarations and checks divisibility of `W^I` at the
/// truncation level: every invariant factor equals `p^e`.
pub fn tamagawa_inputs(
    w: &GModule,
    decls: &[TamagawaDeclaration],
) -> Result<Vec<TamagawaEntry>, CohomologyError> {
    let b = *w.base();
    let mut out = Vec::new();
    for d in decls {
        let computed = match &d.inertia {
            Some(els) => Some(w.restrict(els)?.0.h0()),
            None => None,
        };
        let declared = match &d.invariants {
            Some(gens) => Some(
                w.relations().extend(
                    gens.iter()
                        .map(|v| v.iter().map(|x| b.from_i64(*x)).collect()),
                ),
            ),
            None => computed.clone(),
        };
        let Some(span) = declared else {
            out.push(TamagawaEntry {
                place: d.place.clone(),
                flag: "H1_Sigma vs H1_f identification unchecked".into(),
                invariants: vec![],
                matches_computed: None,
            });
            continue;
        };
        let mut inv = linalg::quotient_invariants(&span, w.relations());
        inv.sort();
        let divisible = inv.iter().all(|k| *k == b.e());
        out.push(TamagawaEntry {
            place: d.place.clone(),
            flag: if divisible {
                "Tamagawa-trivial (truncation-level)".into()
            } else {
                "not divisible at level e".into()
            },
            invariants: inv,
            matches_computed: computed.map(|c| c == span),
        });
    }
    Ok(out)
}

/// Helper for building characters as modules over `Z/p^e`.
pub fn character_module(chi: &GroupRep) -> GModule {
    GModule::from_rep(chi)
}

/// Module over an algebra of rank one given by generator scalars.
pub fn scalar_module(group: &FiniteGroup, alg: &LocalAlgebra, gen_values: &[i64]) -> GModule {
    let vals = gen_values
        .iter()
        .map(|v| alg.scalar(alg.base().from_i64(*v)))
        .collect();
    GModule::from_rep(&GroupRep::character(group, alg, vals).expect("valid character"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn f3() -> LocalAlgebra {
        catalog::base_ring_algebra(BaseRing::new(3, 1).unwrap())
    }

    #[test]
    fn s3_sign_and_trivial() {
        let g = catalog::symmetric3();
        let sign = scalar_module(&g, &f3(), &[1, -1]);
        let triv = scalar_module(&g, &f3(), &[1, 1]);
        assert_eq!(sign.h0_log_order(), 0);
        assert_eq!(triv.h0_log_order(), 1);
        let h = sign.h1().unwrap();
        assert_eq!(h.log_order, 1);
        assert_eq!(h.invariants, vec![1]);
        assert_eq!(sign.h1_exhaustive(), (2, 1));
        assert_eq!(triv.h1().unwrap().log_order, 0);
        assert_eq!(triv.h1_exhaustive(), (0, 0));
    }

    #[test]
    fn cyclic_trivial() {
        let g = catalog::cyclic(3);
        let m = scalar_module(&g, &f3(), &[1]);
        assert_eq!(m.h1().unwrap().log_order, 1);
    }

    #[test]
    fn selmer_condition_on_s_subgroup() {
        let g = catalog::symmetric3();
        let sign = scalar_module(&g, &f3(), &[1, -1]);
        let s = g.generators()[1];
        let sub = g.subgroup(&[s]);
        let sel = sign.selmer(&[LocalCondition::zero(sub.clone())]).unwrap();
        assert_eq!(sel.selmer.log_order, 1);
        let sel = sign.selmer(&[LocalCondition::full(sub)]).unwrap();
        assert_eq!(sel.selmer.log_order, 1);
        assert_eq!(sign.selmer(&[]).unwrap().selmer.log_order, 1);
    }

    #[test]
    fn budget() {
        let g = catalog::symmetric3();
        let sign = scalar_module(&g, &f3(), &[1, -1]);
        assert!(matches!(
            sign.h1_with_budget(2),
            Err(CohomologyError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn functoriality_sign_z27() {
        let g = catalog::symmetric3();
        let a = catalog::base_ring_algebra(BaseRing::new(3, 3).unwrap());
        let w = scalar_module(&g, &a, &[1, -1]);
        for n in 1..=3 {
            let r = torsion_functoriality_check(&w, n, &[]).unwrap();
            assert_eq!(r.h0_w_log, 0);
            assert!(r.exact && r.iso_onto_torsion, "{r:?}");
            assert_eq!(r.h1_wn_log, r.torsion_log);
        }
    }

    #[test]
    fn functoriality_trivial_action_truncation() {
        let g = catalog::cyclic(3);
        let a = catalog::base_ring_algebra(BaseRing::new(3, 3).unwrap());
        let w = scalar_module(&g, &a, &[1]);
        let r = torsion_functoriality_check(&w, 1, &[]).unwrap();
        assert!(r.exact);
        assert_eq!(r.h1_wn_log, 1);
        assert_eq!(r.first_log, 0);
        assert_eq!(r.h0_mod_pn_log, 1);
        assert!(!r.product_formula_holds);
    }

    #[test]
    fn tamagawa_flags() {
        let g = catalog::symmetric3();
        let a = catalog::base_ring_algebra(BaseRing::new(3, 2).unwrap());
        let w = scalar_module(&g, &a, &[1, 1]);
        let e = tamagawa_inputs(
            &w,
            &[
                TamagawaDeclaration {
                    place: "v".into(),
                    inertia: Some(vec![0, 1, 2]),
                    invariants: None,
                },
                TamagawaDeclaration {
                    place: "u".into(),
                    inertia: None,
                    invariants: Some(vec![vec![3]]),
                },
                TamagawaDeclaration {
                    place: "x".into(),
                    inertia: None,
                    invariants: None,
                },
            ],
        )
        .unwrap();
        assert_eq!(e[0].flag, "Tamagawa-trivial (truncation-level)");
        assert_eq!(e[1].flag, "not divisible at level e");
        assert_eq!(e[2].flag, "H1_Sigma vs H1_f identification unchecked");
    }
}
