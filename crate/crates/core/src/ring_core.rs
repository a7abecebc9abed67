//! Finite commutative local algebras over `Z/p^e`, their ideals and maps.
//!
//! An algebra is a module `(+) Z/p^{t_i}` on generators `b_0..b_{d-1}` with
//! structure constants `b_i * b_j = sum_k c[i][j][k] b_k`. Elements are
//! coordinate rows, canonical when each coordinate lies in `[0, p^{t_i})`.

use crate::linalg::{self, Presentation, Row, Span, SubquotientPresentation};
use crate::zmod::BaseRing;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("inconsistent dimensions: {0}")]
    Shape(String),
    #[error("multiplication is not associative at generators ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("multiplication is not commutative at generators ({0}, {1})")]
    NotCommutative(usize, usize),
    #[error("the given unit is not a multiplicative identity")]
    NoUnit,
    #[error("algebra is not local: residue ring splits into {0} fields")]
    NotLocal(usize),
    #[error("structure constants do not respect the additive torsion of generator {0}")]
    TorsionMismatch(usize),
    #[error("ideals or maps belong to different algebras")]
    MismatchedParent,
    #[error("quotient by the unit ideal is the zero ring")]
    UnitIdeal,
}

#[derive(Debug, PartialEq, Eq)]
struct Inner {
    base: BaseRing,
    torsion: Vec<u32>,
    rel: Span,
    // mult[i][j] = b_i * b_j
    mult: Vec<Vec<Row>>,
    unit: Row,
    max_ideal: Span,
    residue_degree: u32,
}

/// A finite commutative local `Z/p^e`-algebra. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct LocalAlgebra {
    inner: Arc<Inner>,
}

impl PartialEq for LocalAlgebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}
impl Eq for LocalAlgebra {}

/// Serializable description of an algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub base: BaseRing,
    /// Additive exponent of each generator; defaults to `e` for all.
    #[serde(default)]
    pub torsion: Option<Vec<u32>>,
    /// `structure[i][j]` is the coordinate row of `b_i * b_j`.
    pub structure: Vec<Vec<Vec<i64>>>,
    pub unit: Vec<i64>,
}

/// Square matrices over an algebra, row-major, entries are element rows.
pub type Mat = Vec<Vec<Row>>;

pub fn make_algebra(
    base: BaseRing,
    torsion: Option<Vec<u32>>,
    structure: Vec<Vec<Row>>,
    unit: Row,
) -> Result<LocalAlgebra, AlgebraError> {
    LocalAlgebra::new(base, torsion, structure, unit)
}

impl LocalAlgebra {
    pub fn new(
        base: BaseRing,
        torsion: Option<Vec<u32>>,
        structure: Vec<Vec<Row>>,
        unit: Row,
    ) -> Result<LocalAlgebra, AlgebraError> {
        let d = structure.len();
        if d == 0 {
            return Err(AlgebraError::NoUnit);
        }
        let torsion = torsion.unwrap_or_else(|| vec![base.e(); d]);
        if torsion.len() != d || unit.len() != d {
            return Err(AlgebraError::Shape(format!(
                "rank {d}, torsion {}, unit {}",
                torsion.len(),
                unit.len()
            )));
        }
        if let Some(i) = torsion.iter().position(|t| *t == 0 || *t > base.e()) {
            return Err(AlgebraError::Shape(format!(
                "torsion exponent of generator {i} out of range"
            )));
        }
        for row in &structure {
            if row.len() != d || row.iter().any(|v| v.len() != d) {
                return Err(AlgebraError::Shape(
                    "structure table must be rank x rank x rank".into(),
                ));
            }
        }
        let rel = Span::torsion(&base, &torsion);
        let mult: Vec<Vec<Row>> = structure
            .into_iter()
            .map(|r| r.into_iter().map(|v| rel.reduce(&v)).collect())
            .collect();
        let unit = rel.reduce(&unit);
        let mut alg = Inner {
            base,
            torsion,
            rel,
            mult,
            unit,
            max_ideal: Span::zero(&base, d),
            residue_degree: 0,
        };
        alg.validate()?;
        let (max_ideal, f) = alg.locality()?;
        alg.max_ideal = max_ideal;
        alg.residue_degree = f;
        Ok(LocalAlgebra {
            inner: Arc::new(alg),
        })
    }

    pub fn from_spec(spec: &AlgebraSpec) -> Result<LocalAlgebra, AlgebraError> {
        let b = spec.base;
        let conv = |v: &Vec<i64>| v.iter().map(|x| b.from_i64(*x)).collect::<Row>();
        let structure = spec
            .structure
            .iter()
            .map(|r| r.iter().map(conv).collect())
            .collect();
        LocalAlgebra::new(b, spec.torsion.clone(), structure, conv(&spec.unit))
    }

    pub fn to_spec(&self) -> AlgebraSpec {
        let b = self.base();
        let conv = |v: &Row| v.iter().map(|x| b.to_signed(*x)).collect::<Vec<i64>>();
        AlgebraSpec {
            base: *b,
            torsion: Some(self.inner.torsion.clone()),
            structure: self
                .inner
                .mult
                .iter()
                .map(|r| r.iter().map(conv).collect())
                .collect(),
            unit: conv(&self.inner.unit),
        }
    }

    pub fn base(&self) -> &BaseRing {
        &self.inner.base
    }

    pub fn rank(&self) -> usize {
        self.inner.torsion.len()
    }

    pub fn torsion(&self) -> &[u32] {
        &self.inner.torsion
    }

    /// Relations `p^{t_i} b_i = 0` as a span in coordinate space.
    pub fn relations(&self) -> &Span {
        &self.inner.rel
    }

    pub fn structure(&self) -> &[Vec<Row>] {
        &self.inner.mult
    }

    /// `log_p |A|`.
    pub fn log_order(&self) -> u32 {
        self.inner.torsion.iter().sum()
    }

    pub fn residue_degree(&self) -> u32 {
        self.inner.residue_degree
    }

    pub fn is_field(&self) -> bool {
        self.inner.max_ideal == self.inner.rel
    }

    pub fn one(&self) -> Row {
        self.inner.unit.clone()
    }

    pub fn zero(&self) -> Row {
        vec![0; self.rank()]
    }

    pub fn generator(&self, i: usize) -> Row {
        linalg::unit_vector(self.rank(), i)
    }

    /// Image of an integer under the structure map.
    pub fn scalar(&self, c: u64) -> Row {
        self.reduce(&linalg::scale(self.base(), &self.inner.unit, c))
    }

    pub fn from_i64s(&self, v: &[i64]) -> Row {
        let b = self.base();
        self.reduce(&v.iter().map(|x| b.from_i64(*x)).collect::<Row>())
    }

    pub fn reduce(&self, x: &[u64]) -> Row {
        self.inner.rel.reduce(x)
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> Row {
        self.reduce(&linalg::add(self.base(), a, b))
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Row {
        self.reduce(&linalg::sub(self.base(), a, b))
    }

    pub fn neg(&self, a: &[u64]) -> Row {
        self.reduce(&linalg::neg(self.base(), a))
    }

    pub fn scale(&self, a: &[u64], c: u64) -> Row {
        self.reduce(&linalg::scale(self.base(), a, c))
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Row {
        mul_raw(&self.inner.base, &self.inner.mult, a, b, &self.inner.rel)
    }

    pub fn pow(&self, a: &[u64], mut k: u64) -> Row {
        let mut acc = self.one();
        let mut base = self.reduce(a);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    pub fn is_zero(&self, a: &[u64]) -> bool {
        linalg::is_zero(&self.reduce(a))
    }

    /// Matrix of `x -> a * x` in row convention.
    pub fn mult_matrix(&self, a: &[u64]) -> Vec<Row> {
        (0..self.rank())
            .map(|j| self.mul(a, &self.generator(j)))
            .collect()
    }

    pub fn is_unit(&self, a: &[u64]) -> bool {
        !self.inner.max_ideal.contains(a)
    }

    pub fn inv(&self, a: &[u64]) -> Option<Row> {
        if !self.is_unit(a) {
            return None;
        }
        let m = self.mult_matrix(a);
        linalg::solve_left(self.base(), &m, self.rank(), &self.one(), &self.inner.rel)
            .map(|x| self.reduce(&x))
    }

    pub fn max_ideal(&self) -> Ideal {
        Ideal {
            alg: self.clone(),
            span: self.inner.max_ideal.clone(),
        }
    }

    pub fn unit_ideal(&self) -> Ideal {
        Ideal {
            alg: self.clone(),
            span: Span::full(self.base(), self.rank()),
        }
    }

    pub fn zero_ideal(&self) -> Ideal {
        Ideal {
            alg: self.clone(),
            span: self.inner.rel.clone(),
        }
    }

    /// Every element, each once. Only for small algebras.
    pub fn elements(&self) -> Vec<Row> {
        let full = Span::full(self.base(), self.rank());
        let mut out = Vec::new();
        for x in full.elements() {
            if self.reduce(&x) == x {
                out.push(x);
            }
        }
        out
    }

    /// `log_p |A| <= cap`.
    pub fn order_at_most(&self, log_cap: u32) -> bool {
        self.log_order() <= log_cap
    }

    /// The residue field `A / m_A`.
    pub fn residue_field(&self) -> (LocalAlgebra, AlgebraHom) {
        self.max_ideal()
            .quotient_map()
            .expect("maximal ideal is proper")
    }

    // Matrices over the algebra.

    pub fn mat_identity(&self, n: usize) -> Mat {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { self.one() } else { self.zero() })
                    .collect()
            })
            .collect()
    }

    pub fn mat_zero(&self, r: usize, c: usize) -> Mat {
        vec![vec![self.zero(); c]; r]
    }

    pub fn mat_mul(&self, a: &Mat, b: &Mat) -> Mat {
        let r = a.len();
        let k = b.len();
        let c = if k == 0 { 0 } else { b[0].len() };
        let mut out = self.mat_zero(r, c);
        for i in 0..r {
            for t in 0..k {
                if linalg::is_zero(&a[i][t]) {
                    continue;
                }
                let lm = self.mult_matrix(&a[i][t]);
                for j in 0..c {
                    if !linalg::is_zero(&b[t][j]) {
                        let prod = linalg::vec_mat(self.base(), &b[t][j], &lm, self.rank());
                        out[i][j] = self.add(&out[i][j], &prod);
                    }
                }
            }
        }
        out
    }

    pub fn mat_add(&self, a: &Mat, b: &Mat) -> Mat {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| self.add(x, y)).collect())
            .collect()
    }

    pub fn mat_sub(&self, a: &Mat, b: &Mat) -> Mat {
        a.iter()
            .zip(b)
            .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| self.sub(x, y)).collect())
            .collect()
    }

    pub fn mat_scale(&self, a: &Mat, s: &[u64]) -> Mat {
        a.iter()
            .map(|r| r.iter().map(|x| self.mul(x, s)).collect())
            .collect()
    }

    pub fn mat_map(&self, a: &Mat, f: impl Fn(&Row) -> Row) -> Mat {
        a.iter().map(|r| r.iter().map(&f).collect()).collect()
    }

    pub fn mat_trace(&self, a: &Mat) -> Row {
        let mut t = self.zero();
        for (i, r) in a.iter().enumerate() {
            t = self.add(&t, &r[i]);
        }
        t
    }

    pub fn mat_reduce(&self, a: &Mat) -> Mat {
        self.mat_map(a, |x| self.reduce(x))
    }

    /// Gauss-Jordan with unit pivots; `None` when the matrix is singular.
    pub fn mat_inverse(&self, a: &Mat) -> Option<Mat> {
        let n = a.len();
        let mut m = self.mat_reduce(a);
        let mut inv = self.mat_identity(n);
        for c in 0..n {
            let piv = (c..n).find(|r| self.is_unit(&m[*r][c]))?;
            m.swap(c, piv);
            inv.swap(c, piv);
            let u = self.inv(&m[c][c]).expect("unit");
            m[c] = m[c].iter().map(|x| self.mul(x, &u)).collect();
            inv[c] = inv[c].iter().map(|x| self.mul(x, &u)).collect();
            for r in 0..n {
                if r != c && !self.is_zero(&m[r][c]) {
                    let f = m[r][c].clone();
                    for j in 0..n {
                        let t = self.mul(&f, &m[c][j]);
                        m[r][j] = self.sub(&m[r][j], &t);
                        let t = self.mul(&f, &inv[c][j]);
                        inv[r][j] = self.sub(&inv[r][j], &t);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn mat_is_invertible(&self, a: &Mat) -> bool {
        self.mat_inverse(a).is_some()
    }

    pub fn mat_from_i64(&self, a: &[Vec<Vec<i64>>]) -> Mat {
        a.iter()
            .map(|r| r.iter().map(|x| self.from_i64s(x)).collect())
            .collect()
    }

    /// Matrix over a rank-one algebra from plain integers.
    pub fn mat_from_scalars(&self, a: &[Vec<i64>]) -> Mat {
        a.iter()
            .map(|r| {
                r.iter()
                    .map(|x| self.scalar(self.base().from_i64(*x)))
                    .collect()
            })
            .collect()
    }
}

fn mul_raw(base: &BaseRing, mult: &[Vec<Row>], a: &[u64], b: &[u64], rel: &Span) -> Row {
    let d = a.len();
    let mut out = vec![0; d];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if *bj == 0 {
                continue;
            }
            linalg::axpy(base, &mut out, &mult[i][j], base.mul(*ai, *bj));
        }
    }
    rel.reduce(&out)
}

impl Inner {
    fn mul(&self, a: &[u64], b: &[u64]) -> Row {
        mul_raw(&self.base, &self.mult, a, b, &self.rel)
    }

    fn validate(&self) -> Result<(), AlgebraError> {
        let d = self.torsion.len();
        let b = &self.base;
        for i in 0..d {
            let pi = linalg::scale(b, &linalg::unit_vector(d, i), b.p_pow(self.torsion[i]));
            for j in 0..d {
                let prod = self.mul(&pi, &linalg::unit_vector(d, j));
                if !linalg::is_zero(&prod) {
                    return Err(AlgebraError::TorsionMismatch(i));
                }
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                if self.mult[i][j] != self.mult[j][i] {
                    return Err(AlgebraError::NotCommutative(i, j));
                }
            }
        }
        for i in 0..d {
            let ei = linalg::unit_vector(d, i);
            if self.mul(&self.unit, &ei) != self.rel.reduce(&ei) {
                return Err(AlgebraError::NoUnit);
            }
        }
        for i in 0..d {
            for j in 0..d {
                let ij = &self.mult[i][j];
                for k in 0..d {
                    let left = self.mul(ij, &linalg::unit_vector(d, k));
                    let right = self.mul(&linalg::unit_vector(d, i), &self.mult[j][k]);
                    if left != right {
                        return Err(AlgebraError::NotAssociative(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    /// Maximal ideal and residue degree, via the Frobenius on `A / pA`.
    fn locality(&self) -> Result<(Span, u32), AlgebraError> {
        let d = self.torsion.len();
        let b = self.base;
        let f = b.residue();
        let red = |v: &Row| v.iter().map(|x| x % b.p()).collect::<Row>();
        let mult_bar: Vec<Vec<Row>> = self
            .mult
            .iter()
            .map(|r| r.iter().map(red).collect())
            .collect();
        let zero_rel = Span::zero(&f, d);
        let mul_bar = |x: &[u64], y: &[u64]| mul_raw(&f, &mult_bar, x, y, &zero_rel);
        let frob: Vec<Row> = (0..d)
            .map(|i| {
                let x = linalg::unit_vector(d, i);
                let mut acc = red(&self.unit);
                for _ in 0..b.p() {
                    acc = mul_bar(&acc, &x);
                }
                acc
            })
            .collect();
        let mut power = frob.clone();
        let mut reach = b.p();
        while (reach as usize) < d {
            power = linalg::mat_mul(&f, &power, &frob, d);
            reach *= b.p();
        }
        let nil = linalg::left_kernel(&f, &power, d, &zero_rel);
        let mut shifted = frob.clone();
        for (i, r) in shifted.iter_mut().enumerate() {
            r[i] = f.sub(r[i], 1);
        }
        let fixed = linalg::left_kernel(&f, &shifted, d, &nil);
        let fields = fixed.rows().len() - nil.rows().len();
        if fields != 1 {
            return Err(AlgebraError::NotLocal(fields));
        }
        let pgens = (0..d).map(|i| linalg::scale(&b, &linalg::unit_vector(d, i), b.p_pow(1)));
        let m = self.rel.extend(nil.rows().iter().cloned().chain(pgens));
        Ok((m, (d - nil.rows().len()) as u32))
    }
}

/// Numerical invariants of a finite module.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleInvariants {
    /// Invariant factors `p^k`, ascending.
    pub invariant_factors: Vec<u64>,
    /// `log_p` of the order.
    pub log_order: u32,
    /// Number of invariant factors: the minimal number of `Z/p^e` generators.
    pub base_generators: usize,
    /// Minimal number of generators over the coefficient algebra.
    pub min_generators: usize,
    /// A generating set of size `min_generators`.
    #[serde(skip)]
    pub witness: Vec<Row>,
}

/// An ideal of a local algebra, stored as the canonical span of its
/// coordinate rows together with the algebra's torsion relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ideal {
    alg: LocalAlgebra,
    span: Span,
}

impl std::hash::Hash for Ideal {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.span.hash(state)
    }
}

impl Ideal {
    pub fn from_generators(alg: &LocalAlgebra, gens: &[Row]) -> Ideal {
        let d = alg.rank();
        let mut rows = Vec::with_capacity(gens.len() * d);
        for g in gens {
            for j in 0..d {
                rows.push(alg.mul(g, &alg.generator(j)));
            }
        }
        Ideal {
            alg: alg.clone(),
            span: alg.relations().extend(rows),
        }
    }

    /// Wraps a span already known to be an ideal containing the relations.
    pub fn from_span_unchecked(alg: &LocalAlgebra, span: Span) -> Ideal {
        Ideal {
            alg: alg.clone(),
            span,
        }
    }

    /// Closes an `O`-span under multiplication.
    pub fn from_module(alg: &LocalAlgebra, span: &Span) -> Ideal {
        Ideal::from_generators(alg, span.rows())
    }

    pub fn algebra(&self) -> &LocalAlgebra {
        &self.alg
    }

    pub fn span(&self) -> &Span {
        &self.span
    }

    /// Canonical echelon rows; equal ideals have equal rows.
    pub fn rows(&self) -> &[Row] {
        self.span.rows()
    }

    /// Nonzero module generators.
    pub fn generators(&self) -> Vec<Row> {
        self.span
            .rows()
            .iter()
            .map(|r| self.alg.reduce(r))
            .filter(|r| !linalg::is_zero(r))
            .collect()
    }

    pub fn log_order(&self) -> u32 {
        self.span.log_order() - self.alg.relations().log_order()
    }

    pub fn is_zero(&self) -> bool {
        self.log_order() == 0
    }

    pub fn is_unit(&self) -> bool {
        self.contains(&self.alg.one())
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        self.span.contains(x)
    }

    pub fn contains_ideal(&self, other: &Ideal) -> bool {
        self.span.contains_span(&other.span)
    }

    fn check(&self, other: &Ideal) -> Result<(), AlgebraError> {
        if self.alg != other.alg {
            return Err(AlgebraError::MismatchedParent);
        }
        Ok(())
    }

    pub fn sum(&self, other: &Ideal) -> Result<Ideal, AlgebraError> {
        self.check(other)?;
        Ok(Ideal {
            alg: self.alg.clone(),
            span: self.span.sum(&other.span),
        })
    }

    pub fn product(&self, other: &Ideal) -> Result<Ideal, AlgebraError> {
        self.check(other)?;
        let a = self.generators();
        let b = other.generators();
        let mut rows = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                rows.push(self.alg.mul(x, y));
            }
        }
        Ok(Ideal {
            alg: self.alg.clone(),
            span: self.alg.relations().extend(rows),
        })
    }

    pub fn intersect(&self, other: &Ideal) -> Result<Ideal, AlgebraError> {
        self.check(other)?;
        Ok(Ideal {
            alg: self.alg.clone(),
            span: self.span.intersect(&other.span),
        })
    }

    pub fn power(&self, k: u32) -> Ideal {
        let mut acc = self.alg.unit_ideal();
        for _ in 0..k {
            acc = acc.product(self).expect("same parent");
        }
        acc
    }

    /// `{a : a I = 0}`.
    pub fn annihilator(&self) -> Ideal {
        let alg = &self.alg;
        let d = alg.rank();
        let gens = self.generators();
        if gens.is_empty() {
            return alg.unit_ideal();
        }
        let mat: Vec<Row> = (0..d)
            .map(|i| {
                let ei = alg.generator(i);
                gens.iter().flat_map(|g| alg.mul(&ei, g)).collect()
            })
            .collect();
        let width = d * gens.len();
        let rel = Span::new(
            alg.base(),
            width,
            (0..gens.len()).flat_map(|k| {
                alg.relations().rows().iter().map(move |r| {
                    let mut v = vec![0; width];
                    v[k * d..(k + 1) * d].copy_from_slice(r);
                    v
                })
            }),
        );
        let ker = linalg::left_kernel(alg.base(), &mat, width, &rel);
        Ideal {
            alg: alg.clone(),
            span: alg.relations().sum(&ker),
        }
    }

    /// `I / m I` counted over the residue field, with a greedy witness.
    pub fn minimal_generators(&self) -> ModuleInvariants {
        let alg = &self.alg;
        let m_i = self.product(&alg.max_ideal()).expect("same parent");
        let f = alg.residue_degree();
        let diff = self.log_order() - m_i.log_order();
        debug_assert_eq!(diff % f, 0);
        let count = (diff / f) as usize;
        let mut witness = Vec::new();
        let mut cur = m_i;
        for g in self.generators() {
            if witness.len() == count {
                break;
            }
            if !cur.contains(&g) {
                cur = cur
                    .sum(&Ideal::from_generators(alg, std::slice::from_ref(&g)))
                    .expect("same parent");
                witness.push(g);
            }
        }
        debug_assert_eq!(witness.len(), count);
        let mut exps = linalg::quotient_invariants(&self.span, alg.relations());
        exps.sort();
        ModuleInvariants {
            invariant_factors: exps.iter().map(|k| alg.base().p().pow(*k)).collect(),
            log_order: self.log_order(),
            base_generators: exps.len(),
            min_generators: count,
            witness,
        }
    }

    /// Principality with a generator when principal.
    pub fn is_principal(&self) -> (bool, Option<Row>) {
        let inv = self.minimal_generators();
        match inv.min_generators {
            0 => (true, Some(self.alg.zero())),
            1 => (true, Some(inv.witness[0].clone())),
            _ => (false, None),
        }
    }

    /// Exhaustive single-generator search over the elements of the ideal.
    pub fn is_principal_exhaustive(&self) -> (bool, Option<Row>) {
        for x in self.elements() {
            if Ideal::from_generators(&self.alg, std::slice::from_ref(&x)) == *self {
                return (true, Some(x));
            }
        }
        (false, None)
    }

    /// Smallest number of generators found by breadth-first search over the
    /// ideals generated by `k` elements of `I`.
    pub fn minimal_generators_exhaustive(&self) -> usize {
        let elems = self.elements();
        let mut level: HashSet<Ideal> = HashSet::new();
        level.insert(self.alg.zero_ideal());
        let mut k = 0;
        loop {
            if level.contains(self) {
                return k;
            }
            let mut next = HashSet::new();
            for j in &level {
                for x in &elems {
                    if j.contains(x) {
                        continue;
                    }
                    let s = j
                        .sum(&Ideal::from_generators(&self.alg, std::slice::from_ref(x)))
                        .expect("same");
                    next.insert(s);
                }
            }
            level = next;
            k += 1;
        }
    }

    pub fn elements(&self) -> Vec<Row> {
        let set: BTreeSet<Row> = self
            .span
            .elements()
            .iter()
            .map(|x| self.alg.reduce(x))
            .collect();
        set.into_iter().collect()
    }

    pub fn quotient_algebra(&self) -> Result<LocalAlgebra, AlgebraError> {
        self.quotient_map().map(|(q, _)| q)
    }

    /// `A / I` with the projection `A -> A / I`.
    pub fn quotient_map(&self) -> Result<(LocalAlgebra, AlgebraHom), AlgebraError> {
        if self.is_unit() {
            return Err(AlgebraError::UnitIdeal);
        }
        let alg = &self.alg;
        let pres = Presentation::of_quotient(&self.span);
        let k = pres.dim();
        let basis: Vec<Row> = (0..k)
            .map(|i| pres.lift(&linalg::unit_vector(k, i)))
            .collect();
        let structure = basis
            .iter()
            .map(|x| basis.iter().map(|y| pres.project(&alg.mul(x, y))).collect())
            .collect();
        let unit = pres.project(&alg.one());
        let q = LocalAlgebra::new(*alg.base(), Some(pres.exps().to_vec()), structure, unit)?;
        let matrix = (0..alg.rank())
            .map(|i| pres.project(&alg.generator(i)))
            .collect();
        let hom = AlgebraHom {
            source: alg.clone(),
            target: q.clone(),
            matrix,
        };
        Ok((q, hom))
    }
}

/// Nilradical of a finite local algebra, which equals its maximal ideal.
#[derive(Clone, Debug)]
pub struct NilradicalReport {
    pub ideal: Ideal,
    /// `p` is nonzero in `A`, so part of the nilradical comes from the
    /// truncation of the base ring.
    pub uniformizer_nilpotent: bool,
    /// Residue dimension of the nilradical's image in `A / pA`: nilpotents
    /// that survive reduction modulo the uniformizer.
    pub structural_dim: u32,
}

pub fn nilradical(alg: &LocalAlgebra) -> NilradicalReport {
    let ideal = alg.max_ideal();
    let p1 = alg.scalar(alg.base().p());
    let pa = Ideal::from_generators(alg, std::slice::from_ref(&p1));
    let structural_dim = ideal.log_order() - pa.log_order();
    NilradicalReport {
        ideal,
        uniformizer_nilpotent: !alg.is_zero(&p1),
        structural_dim,
    }
}

/// Nilradical by powering every element; for small algebras.
pub fn nilradical_exhaustive(alg: &LocalAlgebra) -> Ideal {
    let bound = alg.base().p().pow(alg.log_order());
    let exp = bound.max(1);
    let nil: Vec<Row> = alg
        .elements()
        .into_iter()
        .filter(|x| alg.is_zero(&alg.pow(x, exp)))
        .collect();
    Ideal::from_generators(alg, &nil)
}

pub fn reduced_quotient(alg: &LocalAlgebra) -> LocalAlgebra {
    alg.residue_field().0
}

pub fn is_gorenstein(alg: &LocalAlgebra) -> bool {
    let soc = alg.max_ideal().annihilator();
    soc.log_order() == alg.residue_degree()
}

/// All ideals, as the closure of the principal ideals under sums.
pub fn all_ideals(alg: &LocalAlgebra) -> Vec<Ideal> {
    let mut set: HashSet<Ideal> = HashSet::new();
    for x in alg.elements() {
        set.insert(Ideal::from_generators(alg, &[x]));
    }
    let principal: Vec<Ideal> = set.iter().cloned().collect();
    let mut frontier: Vec<Ideal> = principal.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for i in &frontier {
            for j in &principal {
                let s = i.sum(j).expect("same parent");
                if !set.contains(&s) {
                    set.insert(s.clone());
                    next.push(s);
                }
            }
        }
        frontier = next;
    }
    let mut out: Vec<Ideal> = set.into_iter().collect();
    out.sort_by(|a, b| {
        a.log_order()
            .cmp(&b.log_order())
            .then_with(|| a.rows().cmp(b.rows()))
    });
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomError {
    #[error("base rings differ")]
    BaseMismatch,
    #[error("matrix has the wrong shape")]
    Shape,
    #[error("map is not well defined on the torsion of generator {0}")]
    NotWellDefined(usize),
    #[error("map does not send 1 to 1")]
    NotUnital,
    #[error("map is not multiplicative at generators ({0}, {1})")]
    NotMultiplicative(usize, usize),
}

/// A unital `O`-algebra map, given by the images of the source generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraHom {
    source: LocalAlgebra,
    target: LocalAlgebra,
    matrix: Vec<Row>,
}

impl AlgebraHom {
    pub fn new(
        source: &LocalAlgebra,
        target: &LocalAlgebra,
        images: Vec<Row>,
    ) -> Result<AlgebraHom, HomError> {
        if source.base() != target.base() {
            return Err(HomError::BaseMismatch);
        }
        if images.len() != source.rank() || images.iter().any(|r| r.len() != target.rank()) {
            return Err(HomError::Shape);
        }
        let matrix: Vec<Row> = images.iter().map(|r| target.reduce(r)).collect();
        let h = AlgebraHom {
            source: source.clone(),
            target: target.clone(),
            matrix,
        };
        let b = source.base();
        for (i, t) in source.torsion().iter().enumerate() {
            if !target.is_zero(&linalg::scale(b, &h.matrix[i], b.p_pow(*t))) {
                return Err(HomError::NotWellDefined(i));
            }
        }
        if h.apply(&source.one()) != target.one() {
            return Err(HomError::NotUnital);
        }
        for i in 0..source.rank() {
            for j in i..source.rank() {
                let lhs = h.apply(&source.mul(&source.generator(i), &source.generator(j)));
                let rhs = target.mul(&h.matrix[i], &h.matrix[j]);
                if lhs != rhs {
                    return Err(HomError::NotMultiplicative(i, j));
                }
            }
        }
        Ok(h)
    }

    pub fn identity(alg: &LocalAlgebra) -> AlgebraHom {
        AlgebraHom {
            source: alg.clone(),
            target: alg.clone(),
            matrix: (0..alg.rank()).map(|i| alg.generator(i)).collect(),
        }
    }

    pub fn source(&self) -> &LocalAlgebra {
        &self.source
    }

    pub fn target(&self) -> &LocalAlgebra {
        &self.target
    }

    pub fn matrix(&self) -> &[Row] {
        &self.matrix
    }

    pub fn apply(&self, x: &[u64]) -> Row {
        let v = linalg::vec_mat(self.source.base(), x, &self.matrix, self.target.rank());
        self.target.reduce(&v)
    }

    pub fn compose(&self, after: &AlgebraHom) -> AlgebraHom {
        let matrix = self.matrix.iter().map(|r| after.apply(r)).collect();
        AlgebraHom {
            source: self.source.clone(),
            target: after.target.clone(),
            matrix,
        }
    }

    pub fn kernel(&self) -> Ideal {
        let ker = linalg::left_kernel(
            self.source.base(),
            &self.matrix,
            self.target.rank(),
            self.target.relations(),
        );
        Ideal::from_span_unchecked(&self.source, self.source.relations().sum(&ker))
    }

    pub fn image_log_order(&self) -> u32 {
        let img = self.target.relations().extend(self.matrix.iter().cloned());
        img.log_order() - self.target.relations().log_order()
    }

    pub fn is_surjective(&self) -> bool {
        self.image_log_order() == self.target.log_order()
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_zero()
    }

    pub fn is_bijective(&self) -> bool {
        self.is_surjective() && self.is_injective()
    }

    /// Image of an ideal of the source, as an ideal of the target.
    pub fn map_ideal(&self, i: &Ideal) -> Ideal {
        let gens: Vec<Row> = i.generators().iter().map(|g| self.apply(g)).collect();
        Ideal::from_generators(&self.target, &gens)
    }

    /// Preimage of an ideal of the target.
    pub fn preimage(&self, j: &Ideal) -> Ideal {
        let ker = linalg::left_kernel(
            self.source.base(),
            &self.matrix,
            self.target.rank(),
            j.span(),
        );
        Ideal::from_span_unchecked(&self.source, self.source.relations().sum(&ker))
    }
}

/// Presentation helper re-exported for callers that need subquotients.
pub fn subquotient(n: &Span, k: &Span) -> SubquotientPresentation {
    SubquotientPresentation::new(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn z9_is_local_with_maximal_ideal_3() {
        let a = catalog::base_ring_algebra(BaseRing::new(3, 2).unwrap());
        let m = a.max_ideal();
        assert_eq!(m, Ideal::from_generators(&a, &[vec![3]]));
        assert_eq!(a.residue_degree(), 1);
    }

    #[test]
    fn product_rings_are_rejected() {
        // F_3 x F_3 with idempotent basis.
        let b = BaseRing::new(3, 1).unwrap();
        let st = vec![vec![vec![1, 0], vec![0, 0]], vec![vec![0, 0], vec![0, 1]]];
        assert_eq!(
            LocalAlgebra::new(b, None, st, vec![1, 1]),
            Err(AlgebraError::NotLocal(2))
        );
    }

    #[test]
    fn non_associative_and_non_unital_rejected() {
        let b = BaseRing::new(3, 1).unwrap();
        // x^2 = 1 declared but unit wrong
        let st = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]];
        assert_eq!(
            LocalAlgebra::new(b, None, st.clone(), vec![0, 1]),
            Err(AlgebraError::NoUnit)
        );
        let e = |i: usize| crate::linalg::unit_vector(3, i);
        let z = vec![0; 3];
        let bad = vec![
            vec![e(0), e(1), e(2)],
            vec![e(1), e(2), z.clone()],
            vec![e(2), z, e(1)],
        ];
        assert!(matches!(
            LocalAlgebra::new(b, None, bad, e(0)),
            Err(AlgebraError::NotAssociative(..))
        ));
    }

    #[test]
    fn x_squared_3x_locality_by_enumeration() {
        let a = catalog::monogenic(BaseRing::new(3, 2).unwrap(), &[0, -3]);
        let m = a.max_ideal();
        assert_eq!(m, Ideal::from_generators(&a, &[vec![3, 0], vec![0, 1]]));
        let mut units = 0;
        for x in a.elements() {
            let invertible = a.elements().iter().any(|y| a.mul(&x, y) == a.one());
            assert_eq!(invertible, !m.contains(&x));
            units += invertible as usize;
        }
        assert_eq!(units, 81 - 27);
    }

    #[test]
    fn annihilator_of_x() {
        let a = catalog::monogenic(BaseRing::new(3, 2).unwrap(), &[0, -3]);
        let x = Ideal::from_generators(&a, &[vec![0, 1]]);
        assert_eq!(x.log_order(), 2);
        let ann = x.annihilator();
        assert_eq!(
            ann,
            Ideal::from_generators(&a, &[vec![a.base().from_i64(-3), 1]])
        );
        assert_eq!(ann.log_order(), 2);
        for y in a.elements() {
            let kills = a.is_zero(&a.mul(&y, &[0, 1]));
            assert_eq!(kills, ann.contains(&y));
        }
    }

    #[test]
    fn quotient_by_x_is_z9() {
        let a = catalog::monogenic(BaseRing::new(3, 2).unwrap(), &[0, -3]);
        let q = Ideal::from_generators(&a, &[vec![0, 1]])
            .quotient_algebra()
            .unwrap();
        assert_eq!(q.log_order(), 2);
        assert_eq!(q.rank(), 1);
    }

    #[test]
    fn gorenstein_examples() {
        let b3 = BaseRing::new(3, 1).unwrap();
        assert!(is_gorenstein(&catalog::dual_numbers(b3)));
        assert!(!is_gorenstein(&catalog::square_zero(b3, 2)));
        assert!(is_gorenstein(&catalog::base_ring_algebra(b3)));
    }

    #[test]
    fn finite_field_of_order_9() {
        let f9 = catalog::finite_field(3, 2).unwrap();
        assert!(f9.is_field());
        assert_eq!(f9.residue_degree(), 2);
        assert!(is_gorenstein(&f9));
        assert_eq!(f9.max_ideal().minimal_generators().min_generators, 0);
        assert_eq!(f9.unit_ideal().minimal_generators().min_generators, 1);
    }

    #[test]
    fn hom_kernel_and_surjectivity() {
        let b = BaseRing::new(3, 2).unwrap();
        let a = catalog::monogenic(b, &[0, -3]);
        let o = catalog::base_ring_algebra(b);
        let pi = AlgebraHom::new(&a, &o, vec![vec![1], vec![0]]).unwrap();
        assert!(pi.is_surjective());
        assert_eq!(pi.kernel(), Ideal::from_generators(&a, &[vec![0, 1]]));
        assert!(AlgebraHom::new(&a, &o, vec![vec![1], vec![1]]).is_err());
    }

    #[test]
    fn mismatched_parent() {
        let b = BaseRing::new(3, 2).unwrap();
        let a = catalog::base_ring_algebra(b);
        let c = catalog::dual_numbers(b);
        assert_eq!(
            a.max_ideal().sum(&c.max_ideal()),
            Err(AlgebraError::MismatchedParent)
        );
    }
}
