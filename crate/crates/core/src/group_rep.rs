//! Finite groups by multiplication table, their representations over local
//! algebras, involutions, and extensions assembled from cocycles.

use crate::linalg::{self, Row, Span};
use crate::ring_core::{AlgebraHom, Ideal, LocalAlgebra, Mat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_CLOSURE_CAP: usize = 2000;
const EXHAUSTIVE_ASSOCIATIVITY: usize = 512;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("closure exceeds {0} elements")]
    ClosureTooLarge(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("relation violated: rho({g}) rho({s}) != rho({g} * {s})")]
    RelationViolated { g: usize, s: usize },
    #[error("image of group element {0} is not invertible")]
    NonInvertibleImage(usize),
    #[error("expected {expected} images, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("coefficient algebra is not a field")]
    NotAField,
    #[error("cocycle identity fails at ({0}, {1})")]
    NotACocycle(usize, usize),
    #[error("element {0} does not have order two")]
    InvalidOrderTwoElement(usize),
    #[error("invalid involution: {0}")]
    InvalidInvolution(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct GroupInner {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
    generators: Vec<usize>,
    label: Option<String>,
    matrices: Option<(u64, Vec<Vec<Vec<u64>>>)>,
}

/// A finite group with its full multiplication table. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    inner: Arc<GroupInner>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.table == other.inner.table
    }
}
impl Eq for FiniteGroup {}

impl FiniteGroup {
    pub fn from_table(
        table: Vec<Vec<usize>>,
        label: Option<String>,
    ) -> Result<FiniteGroup, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::NotAGroup("empty table".into()));
        }
        if table
            .iter()
            .any(|r| r.len() != n || r.iter().any(|x| *x >= n))
        {
            return Err(GroupError::NotAGroup("table is not closed".into()));
        }
        let identity = (0..n)
            .find(|e| (0..n).all(|g| table[*e][g] == g && table[g][*e] == g))
            .ok_or_else(|| GroupError::NotAGroup("no identity".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|h| table[g][*h] == identity && table[*h][g] == identity)
                .ok_or_else(|| GroupError::NotAGroup(format!("element {g} has no inverse")))?;
        }
        let assoc = |a: usize, b: usize, c: usize| table[table[a][b]][c] == table[a][table[b][c]];
        if n <= EXHAUSTIVE_ASSOCIATIVITY {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(GroupError::NotAGroup(format!(
                                "not associative at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..200_000 {
                let (a, b, c) = (
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                    rng.random_range(0..n),
                );
                if !assoc(a, b, c) {
                    return Err(GroupError::NotAGroup(format!(
                        "not associative at ({a},{b},{c})"
                    )));
                }
            }
        }
        let mut g = FiniteGroup {
            inner: Arc::new(GroupInner {
                table,
                inverse,
                identity,
                generators: vec![],
                label,
                matrices: None,
            }),
        };
        let gens = g.greedy_generators();
        Arc::make_mut(&mut g.inner).generators = gens;
        Ok(g)
    }

    /// Closure of invertible matrices over `F_p`.
    pub fn from_matrix_generators(
        p: u64,
        gens: &[Vec<Vec<i64>>],
        cap: usize,
    ) -> Result<FiniteGroup, GroupError> {
        let f =
            crate::zmod::BaseRing::new(p, 1).map_err(|e| GroupError::NotAGroup(e.to_string()))?;
        let field = crate::catalog::base_ring_algebra(f);
        let n = gens.first().map_or(0, |g| g.len());
        let to_flat = |m: &Vec<Vec<i64>>| -> Vec<u64> {
            m.iter()
                .flat_map(|r| r.iter().map(|x| f.from_i64(*x)))
                .collect()
        };
        let gflat: Vec<Vec<u64>> = gens.iter().map(to_flat).collect();
        for (k, m) in gens.iter().enumerate() {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(GroupError::NotAGroup(format!(
                    "generator {k} has the wrong shape"
                )));
            }
            if !field.mat_is_invertible(&field.mat_from_scalars(m)) {
                return Err(GroupError::NotAGroup(format!("generator {k} is singular")));
            }
        }
        let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
            let mut out = vec![0; n * n];
            for i in 0..n {
                for k in 0..n {
                    let x = a[i * n + k];
                    if x == 0 {
                        continue;
                    }
                    for j in 0..n {
                        out[i * n + j] = (out[i * n + j] + x * b[k * n + j]) % p;
                    }
                }
            }
            out
        };
        let id: Vec<u64> = (0..n * n).map(|t| (t / n == t % n) as u64).collect();
        let mut elems = vec![id.clone()];
        let mut index: HashMap<Vec<u64>, usize> = HashMap::from([(id, 0)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &gflat {
                let x = mul(&elems[i], g);
                if !index.contains_key(&x) {
                    if elems.len() >= cap {
                        return Err(GroupError::ClosureTooLarge(cap));
                    }
                    index.insert(x.clone(), elems.len());
                    queue.push_back(elems.len());
                    elems.push(x);
                }
            }
        }
        let table: Vec<Vec<usize>> = elems
            .iter()
            .map(|a| elems.iter().map(|b| index[&mul(a, b)]).collect())
            .collect();
        let mut g = FiniteGroup::from_table(table, None)?;
        let gen_idx: Vec<usize> = gflat.iter().map(|m| index[m]).collect();
        let inner = Arc::make_mut(&mut g.inner);
        inner.generators = gen_idx;
        inner.matrices = Some((
            p,
            elems
                .iter()
                .map(|m| m.chunks(n).map(|r| r.to_vec()).collect())
                .collect(),
        ));
        Ok(g)
    }

    fn greedy_generators(&self) -> Vec<usize> {
        let n = self.order();
        let mut gens = Vec::new();
        let mut sub = self.subgroup(&gens);
        // prefer elements of large order so that cyclic groups get one generator
        let mut cands: Vec<usize> = (0..n).collect();
        cands.sort_by_key(|g| std::cmp::Reverse(self.element_order(*g)));
        for g in cands {
            if sub.len() == n {
                break;
            }
            if !sub.contains(&g) {
                gens.push(g);
                sub = self.subgroup(&gens);
            }
        }
        gens
    }

    pub fn set_generators(&mut self, gens: Vec<usize>) {
        assert_eq!(
            self.subgroup(&gens).len(),
            self.order(),
            "generators must generate"
        );
        Arc::make_mut(&mut self.inner).generators = gens;
    }

    pub fn set_label(&mut self, label: &str) {
        Arc::make_mut(&mut self.inner).label = Some(label.to_string());
    }

    pub fn label(&self) -> Option<&str> {
        self.inner.label.as_deref()
    }

    pub fn order(&self) -> usize {
        self.inner.table.len()
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.inner.table
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.inner.table[a][b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inner.inverse[a]
    }

    pub fn identity(&self) -> usize {
        self.inner.identity
    }

    pub fn generators(&self) -> &[usize] {
        &self.inner.generators
    }

    /// The matrices of a matrix group, indexed like the elements.
    pub fn matrices(&self) -> Option<(u64, &[Vec<Vec<u64>>])> {
        self.inner
            .matrices
            .as_ref()
            .map(|(p, m)| (*p, m.as_slice()))
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut x = g;
        let mut k = 1;
        while x != self.identity() {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// Sorted elements of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order()];
        seen[self.identity()] = true;
        let mut stack = vec![self.identity()];
        while let Some(x) = stack.pop() {
            for g in gens {
                let y = self.mul(x, *g);
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.order()).filter(|g| seen[*g]).collect()
    }

    /// Breadth-first spanning tree: for each non-identity element `g`, a pair
    /// `(h, s)` with `g = h * s`, `s` a generator and `h` earlier in `order`.
    pub fn spanning_tree(&self) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
        let n = self.order();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = vec![self.identity()];
        seen[self.identity()] = true;
        let mut i = 0;
        while i < order.len() {
            let h = order[i];
            for (k, s) in self.generators().iter().enumerate() {
                let g = self.mul(h, *s);
                if !seen[g] {
                    seen[g] = true;
                    parent[g] = Some((h, k));
                    order.push(g);
                }
            }
            i += 1;
        }
        (order, parent)
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let n = self.order();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for g in 0..n {
            if seen[g] {
                continue;
            }
            let mut class: Vec<usize> = (0..n)
                .map(|h| self.mul(self.mul(h, g), self.inv(h)))
                .collect();
            class.sort();
            class.dedup();
            for x in &class {
                seen[*x] = true;
            }
            out.push(class);
        }
        out
    }

    /// Abelianization order `|G / [G, G]|`.
    pub fn abelianization_order(&self) -> usize {
        let n = self.order();
        let comms: Vec<usize> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .map(|(a, b)| self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b))))
            .collect();
        n / self.subgroup(&comms).len()
    }
}

/// A representation `rho: G -> GL_n(A)` with images stored for every element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRep {
    group: FiniteGroup,
    alg: LocalAlgebra,
    degree: usize,
    images: Vec<Mat>,
}

/// Serializable generator images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepSpec {
    /// One matrix per group generator; entries are algebra coordinate rows.
    pub images: Vec<Vec<Vec<Vec<i64>>>>,
}

impl GroupRep {
    /// Extends generator images to the whole group and validates.
    pub fn new(
        group: &FiniteGroup,
        alg: &LocalAlgebra,
        gen_images: Vec<Mat>,
    ) -> Result<GroupRep, RepError> {
        let gens = group.generators();
        if gen_images.len() != gens.len() {
            return Err(RepError::Shape {
                expected: gens.len(),
                got: gen_images.len(),
            });
        }
        let degree = gen_images.first().map_or(1, |m| m.len());
        let gen_images: Vec<Mat> = gen_images.iter().map(|m| alg.mat_reduce(m)).collect();
        for (k, m) in gen_images.iter().enumerate() {
            if m.len() != degree || m.iter().any(|r| r.len() != degree) {
                return Err(RepError::Shape {
                    expected: degree,
                    got: m.len(),
                });
            }
            if !alg.mat_is_invertible(m) {
                return Err(RepError::NonInvertibleImage(gens[k]));
            }
        }
        let (order, parent) = group.spanning_tree();
        let mut images: Vec<Option<Mat>> = vec![None; group.order()];
        images[group.identity()] = Some(alg.mat_identity(degree));
        for g in order.iter().skip(1) {
            let (h, k) = parent[*g].expect("tree");
            let m = alg.mat_mul(images[h].as_ref().expect("parent first"), &gen_images[k]);
            images[*g] = Some(m);
        }
        let images: Vec<Mat> = images.into_iter().map(|m| m.expect("generated")).collect();
        for g in 0..group.order() {
            for (k, s) in gens.iter().enumerate() {
                if alg.mat_mul(&images[g], &gen_images[k]) != images[group.mul(g, *s)] {
                    return Err(RepError::RelationViolated { g, s: *s });
                }
            }
        }
        Ok(GroupRep {
            group: group.clone(),
            alg: alg.clone(),
            degree,
            images,
        })
    }

    /// From images of every element; checks all pairs.
    pub fn from_all_images(
        group: &FiniteGroup,
        alg: &LocalAlgebra,
        images: Vec<Mat>,
    ) -> Result<GroupRep, RepError> {
        if images.len() != group.order() {
            return Err(RepError::Shape {
                expected: group.order(),
                got: images.len(),
            });
        }
        let degree = images[0].len();
        let images: Vec<Mat> = images.iter().map(|m| alg.mat_reduce(m)).collect();
        for (g, m) in images.iter().enumerate() {
            if !alg.mat_is_invertible(m) {
                return Err(RepError::NonInvertibleImage(g));
            }
        }
        let n = group.order();
        for g in 0..n {
            for h in 0..n {
                if alg.mat_mul(&images[g], &images[h]) != images[group.mul(g, h)] {
                    return Err(RepError::RelationViolated { g, s: h });
                }
            }
        }
        Ok(GroupRep {
            group: group.clone(),
            alg: alg.clone(),
            degree,
            images,
        })
    }

    /// One-dimensional representation from character values on generators.
    pub fn character(
        group: &FiniteGroup,
        alg: &LocalAlgebra,
        gen_values: Vec<Row>,
    ) -> Result<GroupRep, RepError> {
        GroupRep::new(
            group,
            alg,
            gen_values.into_iter().map(|v| vec![vec![v]]).collect(),
        )
    }

    pub fn trivial(group: &FiniteGroup, alg: &LocalAlgebra, degree: usize) -> GroupRep {
        let images = vec![alg.mat_identity(degree); group.order()];
        GroupRep {
            group: group.clone(),
            alg: alg.clone(),
            degree,
            images,
        }
    }

    /// Exhaustive check of `rho(gh) = rho(g) rho(h)`.
    pub fn verify_homomorphism(&self) -> bool {
        let n = self.group.order();
        (0..n).all(|g| {
            (0..n).all(|h| {
                self.alg.mat_mul(&self.images[g], &self.images[h])
                    == self.images[self.group.mul(g, h)]
            })
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn algebra(&self) -> &LocalAlgebra {
        &self.alg
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn image(&self, g: usize) -> &Mat {
        &self.images[g]
    }

    pub fn images(&self) -> &[Mat] {
        &self.images
    }

    pub fn generator_images(&self) -> Vec<Mat> {
        self.group
            .generators()
            .iter()
            .map(|g| self.images[*g].clone())
            .collect()
    }

    pub fn trace(&self, g: usize) -> Row {
        self.alg.mat_trace(&self.images[g])
    }

    pub fn traces(&self) -> Vec<Row> {
        (0..self.group.order()).map(|g| self.trace(g)).collect()
    }

    /// Entries pushed through an algebra map.
    pub fn base_change(&self, hom: &AlgebraHom) -> GroupRep {
        assert_eq!(
            hom.source(),
            &self.alg,
            "base change along a map from the coefficient algebra"
        );
        let tgt = hom.target();
        let images = self
            .images
            .iter()
            .map(|m| tgt.mat_map(m, |x| hom.apply(x)))
            .collect();
        GroupRep {
            group: self.group.clone(),
            alg: tgt.clone(),
            degree: self.degree,
            images,
        }
    }

    /// Reduction modulo a proper ideal, with the quotient map.
    pub fn reduce_mod(&self, ideal: &Ideal) -> Option<(GroupRep, AlgebraHom)> {
        let (_, hom) = ideal.quotient_map().ok()?;
        Some((self.base_change(&hom), hom))
    }

    /// `P rho P^{-1}`.
    pub fn conjugate(&self, p: &Mat) -> Option<GroupRep> {
        let pinv = self.alg.mat_inverse(p)?;
        let images = self
            .images
            .iter()
            .map(|m| self.alg.mat_mul(&self.alg.mat_mul(p, m), &pinv))
            .collect();
        Some(GroupRep {
            group: self.group.clone(),
            alg: self.alg.clone(),
            degree: self.degree,
            images,
        })
    }

    pub fn direct_sum(&self, other: &GroupRep) -> GroupRep {
        assert_eq!(self.group, other.group);
        assert_eq!(self.alg, other.alg);
        let n = self.degree + other.degree;
        let images = (0..self.group.order())
            .map(|g| {
                let mut m = self.alg.mat_zero(n, n);
                for i in 0..self.degree {
                    for j in 0..self.degree {
                        m[i][j] = self.images[g][i][j].clone();
                    }
                }
                for i in 0..other.degree {
                    for j in 0..other.degree {
                        m[self.degree + i][self.degree + j] = other.images[g][i][j].clone();
                    }
                }
                m
            })
            .collect();
        GroupRep {
            group: self.group.clone(),
            alg: self.alg.clone(),
            degree: n,
            images,
        }
    }

    /// Diagonal block `[lo, hi)` as a representation, if it is one.
    pub fn block(&self, lo: usize, hi: usize) -> Result<GroupRep, RepError> {
        let images = self
            .images
            .iter()
            .map(|m| m[lo..hi].iter().map(|r| r[lo..hi].to_vec()).collect())
            .collect();
        GroupRep::from_all_images(&self.group, &self.alg, images)
    }

    /// Whether entries below the `n1 x n1` upper-left block vanish.
    pub fn is_block_upper_triangular(&self, n1: usize) -> bool {
        self.images
            .iter()
            .all(|m| (n1..self.degree).all(|i| (0..n1).all(|j| self.alg.is_zero(&m[i][j]))))
    }

    pub fn is_absolutely_irreducible(&self) -> Result<bool, RepError> {
        is_absolutely_irreducible(self)
    }

    pub fn centralizer(&self) -> Centralizer {
        centralizer(self)
    }
}

/// Coordinates of a matrix over `A` as a flat `O`-vector.
pub fn flatten(m: &Mat) -> Row {
    m.iter()
        .flat_map(|r| r.iter().flat_map(|x| x.iter().copied()))
        .collect()
}

pub fn unflatten(alg: &LocalAlgebra, v: &[u64], rows: usize, cols: usize) -> Mat {
    let d = alg.rank();
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| alg.reduce(&v[(i * cols + j) * d..(i * cols + j + 1) * d]))
                .collect()
        })
        .collect()
}

/// Relations of `M_{r x c}(A)` in flat coordinates.
pub fn matrix_relations(alg: &LocalAlgebra, rows: usize, cols: usize) -> Span {
    let mut t = Vec::with_capacity(rows * cols * alg.rank());
    for _ in 0..rows * cols {
        t.extend_from_slice(alg.torsion());
    }
    Span::torsion(alg.base(), &t)
}

/// Burnside test: the `F`-span of the images is all of `M_n(F)`.
pub fn is_absolutely_irreducible(rho: &GroupRep) -> Result<bool, RepError> {
    let alg = rho.algebra();
    if !alg.is_field() {
        return Err(RepError::NotAField);
    }
    let n = rho.degree();
    let d = alg.rank();
    let mut gens = Vec::new();
    for m in rho.images() {
        for k in 0..d {
            gens.push(flatten(&alg.mat_scale(m, &alg.generator(k))));
        }
    }
    let span = matrix_relations(alg, n, n).extend(gens);
    let rel = matrix_relations(alg, n, n);
    Ok(span.log_order() - rel.log_order() == (n * n) as u32 * alg.residue_degree())
}

#[derive(Clone, Debug)]
pub struct Centralizer {
    pub span: Span,
    pub log_order: u32,
    /// The centralizer is exactly the scalar matrices `A * I`.
    pub is_scalar: bool,
    /// Dimension over the coefficient field, when it is a field.
    pub dimension: Option<u32>,
}

/// Matrices commuting with every image.
pub fn centralizer(rho: &GroupRep) -> Centralizer {
    let alg = rho.algebra();
    let n = rho.degree();
    let d = alg.rank();
    let gens: Vec<&Mat> = rho
        .group()
        .generators()
        .iter()
        .map(|g| rho.image(*g))
        .collect();
    let width = n * n * d * gens.len().max(1);
    let mut mat = Vec::with_capacity(n * n * d);
    for i in 0..n {
        for j in 0..n {
            for k in 0..d {
                let mut x = alg.mat_zero(n, n);
                x[i][j] = alg.generator(k);
                let mut row = Vec::with_capacity(width);
                for g in &gens {
                    let c = alg.mat_sub(&alg.mat_mul(&x, g), &alg.mat_mul(g, &x));
                    row.extend(flatten(&c));
                }
                if gens.is_empty() {
                    row.resize(width, 0);
                }
                mat.push(row);
            }
        }
    }
    let mut rel_t = Vec::new();
    for _ in 0..n * n * gens.len().max(1) {
        rel_t.extend_from_slice(alg.torsion());
    }
    let rel = Span::torsion(alg.base(), &rel_t);
    let own = matrix_relations(alg, n, n);
    let ker = own.sum(&linalg::left_kernel(alg.base(), &mat, width, &rel));
    let scalars = own
        .extend((0..d).map(|k| flatten(&alg.mat_scale(&alg.mat_identity(n), &alg.generator(k)))));
    let log_order = ker.log_order() - own.log_order();
    let dimension = alg.is_field().then(|| log_order / alg.residue_degree());
    Centralizer {
        is_scalar: ker == scalars,
        span: ker,
        log_order,
        dimension,
    }
}

/// Kinds of anti-involutions on a group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InvolutionKind {
    Inverse,
    ConjugateInverse {
        element: usize,
    },
    /// `tau(g) = chi(g)^{-1} g^{-1}` for a character `chi` given on
    /// generators.
    Twisted {
        character: Vec<Vec<i64>>,
    },
}

/// `tau(g) = twist(g) * sigma(g)` with `sigma` an anti-automorphism of the
/// group and `twist` a character with values in the coefficient algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Involution {
    group: FiniteGroup,
    sigma: Vec<usize>,
    twist: Option<(LocalAlgebra, Vec<Row>)>,
    kind: InvolutionKind,
}

impl Involution {
    pub fn inverse(group: &FiniteGroup) -> Involution {
        let sigma = (0..group.order()).map(|g| group.inv(g)).collect();
        Involution {
            group: group.clone(),
            sigma,
            twist: None,
            kind: InvolutionKind::Inverse,
        }
    }

    pub fn conjugate_inverse(group: &FiniteGroup, c: usize) -> Result<Involution, RepError> {
        if c >= group.order() || c == group.identity() || group.mul(c, c) != group.identity() {
            return Err(RepError::InvalidOrderTwoElement(c));
        }
        let sigma = (0..group.order())
            .map(|g| group.mul(group.mul(c, group.inv(g)), c))
            .collect();
        Involution {
            group: group.clone(),
            sigma,
            twist: None,
            kind: InvolutionKind::ConjugateInverse { element: c },
        }
        .validated()
    }

    /// `tau(g) = chi(g)^{-1} g^{-1}` for a one-dimensional `chi`.
    pub fn twisted(chi: &GroupRep) -> Result<Involution, RepError> {
        if chi.degree() != 1 {
            return Err(RepError::InvalidInvolution(
                "twist must be a character".into(),
            ));
        }
        let alg = chi.algebra();
        let group = chi.group();
        let twist = (0..group.order())
            .map(|g| alg.inv(&chi.image(g)[0][0]).expect("unit"))
            .collect();
        let sigma = (0..group.order()).map(|g| group.inv(g)).collect();
        let character = group
            .generators()
            .iter()
            .map(|g| {
                chi.image(*g)[0][0]
                    .iter()
                    .map(|x| alg.base().to_signed(*x))
                    .collect()
            })
            .collect();
        Involution {
            group: group.clone(),
            sigma,
            twist: Some((alg.clone(), twist)),
            kind: InvolutionKind::Twisted { character },
        }
        .validated()
    }

    fn validated(self) -> Result<Involution, RepError> {
        let g = &self.group;
        let n = g.order();
        for a in 0..n {
            if self.sigma[self.sigma[a]] != a {
                return Err(RepError::InvalidInvolution(format!("sigma^2 != id at {a}")));
            }
            for b in 0..n {
                if self.sigma[g.mul(a, b)] != g.mul(self.sigma[b], self.sigma[a]) {
                    return Err(RepError::InvalidInvolution(format!(
                        "not an anti-automorphism at ({a},{b})"
                    )));
                }
            }
        }
        if let Some((alg, tw)) = &self.twist {
            for a in 0..n {
                if alg.mul(&tw[a], &tw[self.sigma[a]]) != alg.one() {
                    return Err(RepError::InvalidInvolution(format!(
                        "twist does not square to one at {a}"
                    )));
                }
                for b in 0..n {
                    if tw[g.mul(a, b)] != alg.mul(&tw[a], &tw[b]) {
                        return Err(RepError::InvalidInvolution(
                            "twist is not a character".into(),
                        ));
                    }
                }
            }
        }
        Ok(self)
    }

    pub fn from_kind(
        group: &FiniteGroup,
        alg: &LocalAlgebra,
        kind: &InvolutionKind,
    ) -> Result<Involution, RepError> {
        match kind {
            InvolutionKind::Inverse => Ok(Involution::inverse(group)),
            InvolutionKind::ConjugateInverse { element } => {
                Involution::conjugate_inverse(group, *element)
            }
            InvolutionKind::Twisted { character } => {
                let vals = character.iter().map(|v| alg.from_i64s(v)).collect();
                Involution::twisted(&GroupRep::character(group, alg, vals)?)
            }
        }
    }

    pub fn kind(&self) -> &InvolutionKind {
        &self.kind
    }

    pub fn sigma(&self, g: usize) -> usize {
        self.sigma[g]
    }

    /// Scalar factor of `tau(g)`, or `None` for the untwisted case.
    pub fn twist(&self, g: usize) -> Option<&Row> {
        self.twist.as_ref().map(|(_, t)| &t[g])
    }

    pub fn twist_algebra(&self) -> Option<&LocalAlgebra> {
        self.twist.as_ref().map(|(a, _)| a)
    }

    /// `T(tau(g)) = T(g)` for all `g`.
    pub fn check_self_dual(&self, alg: &LocalAlgebra, values: &[Row]) -> bool {
        (0..self.group.order()).all(|g| {
            let v = &values[self.sigma[g]];
            let tv = match self.twist(g) {
                Some(t) => alg.mul(t, v),
                None => v.clone(),
            };
            tv == values[g]
        })
    }
}

/// `rho_0(g) = [[rho1(g), f(g) rho2(g)], [0, rho2(g)]]` for a cocycle `f` of
/// `Hom(rho2, rho1)` with action `g.phi = rho1(g) phi rho2(g)^{-1}`.
pub fn assemble_extension(
    rho1: &GroupRep,
    rho2: &GroupRep,
    f: &[Mat],
) -> Result<GroupRep, RepError> {
    let g = rho1.group();
    let alg = rho1.algebra();
    let n = g.order();
    if f.len() != n {
        return Err(RepError::Shape {
            expected: n,
            got: f.len(),
        });
    }
    let inv2: Vec<Mat> = (0..n).map(|x| rho2.image(g.inv(x)).clone()).collect();
    for a in 0..n {
        for b in 0..n {
            let act = alg.mat_mul(&alg.mat_mul(rho1.image(a), &f[b]), &inv2[a]);
            if alg.mat_add(&f[a], &act) != alg.mat_reduce(&f[g.mul(a, b)]) {
                return Err(RepError::NotACocycle(a, b));
            }
        }
    }
    let (n1, n2) = (rho1.degree(), rho2.degree());
    let images = (0..n)
        .map(|x| {
            let mut m = alg.mat_zero(n1 + n2, n1 + n2);
            let b = alg.mat_mul(&f[x], rho2.image(x));
            for i in 0..n1 {
                for j in 0..n1 {
                    m[i][j] = rho1.image(x)[i][j].clone();
                }
                for j in 0..n2 {
                    m[i][n1 + j] = b[i][j].clone();
                }
            }
            for i in 0..n2 {
                for j in 0..n2 {
                    m[n1 + i][n1 + j] = rho2.image(x)[i][j].clone();
                }
            }
            m
        })
        .collect();
    GroupRep::from_all_images(g, alg, images)
}

/// The cocycle `g -> B(g) rho2(g)^{-1}` of a block upper-triangular rep.
pub fn extension_cocycle(rho0: &GroupRep, n1: usize) -> Vec<Mat> {
    let alg = rho0.algebra();
    let g = rho0.group();
    (0..g.order())
        .map(|x| {
            let m = rho0.image(x);
            let b: Mat = m[..n1].iter().map(|r| r[n1..].to_vec()).collect();
            let d: Mat = m[n1..].iter().map(|r| r[n1..].to_vec()).collect();
            alg.mat_mul(&b, &alg.mat_inverse(&d).expect("invertible block"))
        })
        .collect()
}

/// Whether a block upper-triangular `rho_0` is split, i.e. its extension
/// class is a coboundary.
pub fn is_split(rho0: &GroupRep, n1: usize) -> Result<bool, RepError> {
    let rho1 = rho0.block(0, n1)?;
    let rho2 = rho0.block(n1, rho0.degree())?;
    let f = extension_cocycle(rho0, n1);
    let m = crate::cohomology::GModule::hom(&rho2, &rho1);
    Ok(m.is_coboundary(&m.flatten_cochain(&f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::zmod::BaseRing;

    fn sign(alg: &LocalAlgebra, g: &FiniteGroup) -> GroupRep {
        let m1 = alg.scalar(alg.base().from_i64(-1));
        GroupRep::character(g, alg, vec![alg.one(), m1]).unwrap()
    }

    #[test]
    fn matrix_generated_s3() {
        let r = vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]];
        let s = vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]];
        let g = FiniteGroup::from_matrix_generators(5, &[r, s], 2000).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        assert!(matches!(
            FiniteGroup::from_matrix_generators(5, &[vec![vec![1, 1], vec![0, 1]]], 3),
            Err(GroupError::ClosureTooLarge(3))
        ));
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(FiniteGroup::from_table(vec![vec![0, 1], vec![1, 1]], None).is_err());
    }

    #[test]
    fn sign_character_and_relations() {
        let g = catalog::symmetric3();
        let f3 = catalog::base_ring_algebra(BaseRing::new(3, 1).unwrap());
        let s = sign(&f3, &g);
        assert!(s.verify_homomorphism());
        assert_eq!(s.is_absolutely_irreducible(), Ok(true));
        let bad = GroupRep::character(&g, &f3, vec![f3.scalar(2), f3.one()]);
        assert!(matches!(bad, Err(RepError::RelationViolated { .. })));
        let sing = GroupRep::character(&g, &f3, vec![f3.one(), f3.zero()]);
        assert!(matches!(sing, Err(RepError::NonInvertibleImage(_))));
    }

    #[test]
    fn running_extension_is_nonsplit_with_scalar_centralizer() {
        let g = catalog::symmetric3();
        let f3 = catalog::base_ring_algebra(BaseRing::new(3, 1).unwrap());
        let one = GroupRep::trivial(&g, &f3, 1);
        let sg = sign(&f3, &g);
        // f(r) = 1, f(s) = 0 extended as a cocycle
        let m = crate::cohomology::GModule::hom(&sg, &one);
        let f = m.extend_cocycle(&[vec![1], vec![0]]).unwrap();
        let mats: Vec<Mat> = m.unflatten_cochain(&f);
        let rho0 = assemble_extension(&one, &sg, &mats).unwrap();
        assert_eq!(is_split(&rho0, 1), Ok(false));
        assert_eq!(rho0.is_absolutely_irreducible(), Ok(false));
        let c = rho0.centralizer();
        assert!(c.is_scalar);
        assert_eq!(c.dimension, Some(1));
        let split = one.direct_sum(&sg);
        assert_eq!(is_split(&split, 1), Ok(true));
        assert_eq!(split.centralizer().dimension, Some(2));
        assert_eq!(
            GroupRep::trivial(&g, &f3, 2).centralizer().dimension,
            Some(4)
        );
    }

    #[test]
    fn involutions() {
        let g = catalog::symmetric3();
        let f3 = catalog::base_ring_algebra(BaseRing::new(3, 1).unwrap());
        let inv = Involution::inverse(&g);
        let t = GroupRep::trivial(&g, &f3, 1).direct_sum(&sign(&f3, &g));
        assert!(inv.check_self_dual(&f3, &t.traces()));
        assert!(Involution::conjugate_inverse(&g, 3).is_ok());
        assert!(matches!(
            Involution::conjugate_inverse(&g, 1),
            Err(RepError::InvalidOrderTwoElement(1))
        ));
        let tw = Involution::twisted(&sign(&f3, &g)).unwrap();
        let vals = t.traces();
        let expected = (0..6).all(|x| {
            let s = sign(&f3, &g).image(x)[0][0].clone();
            vals[x] == f3.mul(&f3.inv(&s).unwrap(), &vals[g.inv(x)])
        });
        assert_eq!(tw.check_self_dual(&f3, &vals), expected);
    }
}
