//! Pseudocharacters, faithful Cayley-Hamilton quotients, generalized matrix
//! algebra decompositions and reducibility ideals.

use serde::Serialize;
use thiserror::Error;

use crate::group_rep::{self, FiniteGroup, GroupRep, Involution, RepError};
use crate::linalg::{self, LeftSolver, Presentation, Row, Span};
use crate::ring_core::{
    all_ideals, AlgebraError, AlgebraHom, Ideal, LocalAlgebra, Mat, ModuleInvariants,
};

const NEWTON_CAP: usize = 64;
const SEARCH_CAP: u128 = 2_000_000;
/// Largest `log_p |A|` accepted by the ideal-lattice oracles.
pub const EXHAUSTIVE_LOG_CAP: u32 = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PseudocharError {
    #[error("T(1) is not the degree {0}")]
    WrongDegree(usize),
    #[error("T(gh) != T(hg) at ({0}, {1})")]
    NotCentral(usize, usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a residual idempotent pair: {0}")]
    NotResidualIdempotent(String),
    #[error("residual idempotents are not fixed by the involution")]
    NotTauFixed,
    #[error("idempotent lifting did not converge in {0} steps")]
    NoConvergence(usize),
    #[error("T is not invariant under the involution")]
    NotSelfDual,
    #[error("corner modules need {0} and {1} generators")]
    CornersNotCyclic(usize, usize),
    #[error("degree {0} requires p > {0}, got p = {1}")]
    SmallPrime(usize, u64),
    #[error("search space too large: {0}")]
    TooLargeForExhaustion(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// An `A`-valued central function `T` on `G` with `T(1) = n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pseudocharacter {
    group: FiniteGroup,
    alg: LocalAlgebra,
    values: Vec<Row>,
    degree: usize,
}

impl Pseudocharacter {
    pub fn new(
        group: &FiniteGroup,
        alg: &LocalAlgebra,
        values: Vec<Row>,
        degree: usize,
    ) -> Result<Self, PseudocharError> {
        if values.len() != group.order() {
            return Err(PseudocharError::Shape(format!(
                "{} values for a group of order {}",
                values.len(),
                group.order()
            )));
        }
        let values: Vec<Row> = values.iter().map(|v| alg.reduce(v)).collect();
        if values[group.identity()] != alg.scalar(alg.base().reduce(degree as u64)) {
            return Err(PseudocharError::WrongDegree(degree));
        }
        for a in 0..group.order() {
            for b in 0..a {
                if values[group.mul(a, b)] != values[group.mul(b, a)] {
                    return Err(PseudocharError::NotCentral(a, b));
                }
            }
        }
        Ok(Pseudocharacter {
            group: group.clone(),
            alg: alg.clone(),
            values,
            degree,
        })
    }

    pub fn from_rep(rho: &GroupRep) -> Self {
        Pseudocharacter {
            group: rho.group().clone(),
            alg: rho.algebra().clone(),
            values: rho.traces(),
            degree: rho.degree(),
        }
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

    pub fn values(&self) -> &[Row] {
        &self.values
    }

    pub fn value(&self, g: usize) -> &Row {
        &self.values[g]
    }

    /// `T` extended `A`-linearly to the group algebra.
    pub fn eval(&self, x: &[u64]) -> Row {
        let d = self.alg.rank();
        let mut acc = self.alg.zero();
        for (g, v) in self.values.iter().enumerate() {
            let c = &x[g * d..(g + 1) * d];
            if !linalg::is_zero(c) {
                acc = self.alg.add(&acc, &self.alg.mul(c, v));
            }
        }
        acc
    }

    pub fn base_change(&self, hom: &AlgebraHom) -> Self {
        Pseudocharacter {
            group: self.group.clone(),
            alg: hom.target().clone(),
            values: self.values.iter().map(|v| hom.apply(v)).collect(),
            degree: self.degree,
        }
    }

    pub fn sum(&self, other: &Pseudocharacter) -> Self {
        Pseudocharacter {
            group: self.group.clone(),
            alg: self.alg.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| self.alg.add(a, b))
                .collect(),
            degree: self.degree + other.degree,
        }
    }

    /// `sum_{s in S_{k+1}} sgn(s) T^s(g_1, ..., g_{k+1}) = 0` on all tuples.
    pub fn satisfies_identity(&self, k: usize) -> bool {
        let perms = signed_cycle_types(k + 1);
        let n = self.group.order();
        let mut tuple = vec![0usize; k + 1];
        loop {
            let mut total = self.alg.zero();
            for (sign, cycles) in &perms {
                let mut term = self.alg.one();
                for cyc in cycles {
                    let g = cyc.iter().fold(self.group.identity(), |acc, i| {
                        self.group.mul(acc, tuple[*i])
                    });
                    term = self.alg.mul(&term, &self.values[g]);
                }
                total = if *sign {
                    self.alg.add(&total, &term)
                } else {
                    self.alg.sub(&total, &term)
                };
            }
            if !self.alg.is_zero(&total) {
                return false;
            }
            let mut i = 0;
            loop {
                if i == tuple.len() {
                    return true;
                }
                tuple[i] += 1;
                if tuple[i] < n {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
        }
    }
}

pub fn trace_pseudocharacter(rho: &GroupRep) -> Pseudocharacter {
    Pseudocharacter::from_rep(rho)
}

/// Every permutation of `0..m` as (is_even, cycles).
fn signed_cycle_types(m: usize) -> Vec<(bool, Vec<Vec<usize>>)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    permute(&mut perm, 0, &mut out);
    out
}

fn permute(perm: &mut Vec<usize>, k: usize, out: &mut Vec<(bool, Vec<Vec<usize>>)>) {
    if k == perm.len() {
        let mut seen = vec![false; perm.len()];
        let mut cycles = Vec::new();
        for s in 0..perm.len() {
            if seen[s] {
                continue;
            }
            let mut cyc = vec![];
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = perm[i];
            }
            cycles.push(cyc);
        }
        let even = (perm.len() - cycles.len()).is_multiple_of(2);
        out.push((even, cycles));
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, out);
        perm.swap(k, i);
    }
}

/// `A[G]` with coordinates `g * rank(A) + k`.
#[derive(Clone, Debug)]
pub struct GroupAlgebra {
    group: FiniteGroup,
    alg: LocalAlgebra,
}

impl GroupAlgebra {
    pub fn new(group: &FiniteGroup, alg: &LocalAlgebra) -> Self {
        GroupAlgebra {
            group: group.clone(),
            alg: alg.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.group.order() * self.alg.rank()
    }

    pub fn relations(&self) -> Span {
        let t: Vec<u32> = (0..self.group.order())
            .flat_map(|_| self.alg.torsion().iter().copied())
            .collect();
        Span::torsion(self.alg.base(), &t)
    }

    pub fn element(&self, g: usize) -> Row {
        self.scalar_at(g, &self.alg.one())
    }

    pub fn scalar_at(&self, g: usize, a: &[u64]) -> Row {
        let d = self.alg.rank();
        let mut v = vec![0; self.dim()];
        v[g * d..(g + 1) * d].copy_from_slice(&self.alg.reduce(a));
        v
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Row {
        let d = self.alg.rank();
        let n = self.group.order();
        let mut out = vec![0; self.dim()];
        for g in 0..n {
            let a = &x[g * d..(g + 1) * d];
            if linalg::is_zero(a) {
                continue;
            }
            for h in 0..n {
                let b = &y[h * d..(h + 1) * d];
                if linalg::is_zero(b) {
                    continue;
                }
                let c = self.alg.mul(a, b);
                let k = self.group.mul(g, h);
                let slot = &mut out[k * d..(k + 1) * d];
                let s = self.alg.add(slot, &c);
                slot.copy_from_slice(&s);
            }
        }
        out
    }
}

/// `ker T = {x : T(xy) = 0 for all y}` in `A[G]`.
pub fn kernel_of_trace_form(t: &Pseudocharacter) -> Span {
    let g = &t.group;
    let alg = &t.alg;
    let ga = GroupAlgebra::new(g, alg);
    let (n, d) = (g.order(), alg.rank());
    let mat: Vec<Row> = (0..n)
        .flat_map(|x| {
            (0..d).map(move |k| {
                let mut row = Vec::with_capacity(n * d);
                for y in 0..n {
                    row.extend(alg.mul(&alg.generator(k), &t.values[g.mul(x, y)]));
                }
                row
            })
        })
        .collect();
    let rel = ga.relations();
    rel.sum(&linalg::left_kernel(alg.base(), &mat, n * d, &rel))
}

/// `K_T = {x : T(x) = 0}` in `A[G]`.
pub fn trace_kernel(t: &Pseudocharacter) -> Span {
    let alg = &t.alg;
    let ga = GroupAlgebra::new(&t.group, alg);
    let d = alg.rank();
    let mat: Vec<Row> = (0..t.group.order())
        .flat_map(|x| (0..d).map(move |k| alg.mul(&alg.generator(k), &t.values[x])))
        .collect();
    ga.relations()
        .sum(&linalg::left_kernel(alg.base(), &mat, d, alg.relations()))
}

/// Kernel of `A[G] -> M_n(A)`.
pub fn kernel_of_rho(rho: &GroupRep) -> Span {
    let alg = rho.algebra();
    let n = rho.degree();
    let ga = GroupAlgebra::new(rho.group(), alg);
    let d = alg.rank();
    let mat: Vec<Row> = (0..rho.group().order())
        .flat_map(|x| {
            (0..d).map(move |k| group_rep::flatten(&alg.mat_scale(rho.image(x), &alg.generator(k))))
        })
        .collect();
    let rel = group_rep::matrix_relations(alg, n, n);
    ga.relations()
        .sum(&linalg::left_kernel(alg.base(), &mat, n * n * d, &rel))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "result")]
pub enum KernelComparison {
    Equal,
    /// `ker rho` is strictly smaller; `witness` lies in `ker T` only.
    Strict {
        witness: Row,
    },
}

pub fn compare_kernels(rho: &GroupRep) -> KernelComparison {
    let kt = kernel_of_trace_form(&Pseudocharacter::from_rep(rho));
    let kr = kernel_of_rho(rho);
    debug_assert!(kt.contains_span(&kr));
    match kt.rows().iter().find(|r| !kr.contains(r)) {
        None => KernelComparison::Equal,
        Some(w) => KernelComparison::Strict { witness: w.clone() },
    }
}

/// Residual block shape of a representation: `rho mod m_A` is block upper
/// triangular with blocks of sizes `n1` and `n - n1`.
#[derive(Clone, Debug)]
pub struct ResidualShape {
    pub n1: usize,
    pub rho: GroupRep,
}

impl ResidualShape {
    pub fn new(rho: &GroupRep, n1: usize) -> Result<Self, PseudocharError> {
        let n = rho.degree();
        if n1 == 0 || n1 >= n {
            return Err(PseudocharError::Shape(format!(
                "block size {n1} in degree {n}"
            )));
        }
        let alg = rho.algebra();
        let m = alg.max_ideal();
        for g in 0..rho.group().order() {
            for i in n1..n {
                for j in 0..n1 {
                    if !m.contains(&rho.image(g)[i][j]) {
                        return Err(PseudocharError::Shape(format!(
                            "residual lower-left block is nonzero at {g}"
                        )));
                    }
                }
            }
        }
        Ok(ResidualShape {
            n1,
            rho: rho.clone(),
        })
    }

    pub fn sizes(&self) -> [usize; 2] {
        [self.n1, self.rho.degree() - self.n1]
    }

    /// Traces of the diagonal blocks, as lifts to `A` of the residual traces.
    pub fn block_traces(&self) -> [Vec<Row>; 2] {
        let alg = self.rho.algebra();
        let n = self.rho.degree();
        let tr = |lo: usize, hi: usize| -> Vec<Row> {
            (0..self.rho.group().order())
                .map(|g| {
                    (lo..hi).fold(alg.zero(), |acc, i| alg.add(&acc, &self.rho.image(g)[i][i]))
                })
                .collect()
        };
        [tr(0, self.n1), tr(self.n1, n)]
    }

    /// `x -> (diagonal blocks of rho(x))` on `A[G]`, one row per basis element.
    fn block_matrix(&self) -> (Vec<Row>, Span) {
        let alg = self.rho.algebra();
        let d = alg.rank();
        let n = self.rho.degree();
        let n1 = self.n1;
        let mut rows = Vec::new();
        for g in 0..self.rho.group().order() {
            let img = self.rho.image(g);
            for k in 0..d {
                let e = alg.generator(k);
                let mut row = Vec::new();
                for (lo, hi) in [(0, n1), (n1, n)] {
                    for i in lo..hi {
                        for j in lo..hi {
                            row.extend(alg.mul(&e, &img[i][j]));
                        }
                    }
                }
                rows.push(row);
            }
        }
        let entries = n1 * n1 + (n - n1) * (n - n1);
        (rows, block_span(alg.max_ideal().span(), entries))
    }
}

/// `span` repeated in `blocks` consecutive coordinate blocks.
fn block_span(span: &Span, blocks: usize) -> Span {
    let w = span.ncols();
    let rows = (0..blocks).flat_map(|b| {
        span.rows().iter().map(move |r| {
            let mut v = vec![0; w * blocks];
            v[b * w..(b + 1) * w].copy_from_slice(r);
            v
        })
    });
    Span::new(span.ring(), w * blocks, rows)
}

/// A finite `A`-algebra `S` with an `A`-linear trace, given by a basis over
/// `Z/p^e` and structure constants.
#[derive(Clone, Debug)]
pub struct TracedAlgebra {
    coeff: LocalAlgebra,
    degree: usize,
    torsion: Vec<u32>,
    rel: Span,
    mult: Vec<Vec<Row>>,
    unit: Row,
    scalars: Vec<Row>,
    trace: Vec<Row>,
    radical: Span,
    residual: Option<[Row; 2]>,
    matrix_units: [Option<Row>; 2],
    sizes: Option<[usize; 2]>,
    group_images: Option<Vec<Row>>,
    involution: Option<Vec<Row>>,
}

impl TracedAlgebra {
    /// `S = A[G] / ker T`, with residual idempotents taken from `shape` and
    /// the involution, if any, carried over.
    pub fn faithful_quotient(
        t: &Pseudocharacter,
        shape: Option<&ResidualShape>,
        inv: Option<&Involution>,
    ) -> Result<Self, PseudocharError> {
        let alg = &t.alg;
        let g = &t.group;
        let ga = GroupAlgebra::new(g, alg);
        let d = alg.rank();
        let kernel = kernel_of_trace_form(t);
        let pres = Presentation::of_quotient(&kernel);
        let dim = pres.dim();
        let lifts: Vec<Row> = (0..dim)
            .map(|a| pres.lift(&linalg::unit_vector(dim, a)))
            .collect();
        let mult = lifts
            .iter()
            .map(|x| lifts.iter().map(|y| pres.project(&ga.mul(x, y))).collect())
            .collect();
        let scalars = (0..d)
            .map(|k| pres.project(&ga.scalar_at(g.identity(), &alg.generator(k))))
            .collect();
        let trace = lifts.iter().map(|x| t.eval(x)).collect();
        let group_images: Vec<Row> = (0..g.order())
            .map(|x| pres.project(&ga.element(x)))
            .collect();
        let involution = match inv {
            None => None,
            Some(inv) => {
                if let Some(ta) = inv.twist_algebra() {
                    if ta != alg {
                        return Err(PseudocharError::Shape(
                            "twist has another coefficient algebra".into(),
                        ));
                    }
                }
                if !inv.check_self_dual(alg, &t.values) {
                    return Err(PseudocharError::NotSelfDual);
                }
                let tau_ga = |x: &Row| -> Row {
                    let mut out = vec![0; ga.dim()];
                    for h in 0..g.order() {
                        let c = &x[h * d..(h + 1) * d];
                        if linalg::is_zero(c) {
                            continue;
                        }
                        let c = match inv.twist(h) {
                            Some(tw) => alg.mul(c, tw),
                            None => c.to_vec(),
                        };
                        let s = inv.sigma(h);
                        let slot = alg.add(&out[s * d..(s + 1) * d], &c);
                        out[s * d..(s + 1) * d].copy_from_slice(&slot);
                    }
                    out
                };
                Some(lifts.iter().map(|x| pres.project(&tau_ga(x))).collect())
            }
        };
        let mut s = TracedAlgebra {
            coeff: alg.clone(),
            degree: t.degree,
            torsion: pres.exps().to_vec(),
            rel: Span::torsion(alg.base(), pres.exps()),
            mult,
            unit: pres.project(&ga.element(g.identity())),
            scalars,
            trace,
            radical: Span::zero(alg.base(), dim),
            residual: None,
            matrix_units: [None, None],
            sizes: None,
            group_images: Some(group_images),
            involution,
        };
        s.radical = s.trace_form_radical();
        if let Some(shape) = shape {
            if shape.rho.degree() != t.degree {
                return Err(PseudocharError::Shape(
                    "residual shape has another degree".into(),
                ));
            }
            let (mat, rel) = shape.block_matrix();
            let psi: Vec<Row> = lifts
                .iter()
                .map(|x| linalg::vec_mat(alg.base(), x, &mat, rel.ncols()))
                .collect();
            let solver = LeftSolver::new(alg.base(), &psi, rel.ncols(), &rel);
            let [n1, n2] = shape.sizes();
            let target = |block: usize, unit_only: bool| -> Row {
                let mut v = Vec::with_capacity(rel.ncols());
                for (b, nb) in [n1, n2].into_iter().enumerate() {
                    for i in 0..nb {
                        for j in 0..nb {
                            let on = b == block && i == j && (!unit_only || i == 0);
                            v.extend(if on { alg.one() } else { alg.zero() });
                        }
                    }
                }
                v
            };
            let srel = s.rel.clone();
            let solve = |rhs: Row| -> Result<Row, PseudocharError> {
                solver.solve(&rhs).map(|x| srel.reduce(&x)).ok_or_else(|| {
                    PseudocharError::NotResidualIdempotent(
                        "residual block is not reached by S".into(),
                    )
                })
            };
            s.residual = Some([solve(target(0, false))?, solve(target(1, false))?]);
            s.matrix_units = [
                if n1 > 1 {
                    Some(solve(target(0, true))?)
                } else {
                    None
                },
                if n2 > 1 {
                    Some(solve(target(1, true))?)
                } else {
                    None
                },
            ];
            s.sizes = Some([n1, n2]);
        }
        Ok(s)
    }

    /// `M_n(A)` with the matrix trace and residual idempotents splitting
    /// `n = n1 + (n - n1)`.
    pub fn full_matrix(alg: &LocalAlgebra, n: usize, n1: usize) -> Result<Self, PseudocharError> {
        if n1 == 0 || n1 >= n {
            return Err(PseudocharError::Shape(format!(
                "block size {n1} in degree {n}"
            )));
        }
        let d = alg.rank();
        let dim = n * n * d;
        let idx = |i: usize, j: usize, k: usize| (i * n + j) * d + k;
        let mut mult = vec![vec![vec![0; dim]; dim]; dim];
        for i in 0..n {
            for j in 0..n {
                for k in 0..d {
                    for m in 0..n {
                        for k2 in 0..d {
                            let c = alg.mul(&alg.generator(k), &alg.generator(k2));
                            let row = &mut mult[idx(i, j, k)][idx(j, m, k2)];
                            row[idx(i, m, 0)..idx(i, m, 0) + d].copy_from_slice(&c);
                        }
                    }
                }
            }
        }
        let diag = |lo: usize, hi: usize, k: usize| -> Row {
            let mut v = vec![0; dim];
            for i in lo..hi {
                v[idx(i, i, k)] = 1;
            }
            v
        };
        let mut trace = vec![alg.zero(); dim];
        for i in 0..n {
            for k in 0..d {
                trace[idx(i, i, k)] = alg.generator(k);
            }
        }
        let torsion: Vec<u32> = (0..n * n)
            .flat_map(|_| alg.torsion().iter().copied())
            .collect();
        let tau = (0..dim)
            .map(|a| {
                let (ij, k) = (a / d, a % d);
                linalg::unit_vector(dim, idx(ij % n, ij / n, k))
            })
            .collect();
        let mut s = TracedAlgebra {
            coeff: alg.clone(),
            degree: n,
            rel: Span::torsion(alg.base(), &torsion),
            torsion,
            mult,
            unit: diag(0, n, 0),
            scalars: (0..d).map(|k| diag(0, n, k)).collect(),
            trace,
            radical: Span::zero(alg.base(), dim),
            residual: Some([diag(0, n1, 0), diag(n1, n, 0)]),
            matrix_units: [
                (n1 > 1).then(|| diag(0, 1, 0)),
                (n - n1 > 1).then(|| diag(n1, n1 + 1, 0)),
            ],
            sizes: Some([n1, n - n1]),
            group_images: None,
            involution: Some(tau),
        };
        s.radical = s.trace_form_radical();
        Ok(s)
    }

    fn trace_form_radical(&self) -> Span {
        let dim = self.dim();
        let alg = &self.coeff;
        let mat: Vec<Row> = (0..dim)
            .map(|a| {
                (0..dim)
                    .flat_map(|b| self.trace(&self.mult[a][b]))
                    .collect()
            })
            .collect();
        let rel = block_span(alg.max_ideal().span(), dim);
        self.rel.sum(&linalg::left_kernel(
            alg.base(),
            &mat,
            dim * alg.rank(),
            &rel,
        ))
    }

    pub fn dim(&self) -> usize {
        self.torsion.len()
    }

    pub fn coefficients(&self) -> &LocalAlgebra {
        &self.coeff
    }

    pub fn degree(&self) -> usize {
        self.degree
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

    pub fn radical(&self) -> &Span {
        &self.radical
    }

    pub fn residual_idempotents(&self) -> Option<&[Row; 2]> {
        self.residual.as_ref()
    }

    pub fn block_sizes(&self) -> Option<[usize; 2]> {
        self.sizes
    }

    pub fn has_involution(&self) -> bool {
        self.involution.is_some()
    }

    pub fn one(&self) -> Row {
        self.unit.clone()
    }

    pub fn zero(&self) -> Row {
        vec![0; self.dim()]
    }

    pub fn basis(&self, a: usize) -> Row {
        linalg::unit_vector(self.dim(), a)
    }

    /// Image of a group element, for algebras built from a group.
    pub fn group_element(&self, g: usize) -> Option<&Row> {
        self.group_images.as_ref().map(|v| &v[g])
    }

    pub fn reduce(&self, x: &[u64]) -> Row {
        self.rel.reduce(x)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Row {
        self.reduce(&linalg::add(self.coeff.base(), x, y))
    }

    pub fn sub(&self, x: &[u64], y: &[u64]) -> Row {
        self.reduce(&linalg::sub(self.coeff.base(), x, y))
    }

    pub fn scale(&self, x: &[u64], c: u64) -> Row {
        self.reduce(&linalg::scale(self.coeff.base(), x, c))
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Row {
        let base = self.coeff.base();
        let mut out = vec![0; self.dim()];
        for (a, xa) in x.iter().enumerate() {
            if *xa == 0 {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if *yb == 0 {
                    continue;
                }
                linalg::axpy(base, &mut out, &self.mult[a][b], base.mul(*xa, *yb));
            }
        }
        self.reduce(&out)
    }

    /// The element `a * 1_S` for `a` in `A`.
    pub fn scalar(&self, a: &[u64]) -> Row {
        let base = self.coeff.base();
        let mut out = vec![0; self.dim()];
        for (k, c) in a.iter().enumerate() {
            linalg::axpy(base, &mut out, &self.scalars[k], *c);
        }
        self.reduce(&out)
    }

    pub fn trace(&self, x: &[u64]) -> Row {
        let base = self.coeff.base();
        let mut out = self.coeff.zero();
        for (a, c) in x.iter().enumerate() {
            linalg::axpy(base, &mut out, &self.trace[a], *c);
        }
        self.coeff.reduce(&out)
    }

    pub fn involution(&self, x: &[u64]) -> Option<Row> {
        self.involution
            .as_ref()
            .map(|tau| self.reduce(&linalg::vec_mat(self.coeff.base(), x, tau, self.dim())))
    }

    pub fn is_idempotent(&self, x: &[u64]) -> bool {
        self.mul(x, x) == self.reduce(x)
    }

    /// `span{ x u_b y }` over the basis, plus relations.
    pub fn sandwich(&self, x: &[u64], y: &[u64]) -> Span {
        let rows = (0..self.dim()).map(|b| self.mul(&self.mul(x, &self.basis(b)), y));
        self.rel.extend(rows)
    }

    /// `A`-module invariants of an `A`-submodule of `S`.
    pub fn module_invariants(&self, m: &Span) -> ModuleInvariants {
        let alg = &self.coeff;
        let m_gens: Vec<Row> = alg.max_ideal().generators();
        let a_span = |x: &Row| -> Vec<Row> {
            (0..alg.rank())
                .map(|k| self.mul(&self.scalar(&alg.generator(k)), x))
                .collect()
        };
        let mm = self.rel.extend(
            m.rows()
                .iter()
                .flat_map(|x| m_gens.iter().map(move |a| self.mul(&self.scalar(a), x))),
        );
        let f = alg.residue_degree();
        let diff = m.log_order() - mm.log_order();
        let count = (diff / f) as usize;
        let mut witness = Vec::new();
        let mut cur = mm;
        for x in m.rows() {
            if witness.len() == count {
                break;
            }
            let x = self.reduce(x);
            if !cur.contains(&x) {
                cur = cur.extend(a_span(&x));
                witness.push(x);
            }
        }
        let mut exps = linalg::quotient_invariants(m, &self.rel);
        exps.sort();
        ModuleInvariants {
            invariant_factors: exps.iter().map(|k| alg.base().p().pow(*k)).collect(),
            log_order: m.log_order() - self.rel.log_order(),
            base_generators: exps.len(),
            min_generators: count,
            witness,
        }
    }

    /// `e <- 3e^2 - 2e^3` until idempotent.
    fn newton(&self, x: &[u64]) -> Result<(Row, usize), PseudocharError> {
        let mut e = self.reduce(x);
        for step in 0..NEWTON_CAP {
            let e2 = self.mul(&e, &e);
            if e2 == e {
                return Ok((e, step));
            }
            let e3 = self.mul(&e2, &e);
            e = self.sub(&self.scale(&e2, 3), &self.scale(&e3, 2));
        }
        Err(PseudocharError::NoConvergence(NEWTON_CAP))
    }
}

/// Lifted orthogonal idempotents `e_1 + e_2 = 1` and rank-one idempotents
/// `E_i` in `e_i S e_i`.
#[derive(Clone, Debug, Serialize)]
pub struct Idempotents {
    pub e: [Row; 2],
    pub rank_one: [Row; 2],
    pub newton_steps: usize,
    pub tau_fixed: bool,
}

pub fn lift_idempotents(
    s: &TracedAlgebra,
    residual: Option<&[Row; 2]>,
    use_involution: bool,
) -> Result<Idempotents, PseudocharError> {
    let bar = residual.or(s.residual.as_ref()).ok_or_else(|| {
        PseudocharError::NotResidualIdempotent("no residual idempotents given".into())
    })?;
    let j = &s.radical;
    let in_j = |x: &Row| j.contains(x);
    for (i, e) in bar.iter().enumerate() {
        if in_j(e) {
            return Err(PseudocharError::NotResidualIdempotent(format!(
                "e{} lies in the radical",
                i + 1
            )));
        }
        if !in_j(&s.sub(&s.mul(e, e), e)) {
            return Err(PseudocharError::NotResidualIdempotent(format!(
                "e{} is not idempotent mod J",
                i + 1
            )));
        }
    }
    if !in_j(&s.mul(&bar[0], &bar[1])) || !in_j(&s.mul(&bar[1], &bar[0])) {
        return Err(PseudocharError::NotResidualIdempotent(
            "not orthogonal mod J".into(),
        ));
    }
    if !in_j(&s.sub(&s.add(&bar[0], &bar[1]), &s.one())) {
        return Err(PseudocharError::NotResidualIdempotent(
            "does not sum to 1 mod J".into(),
        ));
    }
    let mut x0 = bar[0].clone();
    if use_involution {
        let t0 = s.involution(&bar[0]).ok_or(PseudocharError::NotSelfDual)?;
        let t1 = s.involution(&bar[1]).ok_or(PseudocharError::NotSelfDual)?;
        if !in_j(&s.sub(&t0, &bar[0])) || !in_j(&s.sub(&t1, &bar[1])) {
            return Err(PseudocharError::NotTauFixed);
        }
        let half = s.coeff.base().inv(2).expect("odd p");
        x0 = s.scale(&s.add(&bar[0], &t0), half);
    }
    let (e1, steps) = s.newton(&x0)?;
    let e2 = s.sub(&s.one(), &e1);
    let mut rank_one = [e1.clone(), e2.clone()];
    for (i, e) in [&e1, &e2].into_iter().enumerate() {
        if let Some(u) = &s.matrix_units[i] {
            let x = s.mul(&s.mul(e, u), e);
            rank_one[i] = s.newton(&x)?.0;
        }
    }
    let tau_fixed = match (s.involution(&e1), s.involution(&e2)) {
        (Some(a), Some(b)) => a == e1 && b == e2,
        _ => false,
    };
    Ok(Idempotents {
        e: [e1, e2],
        rank_one,
        newton_steps: steps,
        tau_fixed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GmaDecomposition {
    pub sizes: [usize; 2],
    /// `e_i S e_j`.
    #[serde(skip)]
    pub corners: [[Span; 2]; 2],
    /// `E_i S E_j`, the coefficient modules.
    #[serde(skip)]
    pub coefficient_modules: [[Span; 2]; 2],
    pub corner_log_orders: [[u32; 2]; 2],
    pub coefficient_invariants: [[ModuleInvariants; 2]; 2],
    /// `sum log |e_i S e_j| = log |S|`.
    pub orders_multiply: bool,
    /// `T(e_1 S e_2 S e_1)` lies in `m_A`.
    pub off_diagonal_in_max_ideal: bool,
    pub idempotent_traces: [Row; 2],
}

pub fn gma_decompose(s: &TracedAlgebra, idem: &Idempotents) -> GmaDecomposition {
    let e = &idem.e;
    let big = &idem.rank_one;
    let corners = [
        [s.sandwich(&e[0], &e[0]), s.sandwich(&e[0], &e[1])],
        [s.sandwich(&e[1], &e[0]), s.sandwich(&e[1], &e[1])],
    ];
    let coefficient_modules = [
        [s.sandwich(&big[0], &big[0]), s.sandwich(&big[0], &big[1])],
        [s.sandwich(&big[1], &big[0]), s.sandwich(&big[1], &big[1])],
    ];
    let rl = s.rel.log_order();
    let corner_log_orders = [0, 1].map(|i| [0, 1].map(|j| corners[i][j].log_order() - rl));
    let coefficient_invariants =
        [0, 1].map(|i| [0, 1].map(|j| s.module_invariants(&coefficient_modules[i][j])));
    let total: u32 = corner_log_orders.iter().flatten().sum();
    let m = s.coeff.max_ideal();
    let off_diagonal_in_max_ideal = corners[0][1].rows().iter().all(|a| {
        corners[1][0]
            .rows()
            .iter()
            .all(|b| m.contains(&s.trace(&s.mul(a, b))))
    });
    GmaDecomposition {
        sizes: s.sizes.unwrap_or([1, s.degree.saturating_sub(1)]),
        corners,
        coefficient_modules,
        corner_log_orders,
        coefficient_invariants,
        orders_multiply: total == s.log_order(),
        off_diagonal_in_max_ideal,
        idempotent_traces: [s.trace(&e[0]), s.trace(&e[1])],
    }
}

/// `I_T`: the ideal generated by `T(e_1 S e_2 S e_1)`.
pub fn reducibility_ideal(s: &TracedAlgebra, gma: &GmaDecomposition) -> Ideal {
    let gens: Vec<Row> = gma.corners[0][1]
        .rows()
        .iter()
        .flat_map(|a| {
            gma.corners[1][0]
                .rows()
                .iter()
                .map(move |b| s.trace(&s.mul(a, b)))
        })
        .collect();
    Ideal::from_generators(&s.coeff, &gens)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrincipalityCertificate {
    pub via_involution: bool,
    /// `t = T(g12 g21)` generating `I_T`.
    pub generator: Row,
    pub corner_generators: [Row; 2],
    /// Whether the involution maps `e_1 S e_2` onto `e_2 S e_1`.
    pub corner_map_is_iso: Option<bool>,
    pub matches_reducibility_ideal: bool,
}

/// A generator of `I_T` from cyclic coefficient modules: via the involution
/// when `use_involution`, otherwise from both corners separately.
pub fn principality_certificate(
    s: &TracedAlgebra,
    idem: &Idempotents,
    gma: &GmaDecomposition,
    use_involution: bool,
) -> Result<PrincipalityCertificate, PseudocharError> {
    let inv12 = &gma.coefficient_invariants[0][1];
    let inv21 = &gma.coefficient_invariants[1][0];
    let first = |m: &ModuleInvariants| m.witness.first().cloned().unwrap_or_else(|| s.zero());
    let mut corner_map_is_iso = None;
    let (g12, g21) = if use_involution {
        if !s.has_involution() {
            return Err(PseudocharError::NotSelfDual);
        }
        for a in 0..s.dim() {
            let t = s.involution(&s.basis(a)).expect("present");
            if s.trace(&t) != s.trace[a] {
                return Err(PseudocharError::NotSelfDual);
            }
        }
        if !idem.tau_fixed {
            return Err(PseudocharError::NotTauFixed);
        }
        let image = s.rel.extend(
            gma.corners[0][1]
                .rows()
                .iter()
                .map(|r| s.involution(r).expect("present")),
        );
        corner_map_is_iso = Some(image == gma.corners[1][0]);
        if inv12.min_generators > 1 {
            return Err(PseudocharError::CornersNotCyclic(
                inv12.min_generators,
                inv21.min_generators,
            ));
        }
        let g12 = first(inv12);
        let g21 = if gma.sizes == [1, 1] {
            s.involution(&g12).expect("present")
        } else {
            first(inv21)
        };
        (g12, g21)
    } else {
        if inv12.min_generators > 1 || inv21.min_generators > 1 {
            return Err(PseudocharError::CornersNotCyclic(
                inv12.min_generators,
                inv21.min_generators,
            ));
        }
        (first(inv12), first(inv21))
    };
    let t = s.trace(&s.mul(&g12, &g21));
    let it = reducibility_ideal(s, gma);
    Ok(PrincipalityCertificate {
        via_involution: use_involution,
        matches_reducibility_ideal: Ideal::from_generators(&s.coeff, std::slice::from_ref(&t))
            == it,
        generator: t,
        corner_generators: [g12, g21],
        corner_map_is_iso,
    })
}

/// Result of conjugating `rho mod I` into block upper-triangular form.
#[derive(Clone, Debug)]
pub enum Triangularization {
    /// `I` is the unit ideal.
    Vacuous,
    Success {
        quotient: AlgebraHom,
        /// `P` with `P rho P^{-1}` block upper triangular.
        conjugator: Mat,
        triangular: GroupRep,
        blocks: [GroupRep; 2],
    },
    /// The lower-left block cannot be cleared modulo `m^{layer+1}`.
    Failure { layer: u32 },
}

impl Triangularization {
    pub fn succeeded(&self) -> bool {
        !matches!(self, Triangularization::Failure { .. })
    }
}

/// Solves `c + dX - Xa - XbX = 0` over `A/I` one power of the maximal ideal
/// at a time and conjugates by `[[1, 0], [-X, 1]]`.
pub fn block_triangularize(
    rho: &GroupRep,
    ideal: &Ideal,
    n1: usize,
) -> Result<Triangularization, PseudocharError> {
    let n = rho.degree();
    if n1 == 0 || n1 >= n {
        return Err(PseudocharError::Shape(format!(
            "block size {n1} in degree {n}"
        )));
    }
    if ideal.is_unit() {
        return Ok(Triangularization::Vacuous);
    }
    let (rb, hom) = rho.reduce_mod(ideal).ok_or(AlgebraError::UnitIdeal)?;
    let b = rb.algebra().clone();
    let n2 = n - n1;
    let group = rho.group();
    let sub = |m: &Mat, r0: usize, r1: usize, c0: usize, c1: usize| -> Mat {
        m[r0..r1].iter().map(|r| r[c0..c1].to_vec()).collect()
    };
    let blocks: Vec<[Mat; 4]> = (0..group.order())
        .map(|g| {
            let m = rb.image(g);
            [
                sub(m, 0, n1, 0, n1),
                sub(m, 0, n1, n1, n),
                sub(m, n1, n, 0, n1),
                sub(m, n1, n, n1, n),
            ]
        })
        .collect();
    let riccati = |x: &Mat, [a, bb, c, d]: &[Mat; 4]| -> Mat {
        let dx = b.mat_mul(d, x);
        let xa = b.mat_mul(x, a);
        let xbx = b.mat_mul(&b.mat_mul(x, bb), x);
        b.mat_sub(&b.mat_sub(&b.mat_add(c, &dx), &xa), &xbx)
    };
    let mb = b.max_ideal();
    let mut x = b.mat_zero(n2, n1);
    // layer 0: the residual lower-left block must vanish
    if !blocks
        .iter()
        .all(|bl| bl[2].iter().flatten().all(|v| mb.contains(v)))
    {
        return Ok(Triangularization::Failure { layer: 0 });
    }
    let d = b.rank();
    let entries = n2 * n1;
    let width = group.order() * entries * d;
    let mut k = 1;
    loop {
        let mk = mb.power(k);
        if mk.is_zero() {
            break;
        }
        let mk1 = mb.power(k + 1);
        let residual: Vec<Mat> = blocks.iter().map(|bl| riccati(&x, bl)).collect();
        if residual.iter().flatten().flatten().all(|v| mk1.contains(v)) {
            k += 1;
            continue;
        }
        let gens = mk.generators();
        let mut mat = Vec::with_capacity(entries * gens.len());
        for i in 0..n2 {
            for j in 0..n1 {
                for r in &gens {
                    let mut delta = b.mat_zero(n2, n1);
                    delta[i][j] = r.clone();
                    let mut row = Vec::with_capacity(width);
                    for [a, bb, _, dd] in &blocks {
                        let l = b.mat_sub(
                            &b.mat_sub(&b.mat_mul(dd, &delta), &b.mat_mul(&delta, a)),
                            &b.mat_add(
                                &b.mat_mul(&b.mat_mul(&x, bb), &delta),
                                &b.mat_mul(&b.mat_mul(&delta, bb), &x),
                            ),
                        );
                        row.extend(group_rep::flatten(&l));
                    }
                    mat.push(row);
                }
            }
        }
        let rhs: Row = residual
            .iter()
            .flat_map(|r| group_rep::flatten(&b.mat_map(r, |v| b.neg(v))))
            .collect();
        let rel = block_span(mk1.span(), group.order() * entries);
        let Some(coef) = linalg::solve_left(b.base(), &mat, width, &rhs, &rel) else {
            return Ok(Triangularization::Failure { layer: k });
        };
        let mut idx = 0;
        for i in 0..n2 {
            for j in 0..n1 {
                for r in &gens {
                    x[i][j] = b.add(&x[i][j], &b.scale(r, coef[idx]));
                    idx += 1;
                }
            }
        }
        k += 1;
    }
    if !blocks
        .iter()
        .all(|bl| riccati(&x, bl).iter().flatten().all(|v| b.is_zero(v)))
    {
        return Ok(Triangularization::Failure { layer: k });
    }
    let mut p = b.mat_identity(n);
    for i in 0..n2 {
        for j in 0..n1 {
            p[n1 + i][j] = b.neg(&x[i][j]);
        }
    }
    let triangular = rb.conjugate(&p).expect("unipotent conjugator");
    debug_assert!(triangular.is_block_upper_triangular(n1));
    let blocks = [triangular.block(0, n1)?, triangular.block(n1, n)?];
    Ok(Triangularization::Success {
        quotient: hom,
        conjugator: p,
        triangular,
        blocks,
    })
}

/// Certificate that the first-order upper-triangular deformation
/// `rho' = rho_0 + x [[0, g], [0, 0]]` is conjugate to `rho_0` over `F[x]/(x^2)`.
#[derive(Clone, Debug)]
pub struct StrictConjugatorCertificate {
    pub deformation: GroupRep,
    /// `Z` with `Z rho' = rho_0 Z`, congruent to 1 mod `x`.
    pub conjugator: Mat,
    /// `Y` over `F` with `Y rho_0 = tau Y`, `tau = [[rho1, g], [0, rho2]]`.
    pub intertwiner: Option<Mat>,
    /// Whether `[[1, -B x / d], [0, 1 + a x / d]]` built from `Y` works.
    pub explicit_formula: bool,
    pub verified: bool,
}

/// `rho0` is a two-dimensional upper-triangular representation over a prime
/// field and `g[h]` the upper-right entry of the deformation direction.
pub fn strict_equivalence_conjugator(
    rho0: &GroupRep,
    g: &[Row],
) -> Result<StrictConjugatorCertificate, PseudocharError> {
    let f = rho0.algebra();
    if rho0.degree() != 2 || f.rank() != 1 || !f.is_field() {
        return Err(PseudocharError::Unsupported(
            "needs a 2-dimensional representation over a prime field".into(),
        ));
    }
    let group = rho0.group();
    let ord = group.order();
    let base = *f.base();
    let dual = crate::catalog::dual_numbers(base);
    let lift = |m: &Mat, eps: Option<&Mat>| -> Mat {
        (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| vec![m[i][j][0], eps.map(|e| e[i][j][0]).unwrap_or(0)])
                    .collect()
            })
            .collect()
    };
    let dir = |h: usize| -> Mat { vec![vec![f.zero(), g[h].clone()], vec![f.zero(), f.zero()]] };
    let images: Vec<Mat> = (0..ord)
        .map(|h| lift(rho0.image(h), Some(&dir(h))))
        .collect();
    let deformation = GroupRep::from_all_images(group, &dual, images)?;
    let tau: Vec<Mat> = (0..ord)
        .map(|h| {
            let m = rho0.image(h);
            vec![
                vec![m[0][0].clone(), g[h].clone()],
                vec![f.zero(), m[1][1].clone()],
            ]
        })
        .collect();
    let unknown = |k: usize| -> Mat {
        (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| if i * 2 + j == k { f.one() } else { f.zero() })
                    .collect()
            })
            .collect()
    };
    let rel = Span::zero(&base, 4 * ord);
    // Y rho0 = tau Y
    let ymat: Vec<Row> = (0..4)
        .map(|k| {
            let y = unknown(k);
            (0..ord)
                .flat_map(|h| {
                    group_rep::flatten(
                        &f.mat_sub(&f.mat_mul(&y, rho0.image(h)), &f.mat_mul(&tau[h], &y)),
                    )
                })
                .collect()
        })
        .collect();
    let sols = linalg::left_kernel(&base, &ymat, 4 * ord, &rel);
    let intertwiner = sols
        .elements()
        .into_iter()
        .map(|v| {
            (0..2)
                .map(|i| (0..2).map(|j| vec![v[i * 2 + j]]).collect())
                .collect::<Mat>()
        })
        .find(|y| f.mat_is_invertible(y));
    let check = |z: &Mat| -> bool {
        (0..ord).all(|h| {
            dual.mat_mul(z, deformation.image(h)) == dual.mat_mul(&lift(rho0.image(h), None), z)
        })
    };
    let mut explicit = None;
    if let Some(y) = &intertwiner {
        let (a, bb, d) = (y[0][0][0], y[0][1][0], y[1][1][0]);
        if let Some(dinv) = base.inv(d) {
            let z: Mat = vec![
                vec![vec![1, 0], vec![0, base.neg(base.mul(dinv, bb))]],
                vec![vec![0, 0], vec![1, base.mul(a, dinv)]],
            ];
            if check(&z) {
                explicit = Some(z);
            }
        }
    }
    let explicit_formula = explicit.is_some();
    let conjugator = match explicit {
        Some(z) => z,
        None => {
            // Z = 1 + xW with [[0, g], [0, 0]] = rho0 W - W rho0
            let wmat: Vec<Row> = (0..4)
                .map(|k| {
                    let w = unknown(k);
                    (0..ord)
                        .flat_map(|h| {
                            group_rep::flatten(&f.mat_sub(
                                &f.mat_mul(rho0.image(h), &w),
                                &f.mat_mul(&w, rho0.image(h)),
                            ))
                        })
                        .collect()
                })
                .collect();
            let rhs: Row = (0..ord).flat_map(|h| group_rep::flatten(&dir(h))).collect();
            match linalg::solve_left(&base, &wmat, 4 * ord, &rhs, &rel) {
                Some(w) => {
                    let wm: Mat = (0..2)
                        .map(|i| (0..2).map(|j| vec![w[i * 2 + j]]).collect())
                        .collect();
                    lift(&f.mat_identity(2), Some(&wm))
                }
                None => dual.mat_identity(2),
            }
        }
    };
    let verified = check(&conjugator);
    Ok(StrictConjugatorCertificate {
        deformation,
        conjugator,
        intertwiner,
        explicit_formula,
        verified,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonZeroDivisorReport {
    pub linear: bool,
    pub exhaustive: Option<bool>,
}

/// Whether multiplication by `t` is injective on `A`.
pub fn nonzerodivisor_check(alg: &LocalAlgebra, t: &[u64]) -> NonZeroDivisorReport {
    let m = alg.mult_matrix(t);
    let ker = alg.relations().sum(&linalg::left_kernel(
        alg.base(),
        &m,
        alg.rank(),
        alg.relations(),
    ));
    let linear = ker.log_order() == alg.relations().log_order();
    let exhaustive = alg.order_at_most(12).then(|| {
        alg.elements()
            .iter()
            .all(|x| alg.is_zero(x) || !alg.is_zero(&alg.mul(x, t)))
    });
    NonZeroDivisorReport { linear, exhaustive }
}

/// Searches for `T = T_1 + T_2` with `T_1` of degree one. `lifts` are lifts
/// of the residual block traces; when present `T_i` must reduce to them.
pub fn find_splitting(
    t: &Pseudocharacter,
    n1: usize,
    lifts: Option<&[Vec<Row>; 2]>,
) -> Result<Option<[Pseudocharacter; 2]>, PseudocharError> {
    let n = t.degree;
    let (swap, k2) = if n1 == 1 {
        (false, n - 1)
    } else if n - n1 == 1 {
        (true, n1)
    } else {
        return Err(PseudocharError::Unsupported(
            "splitting search needs a block of size one".into(),
        ));
    };
    if k2 > 3 {
        return Err(PseudocharError::TooLargeForExhaustion(format!(
            "identity of degree {k2}"
        )));
    }
    let b = &t.alg;
    let group = &t.group;
    let m = b.max_ideal();
    let (l1, l2) = match lifts {
        Some([a, c]) if swap => (Some(c), Some(a)),
        Some([a, c]) => (Some(a), Some(c)),
        None => (None, None),
    };
    let units: Vec<Row> = b.elements().into_iter().filter(|x| b.is_unit(x)).collect();
    let m_elems = m.elements();
    let candidates: Vec<Vec<Row>> = group
        .generators()
        .iter()
        .map(|s| {
            let pool: Vec<Row> = match l1 {
                Some(l) => m_elems.iter().map(|x| b.add(&l[*s], x)).collect(),
                None => units.clone(),
            };
            let ord = group.element_order(*s) as u64;
            pool.into_iter()
                .filter(|x| b.is_unit(x) && b.pow(x, ord) == b.one())
                .collect()
        })
        .collect();
    let total: u128 = candidates.iter().map(|c| c.len() as u128).product();
    if total > SEARCH_CAP {
        return Err(PseudocharError::TooLargeForExhaustion(format!(
            "{total} characters"
        )));
    }
    let (order, parent) = group.spanning_tree();
    let gens = group.generators();
    let mut choice = vec![0usize; candidates.len()];
    if candidates.iter().any(|c| c.is_empty()) {
        return Ok(None);
    }
    loop {
        let mut vals = vec![b.zero(); group.order()];
        vals[group.identity()] = b.one();
        for g in &order[1..] {
            let (h, k) = parent[*g].expect("tree");
            vals[*g] = b.mul(&vals[h], &candidates[k][choice[k]]);
        }
        let is_char = (0..group.order()).all(|g| {
            gens.iter()
                .enumerate()
                .all(|(k, s)| vals[group.mul(g, *s)] == b.mul(&vals[g], &candidates[k][choice[k]]))
        });
        if is_char {
            let rest: Vec<Row> = t
                .values
                .iter()
                .zip(&vals)
                .map(|(x, y)| b.sub(x, y))
                .collect();
            if let Ok(t2) = Pseudocharacter::new(group, b, rest, k2) {
                let residual_ok = l2.is_none_or(|l| {
                    (0..group.order()).all(|g| m.contains(&b.sub(&t2.values[g], &l[g])))
                });
                if residual_ok && t2.satisfies_identity(k2) {
                    let t1 = Pseudocharacter {
                        group: group.clone(),
                        alg: b.clone(),
                        values: vals,
                        degree: 1,
                    };
                    return Ok(Some(if swap { [t2, t1] } else { [t1, t2] }));
                }
            }
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return Ok(None);
            }
            choice[i] += 1;
            if choice[i] < candidates[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Whether `T mod J` is a sum of pseudocharacters lifting the residual
/// block traces.
pub fn splits_mod(
    t: &Pseudocharacter,
    n1: usize,
    lifts: Option<&[Vec<Row>; 2]>,
    j: &Ideal,
) -> Result<bool, PseudocharError> {
    if j.is_unit() {
        return Ok(true);
    }
    let (_, hom) = j.quotient_map()?;
    let tb = t.base_change(&hom);
    let lb = lifts.map(|[a, b]| {
        [
            a.iter().map(|x| hom.apply(x)).collect(),
            b.iter().map(|x| hom.apply(x)).collect(),
        ]
    });
    Ok(find_splitting(&tb, n1, lb.as_ref())?.is_some())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityReport {
    pub splits: bool,
    pub maximal_subideals: usize,
    pub no_subideal_splits: bool,
}

impl MinimalityReport {
    pub fn holds(&self) -> bool {
        self.splits && self.no_subideal_splits
    }
}

/// `T` splits modulo `I` but modulo no maximal proper subideal of `I`.
pub fn verify_minimality(
    t: &Pseudocharacter,
    n1: usize,
    lifts: Option<&[Vec<Row>; 2]>,
    ideal: &Ideal,
) -> Result<MinimalityReport, PseudocharError> {
    let alg = &t.alg;
    if alg.log_order() > EXHAUSTIVE_LOG_CAP {
        return Err(PseudocharError::TooLargeForExhaustion(format!(
            "|A| = p^{}",
            alg.log_order()
        )));
    }
    let splits = splits_mod(t, n1, lifts, ideal)?;
    let f = alg.residue_degree();
    let subs: Vec<Ideal> = all_ideals(alg)
        .into_iter()
        .filter(|j| ideal.contains_ideal(j) && j.log_order() + f == ideal.log_order())
        .collect();
    let mut no_subideal_splits = true;
    for j in &subs {
        if splits_mod(t, n1, lifts, j)? {
            no_subideal_splits = false;
            break;
        }
    }
    Ok(MinimalityReport {
        splits,
        maximal_subideals: subs.len(),
        no_subideal_splits,
    })
}

/// The smallest ideal modulo which `T` splits, by scanning every ideal.
/// `None` if the splitting ideals have no least element.
pub fn smallest_splitting_ideal_exhaustive(
    t: &Pseudocharacter,
    n1: usize,
    lifts: Option<&[Vec<Row>; 2]>,
) -> Result<Option<Ideal>, PseudocharError> {
    let alg = &t.alg;
    if alg.log_order() > EXHAUSTIVE_LOG_CAP {
        return Err(PseudocharError::TooLargeForExhaustion(format!(
            "|A| = p^{}",
            alg.log_order()
        )));
    }
    let mut splitting = Vec::new();
    for j in all_ideals(alg) {
        if splits_mod(t, n1, lifts, &j)? {
            splitting.push(j);
        }
    }
    Ok(splitting
        .iter()
        .find(|j| splitting.iter().all(|k| k.contains_ideal(j)))
        .cloned())
}

/// Everything derived from a representation with block upper-triangular
/// residual shape.
#[derive(Clone, Debug)]
pub struct GmaAnalysis {
    pub pseudochar: Pseudocharacter,
    pub shape: ResidualShape,
    pub algebra: TracedAlgebra,
    pub idempotents: Idempotents,
    pub decomposition: GmaDecomposition,
    pub reducibility: Ideal,
    pub certificate: Result<PrincipalityCertificate, PseudocharError>,
    pub kernels: KernelComparison,
}

#[derive(Clone, Debug, Serialize)]
pub struct GmaReport {
    pub algebra_log_order: u32,
    pub s_log_order: u32,
    pub s_dim: usize,
    pub kernels_equal: bool,
    pub decomposition: GmaDecomposition,
    pub reducibility_generators: Vec<Row>,
    pub reducibility_log_order: u32,
    pub reducibility_min_generators: usize,
    pub principal: bool,
    pub certificate: Option<PrincipalityCertificate>,
    pub certificate_error: Option<String>,
}

pub fn analyze(
    rho: &GroupRep,
    n1: usize,
    inv: Option<&Involution>,
) -> Result<GmaAnalysis, PseudocharError> {
    let n = rho.degree();
    let p = rho.algebra().base().p();
    if p <= n as u64 {
        return Err(PseudocharError::SmallPrime(n, p));
    }
    let shape = ResidualShape::new(rho, n1)?;
    let t = Pseudocharacter::from_rep(rho);
    if let Some(inv) = inv {
        let alg = rho.algebra();
        let [t1, t2] = shape.block_traces();
        let m = alg.max_ideal();
        let fixed = |vals: &[Row]| {
            (0..rho.group().order()).all(|g| {
                let v = &vals[inv.sigma(g)];
                let tv = inv
                    .twist(g)
                    .map(|tw| alg.mul(tw, v))
                    .unwrap_or_else(|| v.clone());
                m.contains(&alg.sub(&tv, &vals[g]))
            })
        };
        if !inv.check_self_dual(alg, t.values()) {
            return Err(PseudocharError::NotSelfDual);
        }
        if !fixed(&t1) || !fixed(&t2) {
            return Err(PseudocharError::NotTauFixed);
        }
    }
    let algebra = TracedAlgebra::faithful_quotient(&t, Some(&shape), inv)?;
    let idempotents = lift_idempotents(&algebra, None, inv.is_some())?;
    let decomposition = gma_decompose(&algebra, &idempotents);
    let reducibility = reducibility_ideal(&algebra, &decomposition);
    let certificate =
        principality_certificate(&algebra, &idempotents, &decomposition, inv.is_some());
    Ok(GmaAnalysis {
        kernels: compare_kernels(rho),
        pseudochar: t,
        shape,
        algebra,
        idempotents,
        decomposition,
        reducibility,
        certificate,
    })
}

impl GmaAnalysis {
    pub fn report(&self) -> GmaReport {
        let inv = self.reducibility.minimal_generators();
        GmaReport {
            algebra_log_order: self.pseudochar.alg.log_order(),
            s_log_order: self.algebra.log_order(),
            s_dim: self.algebra.dim(),
            kernels_equal: self.kernels == KernelComparison::Equal,
            decomposition: self.decomposition.clone(),
            reducibility_generators: inv.witness.clone(),
            reducibility_log_order: inv.log_order,
            reducibility_min_generators: inv.min_generators,
            principal: inv.min_generators <= 1,
            certificate: self.certificate.as_ref().ok().cloned(),
            certificate_error: self.certificate.as_ref().err().map(|e| e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::instances;
    use crate::zmod::BaseRing;

    fn f(p: u64) -> LocalAlgebra {
        catalog::base_ring_algebra(BaseRing::new(p, 1).unwrap())
    }

    fn s3_rho0() -> GroupRep {
        instances::s3_reflection(&f(3))
    }

    fn d5_deformation() -> GroupRep {
        instances::d5_deformation()
    }

    #[test]
    fn traces_of_running_example() {
        let t = trace_pseudocharacter(&s3_rho0());
        let g = t.group().clone();
        assert_eq!(t.value(g.identity()), &vec![2]);
        assert_eq!(t.value(g.generators()[0]), &vec![2]);
        assert_eq!(t.value(g.generators()[1]), &vec![0]);
        assert!(t.satisfies_identity(2));
        assert!(!t.satisfies_identity(1));
    }

    #[test]
    fn standard_rep_over_f5() {
        let a = f(5);
        let g = catalog::symmetric3();
        let m = |x: [[i64; 2]; 2]| {
            a.mat_from_scalars(&x.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
        };
        let rho = GroupRep::new(&g, &a, vec![m([[0, -1], [1, -1]]), m([[0, 1], [1, 0]])]).unwrap();
        let t = trace_pseudocharacter(&rho);
        assert_eq!(t.value(1), &vec![4]);
        assert_eq!(t.value(3), &vec![0]);
        assert!(rho.is_absolutely_irreducible().unwrap());
    }

    #[test]
    fn kernels_of_small_examples() {
        let z3 = catalog::cyclic(3);
        let a5 = f(5);
        let perm = |k: usize| -> Mat {
            (0..3)
                .map(|i| {
                    (0..3)
                        .map(|j| {
                            if (i + k) % 3 == j {
                                a5.one()
                            } else {
                                a5.zero()
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let reg = GroupRep::from_all_images(&z3, &a5, (0..3).map(perm).collect()).unwrap();
        assert!(kernel_of_trace_form(&trace_pseudocharacter(&reg)).is_zero());
        assert_eq!(compare_kernels(&reg), KernelComparison::Equal);

        let a3 = f(3);
        let triv = GroupRep::trivial(&z3, &a3, 2);
        let t = trace_pseudocharacter(&triv);
        let k = kernel_of_trace_form(&t);
        assert_eq!(k.log_order(), 2);
        assert!(k.rows().iter().all(|r| r.iter().sum::<u64>() % 3 == 0));
        assert!(trace_kernel(&t).contains_span(&k));
        let one = GroupRep::trivial(&z3, &a3, 1);
        assert_eq!(kernel_of_rho(&one).log_order(), 2);
    }

    #[test]
    fn running_example_quotient_and_idempotents() {
        let rho0 = s3_rho0();
        let an = analyze(&rho0, 1, Some(&Involution::inverse(rho0.group()))).unwrap();
        let s = &an.algebra;
        let [e1, e2] = &an.idempotents.e;
        assert!(s.is_idempotent(e1) && s.is_idempotent(e2));
        assert_eq!(s.add(e1, e2), s.one());
        assert!(s.mul(e1, e2).iter().all(|x| *x == 0));
        assert_eq!(an.decomposition.idempotent_traces, [vec![1], vec![1]]);
        assert!(an.decomposition.orders_multiply);
        assert!(an.idempotents.tau_fixed);
        assert!(an.decomposition.coefficient_invariants[0][1].min_generators <= 1);
        // T is already sign + 1 over F_3
        assert!(an.reducibility.is_zero());
        assert_eq!(an.certificate.as_ref().unwrap().generator, vec![0]);
        // radical from the residual blocks equals the trace-form radical
        let shape = ResidualShape::new(&rho0, 1).unwrap();
        let s2 = TracedAlgebra::faithful_quotient(&an.pseudochar, Some(&shape), None).unwrap();
        assert_eq!(s2.radical(), s.radical());
    }

    #[test]
    fn full_matrix_algebra() {
        let s = TracedAlgebra::full_matrix(&f(3), 2, 1).unwrap();
        assert_eq!(s.log_order(), 4);
        let idem = lift_idempotents(&s, None, true).unwrap();
        assert_eq!(idem.newton_steps, 0);
        let gma = gma_decompose(&s, &idem);
        assert_eq!(gma.corner_log_orders, [[1, 1], [1, 1]]);
        let it = reducibility_ideal(&s, &gma);
        assert!(it.is_unit());
        let cert = principality_certificate(&s, &idem, &gma, true).unwrap();
        assert!(cert.matches_reducibility_ideal);
        assert_eq!(cert.corner_map_is_iso, Some(true));
    }

    #[test]
    fn newton_over_z9() {
        let a = catalog::base_ring_algebra(BaseRing::new(3, 2).unwrap());
        let s = TracedAlgebra::full_matrix(&a, 2, 1).unwrap();
        // 4 = 1 mod 3 on the first diagonal slot
        let mut x = s.zero();
        x[0] = 4;
        let bar = [x, s.basis(3)];
        let idem = lift_idempotents(&s, Some(&bar), false).unwrap();
        assert_eq!(idem.e[0], s.basis(0));
        assert_eq!(idem.newton_steps, 1);
    }

    #[test]
    fn degenerate_residual_rejected() {
        let s = TracedAlgebra::full_matrix(&f(3), 2, 1).unwrap();
        let bar = [s.one(), s.zero()];
        assert!(matches!(
            lift_idempotents(&s, Some(&bar), false),
            Err(PseudocharError::NotResidualIdempotent(_))
        ));
    }

    #[test]
    fn lower_left_deformation_has_ideal_eps() {
        let rho = d5_deformation();
        let alg = rho.algebra().clone();
        let an = analyze(&rho, 1, Some(&Involution::inverse(rho.group()))).unwrap();
        assert_eq!(an.reducibility, alg.max_ideal());
        let cert = an.certificate.as_ref().unwrap();
        assert!(cert.matches_reducibility_ideal);
        assert_eq!(cert.corner_map_is_iso, Some(true));
        let lifts = an.shape.block_traces();
        let minimal = verify_minimality(&an.pseudochar, 1, Some(&lifts), &an.reducibility).unwrap();
        assert!(minimal.holds());
        let smallest =
            smallest_splitting_ideal_exhaustive(&an.pseudochar, 1, Some(&lifts)).unwrap();
        assert_eq!(smallest.as_ref(), Some(&an.reducibility));
        // Remark path without an involution
        let an2 = analyze(&rho, 1, None).unwrap();
        assert!(an2.certificate.unwrap().matches_reducibility_ideal);
    }

    #[test]
    fn triangularization_matches_reducibility() {
        let rho = d5_deformation();
        let alg = rho.algebra().clone();
        assert!(block_triangularize(&rho, &alg.max_ideal(), 1)
            .unwrap()
            .succeeded());
        assert!(matches!(
            block_triangularize(&rho, &alg.zero_ideal(), 1).unwrap(),
            Triangularization::Failure { layer: 1 }
        ));
        let rho0 = s3_rho0();
        match block_triangularize(&rho0, &rho0.algebra().zero_ideal(), 1).unwrap() {
            Triangularization::Success { conjugator, .. } => {
                assert_eq!(conjugator, rho0.algebra().mat_identity(2))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_strict_conjugator() {
        let rho0 = s3_rho0();
        let a = rho0.algebra().clone();
        for scale in [1u64, 2] {
            let g: Vec<Row> = (0..6)
                .map(|h| a.scale(&rho0.image(h)[0][1], scale))
                .collect();
            let cert = strict_equivalence_conjugator(&rho0, &g).unwrap();
            assert!(cert.verified);
            assert!(cert.explicit_formula);
        }
    }

    #[test]
    fn split_sum_splits_at_zero() {
        let g = catalog::symmetric3();
        let a = f(3);
        let rho = instances::split_pair(&g, &a, &[1, -1], &[1, 1]).unwrap();
        let t = trace_pseudocharacter(&rho);
        assert!(find_splitting(&t, 1, None).unwrap().is_some());
        let an = analyze(&rho, 1, None).unwrap();
        assert!(an.reducibility.is_zero());
    }

    #[test]
    fn irreducible_trace_does_not_split() {
        let g = catalog::sl2_f3();
        let a = f(3);
        let (_, mats) = g.matrices().unwrap();
        let images = mats
            .iter()
            .map(|m| {
                a.mat_map(
                    &m.iter()
                        .map(|r| r.iter().map(|x| vec![*x]).collect())
                        .collect(),
                    |x| x.clone(),
                )
            })
            .collect();
        let rho = GroupRep::from_all_images(&g, &a, images).unwrap();
        let t = trace_pseudocharacter(&rho);
        assert!(find_splitting(&t, 1, None).unwrap().is_none());
    }

    #[test]
    fn nonzerodivisor() {
        let a = catalog::monogenic(BaseRing::new(3, 2).unwrap(), &[0, -3]);
        let x = a.generator(1);
        let r = nonzerodivisor_check(&a, &x);
        assert_eq!(
            r,
            NonZeroDivisorReport {
                linear: false,
                exhaustive: Some(false)
            }
        );
        let r = nonzerodivisor_check(&a, &a.one());
        assert_eq!(
            r,
            NonZeroDivisorReport {
                linear: true,
                exhaustive: Some(true)
            }
        );
    }
}
