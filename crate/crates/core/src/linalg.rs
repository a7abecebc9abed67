//! Dense linear algebra over `Z/p^e`.
//!
//! Submodules of `(Z/p^e)^n` are kept in Howell normal form, which is
//! canonical: two spans are equal iff their row matrices are identical, and
//! greedy reduction against the rows yields a unique coset representative.
//! Vectors are row vectors throughout; a linear map is a matrix acting on the
//! right (`x -> x * M`).

use crate::zmod::BaseRing;
use serde::{Deserialize, Serialize};

pub type Row = Vec<u64>;

/// `dst += q * src`.
#[inline]
pub fn axpy(ring: &BaseRing, dst: &mut [u64], src: &[u64], q: u64) {
    if q == 0 {
        return;
    }
    for (d, s) in dst.iter_mut().zip(src) {
        if *s != 0 {
            *d = ring.add(*d, ring.mul(q, *s));
        }
    }
}

pub fn scale(ring: &BaseRing, v: &[u64], q: u64) -> Row {
    v.iter().map(|x| ring.mul(*x, q)).collect()
}

pub fn add(ring: &BaseRing, a: &[u64], b: &[u64]) -> Row {
    a.iter().zip(b).map(|(x, y)| ring.add(*x, *y)).collect()
}

pub fn sub(ring: &BaseRing, a: &[u64], b: &[u64]) -> Row {
    a.iter().zip(b).map(|(x, y)| ring.sub(*x, *y)).collect()
}

pub fn neg(ring: &BaseRing, a: &[u64]) -> Row {
    a.iter().map(|x| ring.neg(*x)).collect()
}

pub fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|x| *x == 0)
}

/// Row vector times matrix.
pub fn vec_mat(ring: &BaseRing, x: &[u64], m: &[Row], ncols: usize) -> Row {
    let mut out = vec![0; ncols];
    for (xi, row) in x.iter().zip(m) {
        axpy(ring, &mut out, row, *xi);
    }
    out
}

pub fn mat_mul(ring: &BaseRing, a: &[Row], b: &[Row], ncols: usize) -> Vec<Row> {
    a.iter().map(|r| vec_mat(ring, r, b, ncols)).collect()
}

pub fn identity(n: usize) -> Vec<Row> {
    (0..n)
        .map(|i| {
            let mut r = vec![0; n];
            r[i] = 1;
            r
        })
        .collect()
}

pub fn unit_vector(n: usize, i: usize) -> Row {
    let mut r = vec![0; n];
    r[i] = 1;
    r
}

/// Howell normal form of the span of `gens`.
pub fn howell_form(ring: &BaseRing, gens: impl IntoIterator<Item = Row>, ncols: usize) -> Vec<Row> {
    let mut pending: Vec<Row> = gens
        .into_iter()
        .map(|mut r| {
            debug_assert_eq!(r.len(), ncols);
            for x in r.iter_mut() {
                *x = ring.reduce(*x);
            }
            r
        })
        .filter(|r| !is_zero(r))
        .collect();
    let mut out: Vec<Row> = Vec::new();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    for c in 0..ncols {
        if pending.is_empty() {
            break;
        }
        let mut best: Option<(usize, u32)> = None;
        for (i, r) in pending.iter().enumerate() {
            if r[c] != 0 {
                let v = ring.valuation(r[c]);
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((i, v));
                    if v == 0 {
                        break;
                    }
                }
            }
        }
        let Some((idx, k)) = best else { continue };
        let mut piv = pending.swap_remove(idx);
        let (_, u) = ring.split(piv[c]);
        let uinv = ring.inv(u).expect("unit part is invertible");
        for x in piv.iter_mut() {
            *x = ring.mul(*x, uinv);
        }
        let pk = ring.p_pow(k);
        for r in pending.iter_mut() {
            if r[c] != 0 {
                let q = r[c] / pk;
                axpy(ring, r, &piv, ring.neg(q));
            }
        }
        if k > 0 {
            let extra = scale(ring, &piv, ring.p_pow(ring.e() - k));
            pending.push(extra);
        }
        pending.retain(|r| !is_zero(r));
        out.push(piv);
        pivots.push((c, k));
    }
    // Reduce entries above pivots into [0, p^k), left to right.
    for i in 0..out.len() {
        let (c, k) = pivots[i];
        let pk = ring.p_pow(k);
        let (upper, lower) = out.split_at_mut(i);
        let piv = &lower[0];
        for r in upper.iter_mut() {
            if r[c] >= pk {
                let q = r[c] / pk;
                axpy(ring, r, piv, ring.neg(q));
            }
        }
    }
    out
}

/// A submodule of `(Z/p^e)^n` in Howell normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    ring: BaseRing,
    ncols: usize,
    rows: Vec<Row>,
    #[serde(skip)]
    pivots: Vec<(usize, u32)>,
}

impl Span {
    pub fn new(ring: &BaseRing, ncols: usize, gens: impl IntoIterator<Item = Row>) -> Span {
        let rows = howell_form(ring, gens, ncols);
        Span::from_howell(*ring, ncols, rows)
    }

    fn from_howell(ring: BaseRing, ncols: usize, rows: Vec<Row>) -> Span {
        let pivots = rows
            .iter()
            .map(|r| {
                let c = r.iter().position(|x| *x != 0).expect("nonzero row");
                (c, ring.valuation(r[c]))
            })
            .collect();
        Span {
            ring,
            ncols,
            rows,
            pivots,
        }
    }

    pub fn zero(ring: &BaseRing, ncols: usize) -> Span {
        Span {
            ring: *ring,
            ncols,
            rows: vec![],
            pivots: vec![],
        }
    }

    pub fn full(ring: &BaseRing, ncols: usize) -> Span {
        Span::new(ring, ncols, identity(ncols))
    }

    /// The relations `p^{t_i} e_i` of the module `(+) Z/p^{t_i}`.
    pub fn torsion(ring: &BaseRing, torsion: &[u32]) -> Span {
        let n = torsion.len();
        let gens = torsion
            .iter()
            .enumerate()
            .filter(|(_, t)| **t < ring.e())
            .map(|(i, t)| {
                let mut r = vec![0; n];
                r[i] = ring.p_pow(*t);
                r
            });
        Span::new(ring, n, gens)
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// `log_p` of the number of elements.
    pub fn log_order(&self) -> u32 {
        self.pivots.iter().map(|(_, k)| self.ring.e() - k).sum()
    }

    /// Canonical representative of `v` modulo this span.
    pub fn reduce(&self, v: &[u64]) -> Row {
        let ring = &self.ring;
        let mut v: Row = v.iter().map(|x| ring.reduce(*x)).collect();
        for (row, (c, k)) in self.rows.iter().zip(&self.pivots) {
            let pk = ring.p_pow(*k);
            if v[*c] >= pk {
                let q = v[*c] / pk;
                axpy(ring, &mut v, row, ring.neg(q));
            }
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        is_zero(&self.reduce(v))
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }

    pub fn sum(&self, other: &Span) -> Span {
        Span::new(
            &self.ring,
            self.ncols,
            self.rows.iter().chain(&other.rows).cloned(),
        )
    }

    pub fn extend(&self, gens: impl IntoIterator<Item = Row>) -> Span {
        Span::new(
            &self.ring,
            self.ncols,
            self.rows.iter().cloned().chain(gens),
        )
    }

    pub fn intersect(&self, other: &Span) -> Span {
        let n = self.ncols;
        let mat: Vec<Row> = self.rows.iter().chain(&other.rows).cloned().collect();
        let ker = left_kernel(&self.ring, &mat, n, &Span::zero(&self.ring, n));
        let k = self.rows.len();
        Span::new(
            &self.ring,
            n,
            ker.rows()
                .iter()
                .map(|c| vec_mat(&self.ring, &c[..k], &self.rows, n)),
        )
    }

    /// Image of this span under `x -> x * m`.
    pub fn image(&self, m: &[Row], ncols: usize) -> Span {
        Span::new(
            &self.ring,
            ncols,
            self.rows.iter().map(|r| vec_mat(&self.ring, r, m, ncols)),
        )
    }

    /// All elements, each exactly once. Only for small spans.
    pub fn elements(&self) -> Vec<Row> {
        let ring = &self.ring;
        let mut out = vec![vec![0; self.ncols]];
        for (row, (_, k)) in self.rows.iter().zip(&self.pivots) {
            let count = ring.p().pow(ring.e() - k);
            let mut next = Vec::with_capacity(out.len() * count as usize);
            for base in &out {
                let mut cur = base.clone();
                for _ in 0..count {
                    next.push(cur.clone());
                    axpy(ring, &mut cur, row, 1);
                }
            }
            out = next;
        }
        out
    }
}

/// Solver for `x * M = b (mod rel)`, with `M` an `m x n` matrix and `rel` a
/// span in the codomain.
#[derive(Clone, Debug)]
pub struct LeftSolver {
    ring: BaseRing,
    ncols: usize,
    nrows: usize,
    aug: Span,
}

impl LeftSolver {
    pub fn new(ring: &BaseRing, mat: &[Row], ncols: usize, rel: &Span) -> LeftSolver {
        let m = mat.len();
        let width = ncols + m;
        let mut gens = Vec::with_capacity(m + rel.rows().len());
        for (i, r) in mat.iter().enumerate() {
            debug_assert_eq!(r.len(), ncols);
            let mut a = Vec::with_capacity(width);
            a.extend_from_slice(r);
            a.extend(std::iter::repeat_n(0, m));
            a[ncols + i] = 1;
            gens.push(a);
        }
        for r in rel.rows() {
            let mut a = r.clone();
            a.extend(std::iter::repeat_n(0, m));
            gens.push(a);
        }
        LeftSolver {
            ring: *ring,
            ncols,
            nrows: m,
            aug: Span::new(ring, width, gens),
        }
    }

    /// All `x` with `x * M` in `rel`.
    pub fn kernel(&self) -> Span {
        let n = self.ncols;
        Span::new(
            &self.ring,
            self.nrows,
            self.aug
                .rows()
                .iter()
                .filter(|r| is_zero(&r[..n]))
                .map(|r| r[n..].to_vec()),
        )
    }

    pub fn solve(&self, rhs: &[u64]) -> Option<Row> {
        let mut v = rhs.to_vec();
        v.extend(std::iter::repeat_n(0, self.nrows));
        let red = self.aug.reduce(&v);
        if !is_zero(&red[..self.ncols]) {
            return None;
        }
        Some(neg(&self.ring, &red[self.ncols..]))
    }
}

pub fn left_kernel(ring: &BaseRing, mat: &[Row], ncols: usize, rel: &Span) -> Span {
    LeftSolver::new(ring, mat, ncols, rel).kernel()
}

pub fn solve_left(
    ring: &BaseRing,
    mat: &[Row],
    ncols: usize,
    rhs: &[u64],
    rel: &Span,
) -> Option<Row> {
    LeftSolver::new(ring, mat, ncols, rel).solve(rhs)
}

/// Smith form `U * M * V = diag(p^{exps})`; only `V` and `V^{-1}` are kept.
#[derive(Clone, Debug)]
pub struct Smith {
    /// One exponent per column; columns beyond the rank get `e`.
    pub exps: Vec<u32>,
    pub v: Vec<Row>,
    pub v_inv: Vec<Row>,
}

pub fn smith(ring: &BaseRing, rows: &[Row], ncols: usize) -> Smith {
    let mut d: Vec<Row> = rows.iter().filter(|r| !is_zero(r)).cloned().collect();
    let mut v = identity(ncols);
    let mut v_inv = identity(ncols);
    let mut exps = vec![ring.e(); ncols];
    let mut t = 0;
    while t < ncols && t < d.len() {
        let mut best: Option<(usize, usize, u32)> = None;
        'search: for (i, r) in d.iter().enumerate().skip(t) {
            for (j, x) in r.iter().enumerate().skip(t) {
                if *x != 0 {
                    let val = ring.valuation(*x);
                    if best.is_none_or(|b| val < b.2) {
                        best = Some((i, j, val));
                        if val == 0 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((i, j, k)) = best else { break };
        d.swap(t, i);
        if j != t {
            for r in d.iter_mut() {
                r.swap(t, j);
            }
            for r in v.iter_mut() {
                r.swap(t, j);
            }
            v_inv.swap(t, j);
        }
        let (_, u) = ring.split(d[t][t]);
        let uinv = ring.inv(u).expect("unit");
        for r in d.iter_mut() {
            r[t] = ring.mul(r[t], uinv);
        }
        for r in v.iter_mut() {
            r[t] = ring.mul(r[t], uinv);
        }
        for x in v_inv[t].iter_mut() {
            *x = ring.mul(*x, u);
        }
        let pk = ring.p_pow(k);
        let pivot_row = d[t].clone();
        for r in d.iter_mut().skip(t + 1) {
            if r[t] != 0 {
                let q = r[t] / pk;
                axpy(ring, r, &pivot_row, ring.neg(q));
            }
        }
        for jj in t + 1..ncols {
            let x = d[t][jj];
            if x != 0 {
                let q = x / pk;
                let nq = ring.neg(q);
                for r in d.iter_mut() {
                    let c = r[t];
                    r[jj] = ring.add(r[jj], ring.mul(nq, c));
                }
                for r in v.iter_mut() {
                    let c = r[t];
                    r[jj] = ring.add(r[jj], ring.mul(nq, c));
                }
                let row_jj = v_inv[jj].clone();
                axpy(ring, &mut v_inv[t], &row_jj, q);
            }
        }
        exps[t] = k;
        t += 1;
    }
    Smith { exps, v, v_inv }
}

/// The quotient `(Z/p^e)^n / N` presented as `(+) Z/p^{exps_i}`.
#[derive(Clone, Debug)]
pub struct Presentation {
    ring: BaseRing,
    n: usize,
    v: Vec<Row>,
    v_inv: Vec<Row>,
    kept: Vec<usize>,
    exps: Vec<u32>,
}

impl Presentation {
    pub fn of_quotient(span: &Span) -> Presentation {
        let ring = *span.ring();
        let n = span.ncols();
        let s = smith(&ring, span.rows(), n);
        let kept: Vec<usize> = (0..n).filter(|t| s.exps[*t] > 0).collect();
        let exps = kept.iter().map(|t| s.exps[*t]).collect();
        Presentation {
            ring,
            n,
            v: s.v,
            v_inv: s.v_inv,
            kept,
            exps,
        }
    }

    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.kept.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn log_order(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Coordinates of the class of `x`.
    pub fn project(&self, x: &[u64]) -> Row {
        let full = vec_mat(&self.ring, x, &self.v, self.n);
        self.kept
            .iter()
            .zip(&self.exps)
            .map(|(t, k)| full[*t] % self.ring.p().pow(*k))
            .collect()
    }

    /// An ambient representative of the class with coordinates `y`.
    pub fn lift(&self, y: &[u64]) -> Row {
        let mut out = vec![0; self.n];
        for (yj, t) in y.iter().zip(&self.kept) {
            axpy(&self.ring, &mut out, &self.v_inv[*t], *yj);
        }
        out
    }
}

/// Invariant exponents of `N / K` for spans `K <= N` in a common ambient
/// space, sorted ascending. `N / K = (+) Z/p^{k_i}`.
pub fn quotient_invariants(n: &Span, k: &Span) -> Vec<u32> {
    SubquotientPresentation::new(n, k).exps().to_vec()
}

/// A subquotient `N / K` of `(Z/p^e)^n`, presented abstractly.
#[derive(Clone, Debug)]
pub struct SubquotientPresentation {
    gens: Vec<Row>,
    solver: LeftSolver,
    pres: Presentation,
    ncols: usize,
}

impl SubquotientPresentation {
    pub fn new(n: &Span, k: &Span) -> SubquotientPresentation {
        let ring = *n.ring();
        let ncols = n.ncols();
        let gens: Vec<Row> = n.rows().to_vec();
        let r = gens.len();
        let solver = LeftSolver::new(&ring, &gens, ncols, &Span::zero(&ring, ncols));
        let syz = solver.kernel();
        let mut rel: Vec<Row> = syz.rows().to_vec();
        for kr in k.rows() {
            let c = solver.solve(kr).expect("K must lie in N");
            rel.push(c);
        }
        let pres = Presentation::of_quotient(&Span::new(&ring, r, rel));
        SubquotientPresentation {
            gens,
            solver,
            pres,
            ncols,
        }
    }

    pub fn exps(&self) -> &[u32] {
        self.pres.exps()
    }

    pub fn dim(&self) -> usize {
        self.pres.dim()
    }

    pub fn log_order(&self) -> u32 {
        self.pres.log_order()
    }

    /// Coordinates of `x` (which must lie in `N`).
    pub fn coords(&self, x: &[u64]) -> Option<Row> {
        self.solver.solve(x).map(|c| self.pres.project(&c))
    }

    /// Ambient element with the given coordinates.
    pub fn element(&self, y: &[u64]) -> Row {
        let c = self.pres.lift(y);
        vec_mat(self.pres.ring(), &c, &self.gens, self.ncols)
    }

    /// Ambient elements for the standard generators of the subquotient.
    pub fn generators(&self) -> Vec<Row> {
        (0..self.dim())
            .map(|i| self.element(&unit_vector(self.dim(), i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_span(ring: &BaseRing, gens: &[Row], n: usize) -> std::collections::BTreeSet<Row> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(vec![0; n]);
        loop {
            let mut added = false;
            let cur: Vec<Row> = set.iter().cloned().collect();
            for a in &cur {
                for g in gens {
                    let s = add(ring, a, g);
                    if set.insert(s) {
                        added = true;
                    }
                }
            }
            if !added {
                return set;
            }
        }
    }

    #[test]
    fn howell_matches_brute_force_closure() {
        let ring = BaseRing::new(3, 2).unwrap();
        let gens = vec![vec![3, 6, 1], vec![0, 3, 3], vec![6, 0, 0]];
        let span = Span::new(&ring, 3, gens.clone());
        let brute = brute_span(&ring, &gens, 3);
        assert_eq!(3u32.pow(span.log_order()) as usize, brute.len());
        let elems: std::collections::BTreeSet<Row> = span.elements().into_iter().collect();
        assert_eq!(elems, brute);
        for x in 0..9 {
            for y in 0..9 {
                for z in 0..9 {
                    let v = vec![x, y, z];
                    assert_eq!(span.contains(&v), brute.contains(&v));
                }
            }
        }
    }

    #[test]
    fn howell_property_needs_augmentation() {
        // span of (3, 1) over Z/9: contains 3*(3,1) = (0,3).
        let ring = BaseRing::new(3, 2).unwrap();
        let span = Span::new(&ring, 2, vec![vec![3, 1]]);
        assert!(span.contains(&[0, 3]));
        assert!(!span.contains(&[0, 1]));
        assert_eq!(span.log_order(), 2);
    }

    #[test]
    fn kernel_and_solve() {
        let ring = BaseRing::new(5, 2).unwrap();
        let m = vec![vec![5, 1], vec![0, 5], vec![1, 0]];
        let ker = left_kernel(&ring, &m, 2, &Span::zero(&ring, 2));
        for k in ker.elements() {
            assert!(is_zero(&vec_mat(&ring, &k, &m, 2)));
        }
        // brute-force kernel size
        let mut count = 0;
        for a in 0..25 {
            for b in 0..25 {
                for c in 0..25 {
                    if is_zero(&vec_mat(&ring, &[a, b, c], &m, 2)) {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(5u32.pow(ker.log_order()), count);
        let x = solve_left(&ring, &m, 2, &[7, 3], &Span::zero(&ring, 2)).unwrap();
        assert_eq!(vec_mat(&ring, &x, &m, 2), vec![7, 3]);
    }

    #[test]
    fn quotient_presentation_orders() {
        let ring = BaseRing::new(3, 3).unwrap();
        let n = Span::new(&ring, 2, vec![vec![3, 9], vec![0, 9]]);
        let pres = Presentation::of_quotient(&n);
        let mut exps = pres.exps().to_vec();
        exps.sort();
        assert_eq!(exps, vec![1, 2]);
        for v in [vec![1, 2], vec![4, 5], vec![3, 0]] {
            let y = pres.project(&v);
            let back = pres.lift(&y);
            assert!(n.contains(&sub(&ring, &back, &v)));
        }
    }

    #[test]
    fn subquotient_invariants() {
        let ring = BaseRing::new(3, 2).unwrap();
        let full = Span::full(&ring, 2);
        let k = Span::new(&ring, 2, vec![vec![3, 0]]);
        let mut ex = quotient_invariants(&full, &k);
        ex.sort();
        assert_eq!(ex, vec![1, 2]);
    }
}
