//! Built-in algebras and groups.

use crate::group_rep::{FiniteGroup, GroupError};
use crate::linalg::Row;
use crate::ring_core::LocalAlgebra;
use crate::zmod::{BaseRing, BaseRingError};

/// `O = Z/p^e` as an algebra over itself.
pub fn base_ring_algebra(base: BaseRing) -> LocalAlgebra {
    LocalAlgebra::new(base, None, vec![vec![vec![1]]], vec![1]).expect("base ring is local")
}

/// `O[x]/(f)` for monic `f = x^n + c_{n-1} x^{n-1} + ... + c_0`, with
/// `coeffs = [c_0, ..., c_{n-1}]`. Panics if the result is not local.
pub fn monogenic(base: BaseRing, coeffs: &[i64]) -> LocalAlgebra {
    try_monogenic(base, coeffs).expect("monogenic algebra must be local")
}

pub fn try_monogenic(
    base: BaseRing,
    coeffs: &[i64],
) -> Result<LocalAlgebra, crate::ring_core::AlgebraError> {
    let n = coeffs.len();
    let c: Row = coeffs.iter().map(|x| base.from_i64(*x)).collect();
    // x^k for k < 2n as coordinate rows
    let mut powers: Vec<Row> = Vec::with_capacity(2 * n);
    for k in 0..n {
        powers.push(crate::linalg::unit_vector(n, k));
    }
    for _ in n..2 * n {
        let prev = powers.last().expect("n >= 1").clone();
        // multiply by x
        let mut next = vec![0; n];
        next[1..].copy_from_slice(&prev[..n - 1]);
        let top = prev[n - 1];
        for i in 0..n {
            next[i] = base.sub(next[i], base.mul(top, c[i]));
        }
        powers.push(next);
    }
    let structure = (0..n)
        .map(|i| (0..n).map(|j| powers[i + j].clone()).collect())
        .collect();
    LocalAlgebra::new(base, None, structure, crate::linalg::unit_vector(n, 0))
}

/// `O[eps]/(eps^2)`.
pub fn dual_numbers(base: BaseRing) -> LocalAlgebra {
    monogenic(base, &[0, 0])
}

/// `O[d]/(d^2, p d)`: the nilpotent generator has additive order `p`.
pub fn delta_algebra(base: BaseRing) -> LocalAlgebra {
    let e = base.e();
    let structure = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![0, 0]]];
    LocalAlgebra::new(base, Some(vec![e, 1]), structure, vec![1, 0]).expect("local")
}

/// `O[x_1..x_k]/(x_1..x_k)^2`.
pub fn square_zero(base: BaseRing, k: usize) -> LocalAlgebra {
    let d = k + 1;
    let mut structure = vec![vec![vec![0; d]; d]; d];
    for i in 0..d {
        structure[0][i] = crate::linalg::unit_vector(d, i);
        structure[i][0] = crate::linalg::unit_vector(d, i);
    }
    LocalAlgebra::new(base, None, structure, crate::linalg::unit_vector(d, 0)).expect("local")
}

/// `O[x]/(x^k)`.
pub fn truncated_polynomial(base: BaseRing, k: usize) -> LocalAlgebra {
    monogenic(base, &vec![0; k])
}

/// The field with `p^f` elements as `F_p[x]/(g)` for the first irreducible
/// monic `g` of degree `f` in lexicographic order.
pub fn finite_field(p: u64, f: usize) -> Result<LocalAlgebra, BaseRingError> {
    let base = BaseRing::new(p, 1)?;
    if f == 1 {
        return Ok(base_ring_algebra(base));
    }
    let total = p.pow(f as u32);
    for code in 0..total {
        let coeffs: Vec<i64> = (0..f)
            .map(|i| ((code / p.pow(i as u32)) % p) as i64)
            .collect();
        if let Ok(a) = try_monogenic(base, &coeffs) {
            if a.is_field() {
                return Ok(a);
            }
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Named algebras used by demos and oracle sweeps.
pub fn algebras() -> Vec<(String, LocalAlgebra)> {
    let mut out = Vec::new();
    for p in [3u64, 5, 7] {
        let f = BaseRing::new(p, 1).expect("prime");
        let o2 = BaseRing::new(p, 2).expect("prime");
        out.push((format!("F{p}"), base_ring_algebra(f)));
        out.push((format!("Z/{p}^2"), base_ring_algebra(o2)));
        out.push((format!("F{p}[eps]"), dual_numbers(f)));
        out.push((format!("Z/{p}^2[d]/(d^2,{p}d)"), delta_algebra(o2)));
    }
    let b3 = BaseRing::new(3, 1).expect("prime");
    let b9 = BaseRing::new(3, 2).expect("prime");
    let b27 = BaseRing::new(3, 3).expect("prime");
    out.push(("Z/27".into(), base_ring_algebra(b27)));
    out.push(("Z/9[x]/(x^2-3x)".into(), monogenic(b9, &[0, -3])));
    out.push(("Z/9[x]/(x^2-3)".into(), monogenic(b9, &[-3, 0])));
    out.push(("Z/9[eps]".into(), dual_numbers(b9)));
    out.push(("Z/27[d]/(d^2,3d)".into(), delta_algebra(b27)));
    out.push(("F3[x]/(x^3)".into(), truncated_polynomial(b3, 3)));
    out.push(("F3[x]/(x^4)".into(), truncated_polynomial(b3, 4)));
    out.push(("F3[x,y]/(x,y)^2".into(), square_zero(b3, 2)));
    out.push(("F3[x,y,z]/(x,y,z)^2".into(), square_zero(b3, 3)));
    out.push(("Z/9[x,y]/(x,y)^2".into(), square_zero(b9, 2)));
    out.push(("Z/9[x]/(x^3)".into(), truncated_polynomial(b9, 3)));
    out.push(("F9".into(), finite_field(3, 2).expect("prime")));
    out.push(("F27".into(), finite_field(3, 3).expect("prime")));
    out
}

pub fn cyclic(n: usize) -> FiniteGroup {
    let table = (0..n)
        .map(|i| (0..n).map(|j| (i + j) % n).collect())
        .collect();
    FiniteGroup::from_table(table, Some(format!("Z/{n}"))).expect("cyclic group")
}

/// Dihedral group of order `2m`: elements `r^k s^b` indexed `k + m b`.
pub fn dihedral(m: usize) -> FiniteGroup {
    let n = 2 * m;
    let idx = |k: usize, b: usize| k % m + m * b;
    let mut table = vec![vec![0; n]; n];
    for (k1, b1) in (0..m).flat_map(|k| [(k, 0), (k, 1)]) {
        for (k2, b2) in (0..m).flat_map(|k| [(k, 0), (k, 1)]) {
            // r^k1 s^b1 r^k2 s^b2 = r^(k1 +- k2) s^(b1+b2)
            let k = if b1 == 0 { k1 + k2 } else { k1 + m - k2 };
            table[idx(k1, b1)][idx(k2, b2)] = idx(k, (b1 + b2) % 2);
        }
    }
    let mut g = FiniteGroup::from_table(table, Some(format!("D{m}"))).expect("dihedral group");
    g.set_generators(vec![1 % n, m]);
    g
}

pub fn symmetric3() -> FiniteGroup {
    let mut g = dihedral(3);
    g.set_label("S3");
    g
}

/// Quaternion group: `i^a j^b (-1)^c` style indexing via matrices over `F_3`.
pub fn quaternion() -> FiniteGroup {
    let i = vec![vec![0, 2], vec![1, 0]];
    let j = vec![vec![1, 1], vec![1, 2]];
    let mut g = FiniteGroup::from_matrix_generators(3, &[i, j], 2000).expect("Q8");
    g.set_label("Q8");
    g
}

/// `Z/p x| Z/q` with `q | p - 1`, generators `a` (order p) and `b` acting by
/// an element of order `q` in `(Z/p)^x`.
pub fn semidirect(p: usize, q: usize) -> Result<FiniteGroup, GroupError> {
    if !(p - 1).is_multiple_of(q) {
        return Err(GroupError::NotAGroup(format!(
            "{q} does not divide {p} - 1"
        )));
    }
    let u = (1..p)
        .find(|u| {
            let mut x = 1;
            let mut ord = 0;
            loop {
                x = x * u % p;
                ord += 1;
                if x == 1 {
                    break;
                }
            }
            ord == q
        })
        .expect("cyclic unit group");
    let n = p * q;
    let upow = |k: usize| (0..k).fold(1, |acc, _| acc * u % p);
    // a^x b^y indexed x + p y; b a b^-1 = a^u
    let mut table = vec![vec![0; n]; n];
    for x1 in 0..p {
        for y1 in 0..q {
            for x2 in 0..p {
                for y2 in 0..q {
                    let x = (x1 + upow(y1) * x2) % p;
                    let y = (y1 + y2) % q;
                    table[x1 + p * y1][x2 + p * y2] = x + p * y;
                }
            }
        }
    }
    let mut g = FiniteGroup::from_table(table, Some(format!("Z/{p}x|Z/{q}")))?;
    g.set_generators(vec![1, p]);
    Ok(g)
}

pub fn sl2_f3() -> FiniteGroup {
    let a = vec![vec![1, 1], vec![0, 1]];
    let b = vec![vec![1, 0], vec![1, 1]];
    let mut g = FiniteGroup::from_matrix_generators(3, &[a, b], 2000).expect("SL2(F3)");
    g.set_label("SL2(F3)");
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_orders() {
        assert_eq!(cyclic(3).order(), 3);
        assert_eq!(symmetric3().order(), 6);
        assert_eq!(dihedral(4).order(), 8);
        assert_eq!(quaternion().order(), 8);
        assert_eq!(semidirect(5, 4).unwrap().order(), 20);
        assert_eq!(semidirect(7, 3).unwrap().order(), 21);
        assert_eq!(sl2_f3().order(), 24);
        assert!(!quaternion().is_abelian());
        // Q8 has a unique element of order 2
        let q = quaternion();
        assert_eq!((0..8).filter(|g| q.element_order(*g) == 2).count(), 1);
    }

    #[test]
    fn catalog_algebras_are_valid() {
        for (name, a) in algebras() {
            assert!(a.log_order() >= 1, "{name}");
        }
    }
}
