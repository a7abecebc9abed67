//! Arithmetic in the truncated base ring `O = Z/p^e`.
//!
//! Elements are stored as canonical residues in `[0, p^e)`. The uniformizer
//! is `p` itself, so every nonzero residue factors uniquely as `p^v * u`
//! with `u` a unit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest modulus accepted; keeps every product inside a `u64`.
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaseRingError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("truncation exponent must be at least 1")]
    ZeroExponent,
    #[error("modulus {p}^{e} exceeds the supported range")]
    TooLarge { p: u64, e: u32 },
}

/// The ring `Z/p^e`, standing in for a truncated discrete valuation ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BaseRingSpec", into = "BaseRingSpec")]
pub struct BaseRing {
    p: u64,
    e: u32,
    modulus: u64,
}

#[derive(Serialize, Deserialize)]
struct BaseRingSpec {
    p: u64,
    e: u32,
}

impl TryFrom<BaseRingSpec> for BaseRing {
    type Error = BaseRingError;
    fn try_from(s: BaseRingSpec) -> Result<Self, Self::Error> {
        BaseRing::new(s.p, s.e)
    }
}

impl From<BaseRing> for BaseRingSpec {
    fn from(r: BaseRing) -> Self {
        BaseRingSpec { p: r.p, e: r.e }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl BaseRing {
    pub fn new(p: u64, e: u32) -> Result<Self, BaseRingError> {
        if !is_prime(p) {
            return Err(BaseRingError::NotPrime(p));
        }
        if e == 0 {
            return Err(BaseRingError::ZeroExponent);
        }
        let mut modulus: u64 = 1;
        for _ in 0..e {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m <= MAX_MODULUS)
                .ok_or(BaseRingError::TooLarge { p, e })?;
        }
        Ok(BaseRing { p, e, modulus })
    }

    /// The residue field `F_p` as a ring in its own right.
    pub fn residue(&self) -> BaseRing {
        BaseRing {
            p: self.p,
            e: 1,
            modulus: self.p,
        }
    }

    /// Same prime, different truncation level.
    pub fn with_exponent(&self, e: u32) -> Result<BaseRing, BaseRingError> {
        BaseRing::new(self.p, e)
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `p^k` as an element; zero once `k >= e`.
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.e {
            return 0;
        }
        self.p.pow(k)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        x.rem_euclid(self.modulus as i64) as u64
    }

    /// Symmetric representative in `(-m/2, m/2]`, handy for display.
    pub fn to_signed(&self, x: u64) -> i64 {
        let x = x % self.modulus;
        if x > self.modulus / 2 {
            x as i64 - self.modulus as i64
        } else {
            x as i64
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        (a * b) % self.modulus
    }

    pub fn pow(&self, a: u64, mut k: u64) -> u64 {
        let mut base = a % self.modulus;
        let mut acc = 1 % self.modulus;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// `p`-adic valuation; `e` for zero.
    pub fn valuation(&self, a: u64) -> u32 {
        let mut a = a % self.modulus;
        if a == 0 {
            return self.e;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    /// Inverse of a unit.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.modulus;
        if !self.is_unit(a) {
            return None;
        }
        let (mut old_r, mut r) = (a as i128, self.modulus as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        Some(old_s.rem_euclid(self.modulus as i128) as u64)
    }

    /// Writes a nonzero `a` as `p^v * u` and returns `(v, u)`.
    pub fn split(&self, a: u64) -> (u32, u64) {
        let v = self.valuation(a);
        if v >= self.e {
            return (self.e, 0);
        }
        (v, (a % self.modulus) / self.p.pow(v))
    }

    /// Log base `p` of an order that is known to be a power of `p`.
    pub fn log_p(&self, mut n: u128) -> u32 {
        let mut k = 0;
        while n > 1 {
            debug_assert!(n.is_multiple_of(self.p as u128));
            n /= self.p as u128;
            k += 1;
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(BaseRing::new(9, 1), Err(BaseRingError::NotPrime(9)));
        assert_eq!(BaseRing::new(3, 0), Err(BaseRingError::ZeroExponent));
        assert!(BaseRing::new(3, 40).is_err());
    }

    #[test]
    fn uniformizer_is_nilpotent_of_exact_order() {
        for (p, e) in [(3, 1), (3, 2), (5, 3), (7, 2)] {
            let o = BaseRing::new(p, e).unwrap();
            assert_eq!(o.pow(p, e as u64), 0);
            assert_ne!(o.pow(p, e as u64 - 1), 0);
        }
    }

    #[test]
    fn inverse_and_split() {
        let o = BaseRing::new(3, 3).unwrap();
        for a in 0..27 {
            match o.inv(a) {
                Some(b) => assert_eq!(o.mul(a, b), 1),
                None => assert_eq!(a % 3, 0),
            }
        }
        assert_eq!(o.split(18), (2, 2));
        assert_eq!(o.valuation(0), 3);
        assert_eq!(o.to_signed(26), -1);
    }
}
