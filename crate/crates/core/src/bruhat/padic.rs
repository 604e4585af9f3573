//! Integer helpers and truncated p-adic numbers.

use crate::error::{Error, Result};

pub(crate) fn pow_u64(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("p-adic level overflows u64")
}

/// `v_p(d)` for `d != 0`.
pub(crate) fn valuation(p: u64, mut d: u64) -> u32 {
    debug_assert!(d != 0);
    let mut v = 0;
    while d.is_multiple_of(p) {
        d /= p;
        v += 1;
    }
    v
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

/// A nonzero element `p^val * unit` of Q_p known to `prec` digits of the unit,
/// or zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QpElem {
    p: u64,
    part: Option<(i32, u64, u32)>,
}

impl QpElem {
    pub fn zero(p: u64) -> QpElem {
        QpElem { p, part: None }
    }

    pub fn new(p: u64, val: i32, unit: u64, prec: u32) -> Result<QpElem> {
        if unit.is_multiple_of(p) {
            return Err(Error::Domain(format!("{unit} is not a {p}-adic unit")));
        }
        let modulus = pow_u64(p, prec);
        Ok(QpElem { p, part: Some((val, unit % modulus, prec)) })
    }

    /// `ϖ^k` with unit part 1 known to the given precision.
    pub fn uniformizer_power(p: u64, k: i32, prec: u32) -> QpElem {
        QpElem { p, part: Some((k, 1 % pow_u64(p, prec), prec)) }
    }

    pub fn from_rational(p: u64, num: i64, den: i64, prec: u32) -> Result<QpElem> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        if num == 0 {
            return Ok(QpElem::zero(p));
        }
        let neg = (num < 0) != (den < 0);
        let (mut a, mut b) = (num.unsigned_abs(), den.unsigned_abs());
        let mut val = 0i32;
        while a % p == 0 {
            a /= p;
            val += 1;
        }
        while b % p == 0 {
            b /= p;
            val -= 1;
        }
        let modulus = pow_u64(p, prec);
        let inv = mod_inverse(b % modulus, modulus).expect("unit is invertible");
        let mut u = ((a % modulus) as u128 * inv as u128 % modulus as u128) as u64;
        if neg {
            u = (modulus - u) % modulus;
        }
        if modulus == 1 {
            u = 0;
        }
        Ok(QpElem { p, part: Some((val, u, prec)) })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.part.is_none()
    }

    pub fn valuation(&self) -> Option<i32> {
        self.part.map(|(v, _, _)| v)
    }

    /// Unit part modulo `p^prec` and the precision.
    pub fn unit(&self) -> Option<(u64, u32)> {
        self.part.map(|(_, u, k)| (u, k))
    }

    pub fn neg(&self) -> QpElem {
        match self.part {
            None => *self,
            Some((v, u, k)) => {
                let m = pow_u64(self.p, k);
                QpElem { p: self.p, part: Some((v, (m - u) % m, k)) }
            }
        }
    }

    /// `x` reduced to an index at level `(m, n)`: the residue of `x p^m` modulo `p^(m+n)`,
    /// or `None` outside `p^-m Z_p`.
    pub(crate) fn level_index(&self, m: i32, n: i32) -> Result<Option<u64>> {
        let (v, u, prec) = match self.part {
            None => return Ok(Some(0)),
            Some(t) => t,
        };
        if v < -m {
            return Ok(None);
        }
        if v >= n {
            return Ok(Some(0));
        }
        let shift = (v + m) as u32;
        let digits = (n - v) as u32;
        if prec < digits {
            return Err(Error::Precision { needed: digits, have: prec });
        }
        let total = (m + n) as u32;
        let modulus = pow_u64(self.p, total);
        let unit = u % pow_u64(self.p, digits);
        Ok(Some(pow_u64(self.p, shift) * unit % modulus))
    }
}
