//! O^x-invariant functions on Q_p^x as sequences over valuation shells.
//!
//! `value_at(k)` is the value on `{v_p(x) = k}`. An optional tail records a
//! constant value on every shell `k >= from`, i.e. near zero.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::level::LevelFunction;
use crate::error::{Error, Result};
use crate::measures::is_prime;

#[derive(Debug, Clone, PartialEq)]
pub struct MultSeq {
    p: u64,
    coeffs: BTreeMap<i32, Complex64>,
    tail: Option<(i32, Complex64)>,
}

impl MultSeq {
    pub fn new(p: u64) -> Result<MultSeq> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(MultSeq { p, coeffs: BTreeMap::new(), tail: None })
    }

    pub fn from_shells<I: IntoIterator<Item = (i32, Complex64)>>(p: u64, shells: I) -> Result<MultSeq> {
        let mut s = MultSeq::new(p)?;
        for (k, v) in shells {
            s.set(k, v);
        }
        Ok(s)
    }

    pub fn from_real_shells(p: u64, shells: &[(i32, f64)]) -> Result<MultSeq> {
        Self::from_shells(p, shells.iter().map(|&(k, v)| (k, Complex64::from(v))))
    }

    /// The shell indicator `e_k`.
    pub fn unit_shell(p: u64, k: i32) -> Result<MultSeq> {
        Self::from_shells(p, [(k, Complex64::new(1.0, 0.0))])
    }

    pub fn with_tail(mut self, from: i32, value: Complex64) -> Result<MultSeq> {
        if let Some((&last, _)) = self.coeffs.iter().next_back() {
            if last >= from {
                return Err(Error::Support(format!("tail from {from} overlaps shell {last}")));
            }
        }
        self.tail = if value.norm() == 0.0 { None } else { Some((from, value)) };
        Ok(self)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.p as f64
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, Complex64> {
        &self.coeffs
    }

    pub fn tail(&self) -> Option<(i32, Complex64)> {
        self.tail
    }

    fn set(&mut self, k: i32, v: Complex64) {
        if v.norm() == 0.0 {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, v);
        }
    }

    pub fn value_at(&self, k: i32) -> Complex64 {
        if let Some((from, v)) = self.tail {
            if k >= from {
                return v;
            }
        }
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    /// Smallest and largest shell carrying an explicit value.
    pub fn support(&self) -> Option<(i32, i32)> {
        let lo = self.coeffs.keys().next().copied();
        let hi = self.coeffs.keys().next_back().copied();
        lo.zip(hi)
    }

    /// Normalise so that the tail starts right after the last explicit shell that differs from it.
    pub(crate) fn canonical(mut self) -> MultSeq {
        if let Some((mut from, v)) = self.tail {
            while let Some(&c) = self.coeffs.get(&(from - 1)) {
                if c != v {
                    break;
                }
                self.coeffs.remove(&(from - 1));
                from -= 1;
            }
            self.tail = Some((from, v));
        }
        self
    }

    pub fn add(&self, other: &MultSeq) -> Result<MultSeq> {
        if self.p != other.p {
            return Err(Error::Domain("primes differ".into()));
        }
        let mut keys: Vec<i32> = self.coeffs.keys().chain(other.coeffs.keys()).copied().collect();
        let tail_from = self.tail.map(|t| t.0).into_iter().chain(other.tail.map(|t| t.0)).max();
        let start = tail_from.map(|f| keys.iter().map(|k| k + 1).fold(f, i32::max));
        if let Some(s) = start {
            let lo = self.tail.map(|t| t.0).into_iter().chain(other.tail.map(|t| t.0)).min().unwrap();
            keys.extend(lo..s);
        }
        let mut out = MultSeq::new(self.p)?;
        for k in keys {
            if start.is_none_or(|s| k < s) {
                out.set(k, self.value_at(k) + other.value_at(k));
            }
        }
        if let Some(s) = start {
            let v = self.value_at(s) + other.value_at(s);
            if v.norm() != 0.0 {
                out.tail = Some((s, v));
            }
        }
        Ok(out.canonical())
    }

    pub fn scale(&self, c: Complex64) -> MultSeq {
        let mut out = MultSeq { p: self.p, coeffs: BTreeMap::new(), tail: None };
        for (&k, &v) in &self.coeffs {
            out.set(k, v * c);
        }
        out.tail = self.tail.map(|(f, v)| (f, v * c)).filter(|(_, v)| v.norm() != 0.0);
        out
    }

    /// `λ_{ϖ^j}`: `(λ f)(x) = f(ϖ^-j x)`, which moves shell `k` to `k + j`.
    pub fn shift(&self, j: i32) -> MultSeq {
        MultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&k, &v)| (k + j, v)).collect(),
            tail: self.tail.map(|(f, v)| (f + j, v)),
        }
    }

    /// `(J f)(x) = |x|^-1 f(1/x)`, i.e. `(J f)[k] = q^k f[-k]`.
    pub fn j_op(&self) -> Result<MultSeq> {
        if self.tail.is_some() {
            return Err(Error::Support("J needs a finitely supported sequence".into()));
        }
        let q = self.q();
        Ok(MultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&k, &v)| (-k, v * q.powi(-k))).collect(),
            tail: None,
        })
    }

    /// `∫ f(x) |x|^s d^x x = ln q Σ_k f[k] q^(-k s)`.
    pub fn mellin(&self, s: Complex64) -> Result<Complex64> {
        let q = self.q();
        let ln_q = q.ln();
        let w = |k: i32| (-(k as f64) * ln_q * s).exp();
        let mut acc: Complex64 = self.coeffs.iter().map(|(&k, &v)| v * w(k)).sum();
        if let Some((from, v)) = self.tail {
            if s.re <= 0.0 {
                return Err(Error::Divergence(format!("tail near 0 with Re s = {}", s.re)));
            }
            acc += v * w(from) / (1.0 - (-ln_q * s).exp());
        }
        Ok(acc * ln_q)
    }

    /// `∫ f dx` (additive measure, `vol(Z_p) = 1`).
    pub fn additive_integral(&self) -> Complex64 {
        let q = self.q();
        let shell = |k: i32| q.powi(-k) * (1.0 - 1.0 / q);
        let mut acc: Complex64 = self.coeffs.iter().map(|(&k, &v)| v * shell(k)).sum();
        if let Some((from, v)) = self.tail {
            acc += v * q.powi(-from);
        }
        acc
    }

    /// The function itself as a level function on Q_p (value at 0 from the tail).
    pub fn to_level_function(&self) -> Result<LevelFunction> {
        let (lo, hi) = match (self.support(), self.tail) {
            (Some((lo, hi)), Some((f, _))) => (lo.min(f), hi.max(f - 1)),
            (Some(s), None) => s,
            (None, Some((f, _))) => (f, f - 1),
            (None, None) => return LevelFunction::zero(self.p, 0, 0),
        };
        let (m, n) = (-lo, hi + 1);
        let mut f = LevelFunction::zero(self.p, m, n)?;
        let p = self.p as usize;
        for (d, c) in f.coeffs_mut().iter_mut().enumerate() {
            let k = if d == 0 { n } else { super::padic::valuation(p as u64, d as u64) as i32 - m };
            *c = self.value_at(k);
        }
        Ok(f)
    }

    pub fn max_abs_diff(&self, other: &MultSeq) -> f64 {
        let keys: Vec<i32> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .chain(self.tail.map(|t| t.0))
            .chain(other.tail.map(|t| t.0))
            .collect();
        let lo = keys.iter().copied().min().unwrap_or(0);
        let hi = keys.iter().copied().max().unwrap_or(0);
        (lo..=hi + 1).map(|k| (self.value_at(k) - other.value_at(k)).norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::from(v)
    }

    #[test]
    fn j_on_unit_shells() {
        // valuation indexing: J e_1 = q^-1 e_-1
        let e1 = MultSeq::unit_shell(2, 1).unwrap();
        let j = e1.j_op().unwrap();
        assert_eq!(j.value_at(-1), c(0.5));
        let em = MultSeq::unit_shell(2, -1).unwrap().j_op().unwrap();
        assert_eq!(em.value_at(1), c(2.0));
        assert_eq!(j.j_op().unwrap(), e1);
    }

    #[test]
    fn mellin_of_integers() {
        // 1_{Z_p} has Mellin transform ln q / (1 - q^-s)
        let f = MultSeq::new(3).unwrap().with_tail(0, c(1.0)).unwrap();
        let s = Complex64::new(0.7, 1.3);
        let q: f64 = 3.0;
        let want = q.ln() / (1.0 - (-q.ln() * s).exp());
        assert!((f.mellin(s).unwrap() - want).norm() < 1e-14);
        assert!(matches!(f.mellin(Complex64::new(-0.1, 0.0)), Err(Error::Divergence(_))));
    }

    #[test]
    fn add_with_tails() {
        let a = MultSeq::new(2).unwrap().with_tail(0, c(1.0)).unwrap();
        let b = MultSeq::from_real_shells(2, &[(0, -1.0)]).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.value_at(0), c(0.0));
        assert_eq!(s.tail(), Some((1, c(1.0))));
    }

    #[test]
    fn level_round_trip() {
        let s = MultSeq::from_real_shells(3, &[(-2, 1.0), (0, 2.5)]).unwrap().with_tail(2, c(-1.0)).unwrap();
        let f = s.to_level_function().unwrap();
        assert_eq!(f.restrict_to_units_part().unwrap(), s);
    }

    #[test]
    fn additive_integral_of_ball() {
        let s = MultSeq::new(5).unwrap().with_tail(1, c(1.0)).unwrap();
        assert!((s.additive_integral() - c(0.2)).norm() < 1e-15);
    }
}
