//! Schwartz–Bruhat functions on Q_p stored at a level `(m, n)`.
//!
//! A function at level `(m, n)` vanishes outside `p^-m Z_p` and is constant on
//! cosets of `p^n Z_p`. Coefficient `D` (for `0 <= D < p^(m+n)`) is the value on
//! the coset of `p^-m D`.

use num_complex::Complex64;
use std::collections::BTreeMap;

use super::mult::MultSeq;
use super::padic::{mod_inverse, pow_u64, valuation, QpElem};
use crate::error::{Error, Result};
use crate::measures::is_prime;

/// Largest number of coefficients a float level function may carry.
pub const MAX_LEVEL_SIZE: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunction {
    p: u64,
    m: i32,
    n: i32,
    coeffs: Vec<Complex64>,
}

pub(crate) fn level_size(p: u64, m: i32, n: i32) -> Result<u64> {
    if m + n < 0 {
        return Err(Error::Level(format!("m + n = {} is negative", m + n)));
    }
    let k = (m + n) as u32;
    match p.checked_pow(k) {
        Some(size) if size <= MAX_LEVEL_SIZE => Ok(size),
        _ => Err(Error::Capacity { size: u64::MAX, cap: MAX_LEVEL_SIZE }),
    }
}

impl LevelFunction {
    pub fn new(p: u64, m: i32, n: i32, coeffs: Vec<Complex64>) -> Result<LevelFunction> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let size = level_size(p, m, n)?;
        if coeffs.len() as u64 != size {
            return Err(Error::Level(format!("expected {size} coefficients, got {}", coeffs.len())));
        }
        Ok(LevelFunction { p, m, n, coeffs })
    }

    pub fn from_real(p: u64, m: i32, n: i32, values: &[f64]) -> Result<LevelFunction> {
        Self::new(p, m, n, values.iter().map(|&v| Complex64::from(v)).collect())
    }

    pub fn zero(p: u64, m: i32, n: i32) -> Result<LevelFunction> {
        let size = level_size(p, m, n)?;
        Self::new(p, m, n, vec![Complex64::new(0.0, 0.0); size as usize])
    }

    /// `ξ_j`, the indicator of `p^j Z_p`, at its minimal level `(-j, j)`.
    pub fn xi(p: u64, j: i32) -> Result<LevelFunction> {
        Self::new(p, -j, j, vec![Complex64::new(1.0, 0.0)])
    }

    /// Indicator of `p^j Z_p^x` at level `(-j, j + 1)`.
    pub fn shell_indicator(p: u64, j: i32) -> Result<LevelFunction> {
        let mut f = Self::zero(p, -j, j + 1)?;
        for (d, c) in f.coeffs.iter_mut().enumerate() {
            if d % p as usize != 0 {
                *c = Complex64::new(1.0, 0.0);
            }
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> (i32, i32) {
        (self.m, self.n)
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Value at zero.
    pub fn at_zero(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Re-express at a finer level `(m2, n2)` with `m2 >= m`, `n2 >= n`.
    pub fn refine(&self, m2: i32, n2: i32) -> Result<LevelFunction> {
        if m2 < self.m || n2 < self.n {
            return Err(Error::Level(format!(
                "cannot refine level ({}, {}) to ({m2}, {n2})",
                self.m, self.n
            )));
        }
        let size = level_size(self.p, m2, n2)? as usize;
        let step = pow_u64(self.p, (m2 - self.m) as u32) as usize;
        let old = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for (d, c) in out.iter_mut().enumerate() {
            if d % step == 0 {
                *c = self.coeffs[(d / step) % old];
            }
        }
        Ok(LevelFunction { p: self.p, m: m2, n: n2, coeffs: out })
    }

    fn common(&self, other: &LevelFunction) -> Result<(LevelFunction, LevelFunction)> {
        if self.p != other.p {
            return Err(Error::Domain(format!("primes differ: {} and {}", self.p, other.p)));
        }
        let m = self.m.max(other.m);
        let n = self.n.max(other.n);
        Ok((self.refine(m, n)?, other.refine(m, n)?))
    }

    pub fn add(&self, other: &LevelFunction) -> Result<LevelFunction> {
        let (mut a, b) = self.common(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x += y;
        }
        Ok(a)
    }

    pub fn sub(&self, other: &LevelFunction) -> Result<LevelFunction> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &LevelFunction) -> Result<LevelFunction> {
        let (mut a, b) = self.common(other)?;
        for (x, y) in a.coeffs.iter_mut().zip(&b.coeffs) {
            *x *= y;
        }
        Ok(a)
    }

    pub fn scale(&self, c: Complex64) -> LevelFunction {
        let mut out = self.clone();
        for x in out.coeffs.iter_mut() {
            *x *= c;
        }
        out
    }

    /// Coefficient-wise comparison after common refinement.
    pub fn max_abs_diff(&self, other: &LevelFunction) -> Result<f64> {
        let (a, b) = self.common(other)?;
        Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    pub fn evaluate(&self, x: &QpElem) -> Result<Complex64> {
        if x.p() != self.p {
            return Err(Error::Domain(format!("point in Q_{} used for p = {}", x.p(), self.p)));
        }
        Ok(match x.level_index(self.m, self.n)? {
            Some(d) => self.coeffs[d as usize],
            None => Complex64::new(0.0, 0.0),
        })
    }

    /// `∫ f dx` with `vol(Z_p) = 1`.
    pub fn integral(&self) -> Complex64 {
        let w = (self.p as f64).powi(-self.n);
        self.coeffs.iter().sum::<Complex64>() * w
    }

    /// `||f||^2 = ∫ |f|^2 dx`.
    pub fn norm_sqr(&self) -> f64 {
        let w = (self.p as f64).powi(-self.n);
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * w
    }

    pub fn inner(&self, other: &LevelFunction) -> Result<Complex64> {
        let (a, b) = self.common(other)?;
        let w = (self.p as f64).powi(-a.n);
        Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y.conj()).sum::<Complex64>() * w)
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> LevelFunction {
        let n = self.coeffs.len();
        let mut out = self.clone();
        for d in 0..n {
            out.coeffs[d] = self.coeffs[(n - d) % n];
        }
        out
    }

    /// `(λ_a f)(x) = f(a^-1 x)` for `a = p^k u`.
    pub fn translate(&self, a: &QpElem) -> Result<LevelFunction> {
        if a.p() != self.p {
            return Err(Error::Domain("translation by an element of another field".into()));
        }
        let k = a.valuation().ok_or_else(|| Error::Domain("translation by zero".into()))?;
        let (u, prec) = a.unit().expect("nonzero");
        let total = (self.m + self.n) as u32;
        if total > 0 && prec < total {
            return Err(Error::Precision { needed: total, have: prec });
        }
        let size = self.coeffs.len() as u64;
        let u_inv = mod_inverse(u % size, size).expect("unit");
        let mut coeffs = vec![Complex64::new(0.0, 0.0); size as usize];
        for (d, c) in coeffs.iter_mut().enumerate() {
            let old = (d as u128 * u_inv as u128 % size as u128) as usize;
            *c = self.coeffs[old];
        }
        Ok(LevelFunction { p: self.p, m: self.m - k, n: self.n + k, coeffs })
    }

    /// Values on the valuation shells present at this level, with exactness check.
    fn shell_values(&self, tol: f64) -> Result<BTreeMap<i32, Complex64>> {
        let mut shells: BTreeMap<i32, Complex64> = BTreeMap::new();
        for (d, &c) in self.coeffs.iter().enumerate().skip(1) {
            let k = valuation(self.p, d as u64) as i32 - self.m;
            match shells.get(&k) {
                None => {
                    shells.insert(k, c);
                }
                Some(&v) => {
                    if (v - c).norm() > tol * (1.0 + v.norm()) {
                        return Err(Error::Invariance(format!(
                            "values {v} and {c} on valuation shell {k}"
                        )));
                    }
                }
            }
        }
        Ok(shells)
    }

    pub fn is_unit_invariant(&self) -> bool {
        self.shell_values(0.0).is_ok()
    }

    /// Coefficients `b_j` of `f = Σ b_j ξ_j` (zero coefficients dropped).
    pub fn xi_expansion(&self) -> Result<BTreeMap<i32, Complex64>> {
        let shells = self.shell_values(0.0)?;
        let mut out = BTreeMap::new();
        let mut prev = Complex64::new(0.0, 0.0);
        for k in -self.m..self.n {
            let a = shells.get(&k).copied().unwrap_or_default();
            let b = a - prev;
            if b != Complex64::new(0.0, 0.0) {
                out.insert(k, b);
            }
            prev = a;
        }
        let b = self.at_zero() - prev;
        if b != Complex64::new(0.0, 0.0) {
            out.insert(self.n, b);
        }
        Ok(out)
    }

    /// The linear map `ξ_j ↦ e_j` from O^x-invariant functions to shell sequences.
    pub fn to_multiplicative(&self) -> Result<MultSeq> {
        let expansion = self.xi_expansion()?;
        MultSeq::from_shells(self.p, expansion)
    }

    /// Inverse of [`to_multiplicative`](Self::to_multiplicative): `Σ b_j e_j ↦ Σ b_j ξ_j`.
    pub fn from_multiplicative(seq: &MultSeq) -> Result<LevelFunction> {
        if seq.tail().is_some() {
            return Err(Error::Support("ξ-synthesis needs a finitely supported sequence".into()));
        }
        let mut f = LevelFunction::zero(seq.p(), 0, 0)?;
        for (&j, &b) in seq.coeffs() {
            f = f.add(&LevelFunction::xi(seq.p(), j)?.scale(b))?;
        }
        Ok(f)
    }

    /// Restriction to `Q_p^x` as a shell sequence; the constant value near zero becomes the tail.
    pub fn restrict_to_units_part(&self) -> Result<MultSeq> {
        self.restrict_with_tol(0.0)
    }

    /// As [`restrict_to_units_part`](Self::restrict_to_units_part) but accepting shell values
    /// that agree to a relative tolerance (for floating-point transforms).
    pub fn restrict_with_tol(&self, tol: f64) -> Result<MultSeq> {
        let shells = self.shell_values(tol)?;
        let mut seq = MultSeq::from_shells(self.p, shells.into_iter().filter(|(_, v)| v.norm() != 0.0))?;
        let z = self.at_zero();
        if z.norm() != 0.0 {
            seq = seq.with_tail(self.n, z)?.canonical();
        }
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn xi_basis_levels() {
        let f = LevelFunction::xi(2, 1).unwrap().refine(0, 1).unwrap();
        assert_eq!(f.coeffs(), &[one(), Complex64::default()]);
        let g = LevelFunction::xi(3, -1).unwrap().refine(1, 0).unwrap();
        assert_eq!(g.coeffs(), &[one(); 3]);
    }

    #[test]
    fn translation_by_uniformizer_and_unit() {
        let xi0 = LevelFunction::xi(5, 0).unwrap();
        let t = xi0.translate(&QpElem::uniformizer_power(5, 1, 4)).unwrap();
        assert_eq!(t.max_abs_diff(&LevelFunction::xi(5, 1).unwrap()).unwrap(), 0.0);
        // δ-coset of 1 mod 2 at level (0, 1), translated by the unit 3
        let f = LevelFunction::from_real(2, 0, 1, &[0.0, 1.0]).unwrap();
        let g = f.translate(&QpElem::new(2, 0, 3, 3).unwrap()).unwrap();
        assert_eq!(g, f);
    }

    #[test]
    fn translate_needs_precision() {
        let f = LevelFunction::from_real(3, 1, 2, &[0.0; 27]).unwrap();
        let a = QpElem::new(3, 0, 2, 1).unwrap();
        assert!(matches!(f.translate(&a), Err(Error::Precision { .. })));
    }

    #[test]
    fn multiplicative_images() {
        let f = LevelFunction::xi(2, 0).unwrap().sub(&LevelFunction::xi(2, 1).unwrap()).unwrap();
        let s = f.to_multiplicative().unwrap();
        assert_eq!(s.value_at(0), one());
        assert_eq!(s.value_at(1), -one());
        assert!(s.tail().is_none());
        let r = LevelFunction::xi(3, 2).unwrap().restrict_to_units_part().unwrap();
        assert_eq!(r.tail(), Some((2, one())));
        assert!(r.coeffs().is_empty());
    }

    #[test]
    fn non_invariant_rejected() {
        let f = LevelFunction::from_real(3, 0, 1, &[0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(f.to_multiplicative(), Err(Error::Invariance(_))));
    }

    #[test]
    fn level_validation() {
        assert!(matches!(LevelFunction::from_real(4, 0, 1, &[0.0; 4]), Err(Error::NotPrime(4))));
        assert!(matches!(LevelFunction::from_real(2, 0, 1, &[0.0; 3]), Err(Error::Level(_))));
        assert!(matches!(LevelFunction::zero(2, 1, -2), Err(Error::Level(_))));
    }
}
