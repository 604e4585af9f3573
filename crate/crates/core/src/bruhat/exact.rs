//! Exact arithmetic in Q(ζ_{p^k}) with p-power denominators.
//!
//! Elements are integer combinations of `1, ζ, ..., ζ^(φ-1)` (the power basis,
//! `φ = p^k - p^(k-1)`) times `p^exp`. Unreduced sums live in arrays of length
//! `p^k` and are folded back with `Φ_{p^k}(ζ) = Σ_{j<p} ζ^(j p^(k-1)) = 0`.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::level::LevelFunction;
use super::mult::MultSeq;
use super::padic::{pow_u64, valuation};
use crate::error::{Error, Result};
use crate::measures::is_prime;

/// Largest `p^(m+n)` handled in exact mode.
pub const EXACT_CAPACITY: u64 = 729;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclotomicField {
    p: u64,
    k: u32,
    order: usize,
    phi: usize,
}

impl CyclotomicField {
    pub fn new(p: u64, k: u32) -> Result<CyclotomicField> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let order = p.checked_pow(k).unwrap_or(u64::MAX);
        if order > EXACT_CAPACITY {
            return Err(Error::Capacity { size: order, cap: EXACT_CAPACITY });
        }
        let phi = if k == 0 { 1 } else { order - order / p };
        Ok(CyclotomicField { p, k, order: order as usize, phi: phi as usize })
    }

    pub fn rationals(p: u64) -> CyclotomicField {
        CyclotomicField { p, k: 0, order: 1, phi: 1 }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.phi
    }

    /// Fold an unreduced exponent array (length `order`) into the power basis.
    pub fn reduce(&self, acc: &mut [i128]) -> Vec<i128> {
        debug_assert_eq!(acc.len(), self.order);
        if self.k > 0 {
            let step = self.order / self.p as usize;
            for i in (self.phi..self.order).rev() {
                let c = acc[i];
                if c != 0 {
                    acc[i] = 0;
                    for j in 1..self.p as usize {
                        acc[i - j * step] -= c;
                    }
                }
            }
        }
        acc[..self.phi].to_vec()
    }

    pub fn zeta_power(&self, e: usize) -> ExactScalar {
        let mut acc = vec![0i128; self.order];
        acc[e % self.order] = 1;
        ExactScalar::from_parts(*self, self.reduce(&mut acc), 0)
    }
}

/// `(Σ_i c_i ζ^i) p^exp` in a fixed cyclotomic field, kept with the `c_i` not all divisible by p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactScalar {
    field: CyclotomicField,
    coeffs: Vec<i128>,
    exp: i32,
}

impl ExactScalar {
    pub fn zero(field: CyclotomicField) -> ExactScalar {
        ExactScalar { field, coeffs: vec![0; field.phi], exp: 0 }
    }

    pub fn from_int(field: CyclotomicField, v: i128) -> ExactScalar {
        let mut coeffs = vec![0; field.phi];
        coeffs[0] = v;
        Self::from_parts(field, coeffs, 0)
    }

    /// `num p^exp` for rational data.
    pub fn rational(field: CyclotomicField, num: i128, exp: i32) -> ExactScalar {
        let mut s = Self::from_int(field, num);
        if !s.is_zero() {
            s.exp += exp;
        }
        s
    }

    pub fn from_parts(field: CyclotomicField, coeffs: Vec<i128>, exp: i32) -> ExactScalar {
        let mut s = ExactScalar { field, coeffs, exp };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.is_zero() {
            self.exp = 0;
            return;
        }
        let p = self.field.p as i128;
        while self.coeffs.iter().all(|c| c % p == 0) {
            for c in self.coeffs.iter_mut() {
                *c /= p;
            }
            self.exp += 1;
        }
    }

    pub fn field(&self) -> CyclotomicField {
        self.field
    }

    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn exp(&self) -> i32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Coefficients rescaled to the exponent `e <= self.exp`.
    pub(crate) fn lifted(&self, e: i32) -> Vec<i128> {
        let f = (self.field.p as i128).pow((self.exp - e) as u32);
        self.coeffs.iter().map(|c| c * f).collect()
    }

    pub fn add(&self, other: &ExactScalar) -> ExactScalar {
        assert_eq!(self.field, other.field, "exact scalars from different fields");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let coeffs = self.lifted(e).iter().zip(other.lifted(e)).map(|(a, b)| a + b).collect();
        Self::from_parts(self.field, coeffs, e)
    }

    pub fn neg(&self) -> ExactScalar {
        ExactScalar { field: self.field, coeffs: self.coeffs.iter().map(|c| -c).collect(), exp: self.exp }
    }

    pub fn sub(&self, other: &ExactScalar) -> ExactScalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ExactScalar) -> ExactScalar {
        assert_eq!(self.field, other.field, "exact scalars from different fields");
        let n = self.field.order;
        let mut acc = vec![0i128; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                acc[(i + j) % n] += a * b;
            }
        }
        Self::from_parts(self.field, self.field.reduce(&mut acc), self.exp + other.exp)
    }

    /// Multiply by `p^k`.
    pub fn mul_p_pow(&self, k: i32) -> ExactScalar {
        let mut s = self.clone();
        if !s.is_zero() {
            s.exp += k;
        }
        s
    }

    /// Complex conjugation `ζ ↦ ζ^-1`.
    pub fn conj(&self) -> ExactScalar {
        let n = self.field.order;
        let mut acc = vec![0i128; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc[(n - i) % n] += c;
        }
        Self::from_parts(self.field, self.field.reduce(&mut acc), self.exp)
    }

    /// Image under `Q(ζ_{p^k}) ⊂ Q(ζ_{p^K})`.
    pub fn embed(&self, target: CyclotomicField) -> Result<ExactScalar> {
        if target.p != self.field.p || target.k < self.field.k {
            return Err(Error::Domain("embedding into a smaller cyclotomic field".into()));
        }
        let step = target.order / self.field.order;
        let mut acc = vec![0i128; target.order];
        for (i, &c) in self.coeffs.iter().enumerate() {
            acc[i * step] += c;
        }
        Ok(Self::from_parts(target, target.reduce(&mut acc), self.exp))
    }

    /// `Some((num, exp))` when the value is the rational `num p^exp`.
    pub fn as_rational(&self) -> Option<(i128, i32)> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some((self.coeffs[0], self.exp))
        } else {
            None
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.field.order as f64;
        let mut z = Complex64::new(0.0, 0.0);
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c != 0 {
                z += Complex64::from_polar(c as f64, 2.0 * PI * i as f64 / n);
            }
        }
        z * (self.field.p as f64).powi(self.exp)
    }
}

/// A level function with exact cyclotomic values.
#[derive(Debug, Clone)]
pub struct ExactLevelFunction {
    p: u64,
    m: i32,
    n: i32,
    field: CyclotomicField,
    coeffs: Vec<ExactScalar>,
}

impl ExactLevelFunction {
    pub fn new(p: u64, m: i32, n: i32, field: CyclotomicField, coeffs: Vec<ExactScalar>) -> Result<Self> {
        if m + n < 0 {
            return Err(Error::Level(format!("m + n = {} is negative", m + n)));
        }
        let size = pow_u64(p, (m + n) as u32);
        if size > EXACT_CAPACITY {
            return Err(Error::Capacity { size, cap: EXACT_CAPACITY });
        }
        if field.p != p || (field.order as u64) < size {
            return Err(Error::Domain(format!("field Q(ζ_{}) too small for level size {size}", field.order)));
        }
        if coeffs.len() as u64 != size {
            return Err(Error::Level(format!("expected {size} coefficients, got {}", coeffs.len())));
        }
        if coeffs.iter().any(|c| c.field != field) {
            return Err(Error::Domain("coefficients from a different field".into()));
        }
        Ok(ExactLevelFunction { p, m, n, field, coeffs })
    }

    /// Integer-valued function; the field is `Q(ζ_{p^(m+n)})`.
    pub fn from_integers(p: u64, m: i32, n: i32, values: &[i64]) -> Result<Self> {
        if m + n < 0 {
            return Err(Error::Level(format!("m + n = {} is negative", m + n)));
        }
        let field = CyclotomicField::new(p, (m + n) as u32)?;
        let coeffs = values.iter().map(|&v| ExactScalar::from_int(field, v as i128)).collect();
        Self::new(p, m, n, field, coeffs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> (i32, i32) {
        (self.m, self.n)
    }

    pub fn field(&self) -> CyclotomicField {
        self.field
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn in_field(&self, target: CyclotomicField) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.embed(target)).collect::<Result<Vec<_>>>()?;
        Self::new(self.p, self.m, self.n, target, coeffs)
    }

    pub fn refine(&self, m2: i32, n2: i32) -> Result<Self> {
        if m2 < self.m || n2 < self.n {
            return Err(Error::Level(format!("cannot refine ({}, {}) to ({m2}, {n2})", self.m, self.n)));
        }
        let size = pow_u64(self.p, (m2 + n2) as u32);
        if size > EXACT_CAPACITY {
            return Err(Error::Capacity { size, cap: EXACT_CAPACITY });
        }
        let field = if (self.field.order as u64) < size {
            CyclotomicField::new(self.p, (m2 + n2) as u32)?
        } else {
            self.field
        };
        let base = self.in_field(field)?;
        let step = pow_u64(self.p, (m2 - self.m) as u32) as usize;
        let old = self.coeffs.len();
        let coeffs = (0..size as usize)
            .map(|d| if d % step == 0 { base.coeffs[(d / step) % old].clone() } else { ExactScalar::zero(field) })
            .collect();
        Self::new(self.p, m2, n2, field, coeffs)
    }

    fn common(&self, other: &Self) -> Result<(Self, Self)> {
        if self.p != other.p {
            return Err(Error::Domain("primes differ".into()));
        }
        let (m, n) = (self.m.max(other.m), self.n.max(other.n));
        let a = self.refine(m, n)?;
        let b = other.refine(m, n)?;
        let k = a.field.k.max(b.field.k);
        let field = CyclotomicField::new(self.p, k)?;
        Ok((a.in_field(field)?, b.in_field(field)?))
    }

    /// Exact equality as functions.
    pub fn equals(&self, other: &Self) -> Result<bool> {
        let (a, b) = self.common(other)?;
        Ok(a.coeffs == b.coeffs)
    }

    pub fn reflect(&self) -> Self {
        let n = self.coeffs.len();
        let coeffs = (0..n).map(|d| self.coeffs[(n - d) % n].clone()).collect();
        ExactLevelFunction { coeffs, ..self.clone() }
    }

    /// `∫ f conj(g) dx`, exactly.
    pub fn inner(&self, other: &Self) -> Result<ExactScalar> {
        let (a, b) = self.common(other)?;
        let field = a.field;
        let order = field.order;
        let pairs: Vec<(&ExactScalar, &ExactScalar)> =
            a.coeffs.iter().zip(&b.coeffs).filter(|(x, y)| !x.is_zero() && !y.is_zero()).collect();
        let e = pairs.iter().map(|(x, y)| x.exp + y.exp).min().unwrap_or(0);
        // Σ x conj(y) accumulated unreduced in Z[ζ]/(ζ^order - 1), one reduction at the end
        let lifts: Vec<(Vec<i128>, Vec<i128>)> = pairs
            .iter()
            .map(|(x, y)| {
                let extra = x.exp + y.exp - e;
                (x.lifted(x.exp - extra), y.coeffs.clone())
            })
            .collect();
        let bound = |v: &[i128]| v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let fits_i64 = lifts.iter().all(|(u, v)| {
            bound(u).checked_mul(bound(v)).and_then(|x| x.checked_mul((field.phi * pairs.len()) as u128))
                .is_some_and(|x| x < (1u128 << 62))
        });
        let mut acc = vec![0i128; order];
        if fits_i64 {
            let mut acc64 = vec![0i64; order];
            for (u, v) in &lifts {
                let u: Vec<(usize, i64)> = u.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, &c)| (i, c as i64)).collect();
                for (j, &c) in v.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let c = c as i64;
                    // conj sends ζ^j to ζ^(-j)
                    let off = order - j;
                    for &(i, x) in &u {
                        let k = i + off;
                        acc64[if k >= order { k - order } else { k }] += x * c;
                    }
                }
            }
            acc.iter_mut().zip(&acc64).for_each(|(a, &b)| *a = b as i128);
        } else {
            for (u, v) in &lifts {
                for (j, &c) in v.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let off = order - j;
                    for (i, &x) in u.iter().enumerate() {
                        let k = i + off;
                        acc[if k >= order { k - order } else { k }] += x * c;
                    }
                }
            }
        }
        let acc = ExactScalar::from_parts(field, field.reduce(&mut acc), e);
        Ok(acc.mul_p_pow(-a.n))
    }

    pub fn to_float(&self) -> LevelFunction {
        LevelFunction::new(self.p, self.m, self.n, self.coeffs.iter().map(|c| c.to_complex()).collect())
            .expect("valid level")
    }

    /// Restriction to `Q_p^x` as an exact shell sequence (values must be rational).
    pub fn restrict_to_units_part(&self) -> Result<ExactMultSeq> {
        let mut shells: BTreeMap<i32, ExactScalar> = BTreeMap::new();
        for (d, c) in self.coeffs.iter().enumerate().skip(1) {
            let k = valuation(self.p, d as u64) as i32 - self.m;
            match shells.get(&k) {
                None => {
                    shells.insert(k, c.clone());
                }
                Some(v) if v == c => {}
                Some(_) => return Err(Error::Invariance(format!("shell {k} is not constant"))),
            }
        }
        let q = CyclotomicField::rationals(self.p);
        let to_q = |s: &ExactScalar| -> Result<ExactScalar> {
            let (num, exp) = s
                .as_rational()
                .ok_or_else(|| Error::Invariance("irrational value on an O^x-invariant function".into()))?;
            Ok(ExactScalar::rational(q, num, exp))
        };
        let mut seq = ExactMultSeq::new(self.p);
        for (k, v) in shells {
            seq.set(k, to_q(&v)?);
        }
        let z = to_q(&self.coeffs[0])?;
        if !z.is_zero() {
            seq.tail = Some((self.n, z));
        }
        Ok(seq)
    }
}

/// Shell sequence with exact rational values `num p^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMultSeq {
    p: u64,
    coeffs: BTreeMap<i32, ExactScalar>,
    tail: Option<(i32, ExactScalar)>,
}

impl ExactMultSeq {
    pub fn new(p: u64) -> ExactMultSeq {
        ExactMultSeq { p, coeffs: BTreeMap::new(), tail: None }
    }

    pub fn from_integers(p: u64, shells: &[(i32, i64)]) -> Result<ExactMultSeq> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = CyclotomicField::rationals(p);
        let mut s = Self::new(p);
        for &(k, v) in shells {
            let cur = s.value_at(k);
            s.set(k, cur.add(&ExactScalar::from_int(q, v as i128)));
        }
        Ok(s)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    fn set(&mut self, k: i32, v: ExactScalar) {
        if v.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, v);
        }
    }

    pub fn tail(&self) -> Option<&(i32, ExactScalar)> {
        self.tail.as_ref()
    }

    pub fn coeffs(&self) -> &BTreeMap<i32, ExactScalar> {
        &self.coeffs
    }

    pub fn value_at(&self, k: i32) -> ExactScalar {
        if let Some((from, v)) = &self.tail {
            if k >= *from {
                return v.clone();
            }
        }
        self.coeffs.get(&k).cloned().unwrap_or_else(|| ExactScalar::zero(CyclotomicField::rationals(self.p)))
    }

    pub fn shift(&self, j: i32) -> ExactMultSeq {
        ExactMultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k + j, v.clone())).collect(),
            tail: self.tail.as_ref().map(|(f, v)| (f + j, v.clone())),
        }
    }

    pub fn add(&self, other: &ExactMultSeq) -> Result<ExactMultSeq> {
        if self.tail.is_some() || other.tail.is_some() {
            return Err(Error::Support("exact addition is only defined for finite support".into()));
        }
        let mut out = self.clone();
        for (&k, v) in &other.coeffs {
            let cur = out.value_at(k);
            out.set(k, cur.add(v));
        }
        Ok(out)
    }

    pub fn scale_p_pow(&self, k: i32) -> ExactMultSeq {
        ExactMultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&j, v)| (j, v.mul_p_pow(k))).collect(),
            tail: self.tail.as_ref().map(|(f, v)| (*f, v.mul_p_pow(k))),
        }
    }

    pub fn neg(&self) -> ExactMultSeq {
        ExactMultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&j, v)| (j, v.neg())).collect(),
            tail: self.tail.as_ref().map(|(f, v)| (*f, v.neg())),
        }
    }

    /// `(J f)[k] = q^k f[-k]`.
    pub fn j_op(&self) -> Result<ExactMultSeq> {
        if self.tail.is_some() {
            return Err(Error::Support("J needs a finitely supported sequence".into()));
        }
        Ok(ExactMultSeq {
            p: self.p,
            coeffs: self.coeffs.iter().map(|(&k, v)| (-k, v.mul_p_pow(-k))).collect(),
            tail: None,
        })
    }

    /// `∫ f dx`, exactly.
    pub fn additive_integral(&self) -> ExactScalar {
        let q = CyclotomicField::rationals(self.p);
        let p = self.p as i128;
        let mut acc = ExactScalar::zero(q);
        for (&k, v) in &self.coeffs {
            // q^-k (1 - 1/q) = (q - 1) q^(-k-1)
            acc = acc.add(&v.mul(&ExactScalar::rational(q, p - 1, -k - 1)));
        }
        if let Some((from, v)) = &self.tail {
            acc = acc.add(&v.mul_p_pow(-from));
        }
        acc
    }

    pub fn to_level_function(&self) -> Result<ExactLevelFunction> {
        let lo = self.coeffs.keys().next().copied().into_iter().chain(self.tail.as_ref().map(|t| t.0)).min();
        let hi = self
            .coeffs
            .keys()
            .next_back()
            .copied()
            .into_iter()
            .chain(self.tail.as_ref().map(|t| t.0 - 1))
            .max();
        let (lo, hi) = match (lo, hi) {
            (Some(a), Some(b)) => (a, b),
            _ => return ExactLevelFunction::from_integers(self.p, 0, 0, &[0]),
        };
        let (m, n) = (-lo, hi + 1);
        let size = pow_u64(self.p, (m + n) as u32);
        if size > EXACT_CAPACITY {
            return Err(Error::Capacity { size, cap: EXACT_CAPACITY });
        }
        let field = CyclotomicField::new(self.p, (m + n) as u32)?;
        let coeffs = (0..size)
            .map(|d| {
                let k = if d == 0 { n } else { valuation(self.p, d) as i32 - m };
                self.value_at(k).embed(field)
            })
            .collect::<Result<Vec<_>>>()?;
        ExactLevelFunction::new(self.p, m, n, field, coeffs)
    }

    pub fn to_float(&self) -> MultSeq {
        let mut s = MultSeq::from_shells(self.p, self.coeffs.iter().map(|(&k, v)| (k, v.to_complex())))
            .expect("prime checked on construction");
        if let Some((from, v)) = &self.tail {
            s = s.with_tail(*from, v.to_complex()).expect("tail after support");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_relation() {
        // 1 + ζ + ζ^2 = 0 in Q(ζ_3)
        let f = CyclotomicField::new(3, 1).unwrap();
        let mut acc = vec![1i128, 1, 1];
        assert_eq!(f.reduce(&mut acc), vec![0, 0]);
        // ζ_8^4 = -1
        let f = CyclotomicField::new(2, 3).unwrap();
        assert_eq!(f.zeta_power(4), ExactScalar::from_int(f, -1));
    }

    #[test]
    fn conj_and_norm() {
        let f = CyclotomicField::new(3, 2).unwrap();
        let z = f.zeta_power(2);
        assert_eq!(z.mul(&z.conj()), ExactScalar::from_int(f, 1));
        assert!((z.to_complex() - Complex64::from_polar(1.0, 4.0 * PI / 9.0)).norm() < 1e-14);
    }

    #[test]
    fn normalisation_and_embedding() {
        let q = CyclotomicField::rationals(2);
        let a = ExactScalar::rational(q, 12, 0);
        assert_eq!(a.exp(), 2);
        assert_eq!(a.as_rational(), Some((3, 2)));
        let big = CyclotomicField::new(2, 4).unwrap();
        let e = CyclotomicField::new(2, 2).unwrap().zeta_power(1).embed(big).unwrap();
        assert_eq!(e, big.zeta_power(4));
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(CyclotomicField::new(3, 7), Err(Error::Capacity { .. })));
        assert!(matches!(ExactLevelFunction::from_integers(2, 5, 5, &[0; 1024]), Err(Error::Capacity { .. })));
    }

    #[test]
    fn exact_j_and_integral() {
        let s = ExactMultSeq::from_integers(3, &[(1, 1)]).unwrap();
        let j = s.j_op().unwrap();
        assert_eq!(j.value_at(-1).as_rational(), Some((1, -1)));
        // ∫ 1_{3 Z_3^x} dx = (1/3)(2/3)
        assert!((s.additive_integral().to_complex().re - 2.0 / 9.0).abs() < 1e-15);
    }
}
