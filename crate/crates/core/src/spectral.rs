//! Euler products, the completed zeta function, Tate's local integrals and
//! the spectral side of the explicit formula.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::arch::{HermiteGaussian, LogProfile};
use crate::bruhat::LevelFunction;
use crate::error::{Error, Result};
use crate::global::{sieve_primes, ZeroTable};
use crate::measures::{is_prime, Place, PlaceKind};
use crate::quad::{integrate_to_infinity, integrate_with_points, QuadOptions};
use crate::special::gamma;

pub use crate::zeta::zeta;

/// `L̂_S(s) = Π_{p ∉ S, p ≤ P_max} (1 - p^-s)^-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EulerProductSpec {
    /// Finite primes removed from the product.
    pub excluded: Vec<u64>,
    pub p_max: u64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EulerValue {
    pub value: Complex64,
    /// Bound on `|L̂_S(s) - value|` from the primes above `P_max`.
    pub tail_bound: f64,
}

pub fn euler_lhat(spec: &EulerProductSpec, s: Complex64) -> Result<EulerValue> {
    if s.re <= 1.0 {
        return Err(Error::Divergence(format!("Euler product needs Re s > 1, got {}", s.re)));
    }
    if let Some(&p) = spec.excluded.iter().find(|&&p| !is_prime(p)) {
        return Err(Error::NotPrime(p));
    }
    let mut log_sum = Complex64::new(0.0, 0.0);
    for p in sieve_primes(spec.p_max) {
        if spec.excluded.contains(&p) {
            continue;
        }
        log_sum -= (1.0 - (-s * (p as f64).ln()).exp()).ln();
    }
    let value = log_sum.exp();
    let sigma = s.re;
    let pm = (spec.p_max.max(2)) as f64;
    // Σ_{p>P} Σ_m p^(-mσ)/m ≤ (1 - P^-σ)^-1 · σ · 1.25506 · P^(1-σ) / ((σ-1) ln P)
    let b = 1.25506 * sigma * pm.powf(1.0 - sigma) / ((sigma - 1.0) * pm.ln()) / (1.0 - pm.powf(-sigma));
    Ok(EulerValue { value, tail_bound: value.norm() * b.exp_m1() })
}

/// `Λ(s) = π^(-s/2) Γ(s/2) ζ(s)`.
pub fn completed_zeta(s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(0.0, 0.0) || s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { re: s.re, im: s.im });
    }
    // At s = -2, -4, ... the pole of Γ meets a trivial zero of ζ.
    if s.im == 0.0 && s.re < 0.0 && s.re == s.re.round() && (s.re as i64) % 2 == 0 {
        return completed_zeta(1.0 - s);
    }
    Ok((-0.5 * s * PI.ln()).exp() * gamma(s / 2.0)? * zeta(s)?)
}

pub fn functional_eq_residual(s: Complex64) -> Result<f64> {
    Ok((completed_zeta(s)? - completed_zeta(1.0 - s)?).norm())
}

/// `∫ f(x) |x|^s d^x x` at a finite place.
pub fn tate_local_integral_finite(f: &LevelFunction, s: Complex64) -> Result<Complex64> {
    let p = f.p();
    let ln_q = (p as f64).ln();
    let (m, n) = f.level();
    let f0 = f.at_zero();
    if s.re <= 0.0 && f0.norm() != 0.0 {
        return Err(Error::Divergence(format!("f(0) ≠ 0 and Re s = {}", s.re)));
    }
    let len = (m + n) as usize;
    let mut sums = vec![Complex64::new(0.0, 0.0); len];
    let mut counts = vec![0usize; len];
    for (d, &c) in f.coeffs().iter().enumerate().skip(1) {
        let mut v = 0;
        let mut x = d;
        while x % p as usize == 0 {
            x /= p as usize;
            v += 1;
        }
        sums[v] += c;
        counts[v] += 1;
    }
    let w = |k: i32| (-(k as f64) * ln_q * s).exp();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..len {
        let k = i as i32 - m;
        acc += sums[i] / counts[i] as f64 * w(k);
    }
    if f0.norm() != 0.0 {
        acc += f0 * w(n) / (1.0 - (-ln_q * s).exp());
    }
    Ok(acc * ln_q)
}

/// `∫ f(x) |x|^s dx / (2|x|)` at the real place.
pub fn tate_local_integral_real(f: &HermiteGaussian, s: Complex64) -> Result<Complex64> {
    let f0 = f.eval(0.0);
    if s.re <= 0.0 && f0.norm() > 1e-15 {
        return Err(Error::Divergence(format!("f(0) ≠ 0 and Re s = {}", s.re)));
    }
    let even = |x: f64| 0.5 * (f.eval(x) + f.eval(-x));
    let u_hi = f.effective_radius().ln();
    let rate = if f0.norm() > 1e-15 { s.re } else { s.re + 2.0 };
    if rate <= 0.0 {
        return Err(Error::Divergence(format!("integral diverges at 0 for Re s = {}", s.re)));
    }
    let u_lo = -(45.0 / rate).min(2000.0);
    let mid = 0.5 * (u_lo + u_hi);
    let q = integrate_with_points(
        |u: f64| even(u.exp()) * (s * u).exp(),
        &[u_lo, mid, u_hi - 2.0, u_hi - 1.0, u_hi],
        QuadOptions::tol(1e-15, 1e-13),
    )?;
    Ok(q.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// `G(0) + G(1)`
    pub pole_part: f64,
    /// `Σ_γ m_γ · 2 Re G(1/2 + iγ)`
    pub zero_part: f64,
    pub zero_count: usize,
    pub tail_bound: f64,
    /// `pole_part - zero_part`
    pub total: f64,
}

/// `|G(1/2 + it)| ≤ envelope(t)` for Gaussian (sum) profiles.
fn gaussian_envelope(g: &LogProfile, t: f64) -> Result<f64> {
    match g {
        LogProfile::Gaussian { u0, sigma, amp } => Ok(amp.abs()
            * sigma
            * (2.0 * PI).sqrt()
            * (0.5 * u0 + sigma * sigma * (0.25 - t * t) / 2.0).exp()),
        LogProfile::Sum(parts) => parts.iter().map(|p| gaussian_envelope(p, t)).sum(),
        LogProfile::Sampled(_) => {
            Err(Error::Domain("the spectral side needs a Gaussian profile for its tail bound".into()))
        }
    }
}

/// Bound for `Σ_{γ > T} 2 |G(1/2 + iγ)|` from the zero density `(1/2π) ln(t/2π)`.
pub fn spectral_tail_bound(g: &LogProfile, t: f64) -> Result<f64> {
    gaussian_envelope(g, t)?;
    let density = |x: f64| gaussian_envelope(g, x).unwrap_or(0.0) * ((x / (2.0 * PI)).ln().max(0.0) + 1.0) / (2.0 * PI);
    let smooth = integrate_to_infinity(density, t, QuadOptions::tol(1e-300, 1e-8))?.value;
    // fluctuation of the counting function, S(T) = O(ln T)
    let fluct = gaussian_envelope(g, t)? * (1.0 + t.max(1.0).ln());
    Ok(2.0 * (smooth + fluct))
}

pub fn spectral_side(g: &LogProfile, zeros: &ZeroTable) -> Result<SpectralReport> {
    let pole_part = (g.laplace_transform(Complex64::from(0.0))? + g.laplace_transform(Complex64::from(1.0))?).re;
    let mut zero_part = 0.0;
    for (gamma, mult) in zeros.iter() {
        zero_part += mult as f64 * 2.0 * g.laplace_transform(Complex64::new(0.5, gamma))?.re;
    }
    let t = zeros.ordinates().last().copied().unwrap_or(0.0);
    let tail_bound = spectral_tail_bound(g, t)?;
    Ok(SpectralReport { pole_part, zero_part, zero_count: zeros.len(), tail_bound, total: pole_part - zero_part })
}

/// Tate integral at any place for level / Hermite data.
pub fn tate_local_integral(place: &Place, f: TateInput<'_>, s: Complex64) -> Result<Complex64> {
    match (place.kind(), f) {
        (PlaceKind::Finite(p), TateInput::Finite(h)) if h.p() == p => tate_local_integral_finite(h, s),
        (PlaceKind::Real, TateInput::Real(h)) => tate_local_integral_real(h, s),
        (PlaceKind::Real, _) => Err(Error::WrongPlace { expected: "finite" }),
        _ => Err(Error::WrongPlace { expected: "real" }),
    }
}

#[derive(Debug, Clone, Copy)]
pub enum TateInput<'a> {
    Finite(&'a LevelFunction),
    Real(&'a HermiteGaussian),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bruhat::xi_basis;
    use crate::fourier::{fourier_padic, GammaFactor};

    #[test]
    fn basel_from_euler_product() {
        let spec = EulerProductSpec { excluded: vec![], p_max: 1_000_000 };
        let v = euler_lhat(&spec, Complex64::from(2.0)).unwrap();
        assert!((v.value.re - PI * PI / 6.0).abs() < 1e-6);
        assert!(v.tail_bound >= (v.value.re - PI * PI / 6.0).abs());
        let spec2 = EulerProductSpec { excluded: vec![2], p_max: 1_000_000 };
        let v2 = euler_lhat(&spec2, Complex64::from(2.0)).unwrap();
        assert!((v2.value.re - PI * PI / 8.0).abs() < 1e-6);
        assert!(matches!(euler_lhat(&spec, Complex64::from(1.0)), Err(Error::Divergence(_))));
    }

    #[test]
    fn completed_zeta_symmetry() {
        assert!(functional_eq_residual(Complex64::from(0.3)).unwrap() < 1e-9);
        assert!(functional_eq_residual(Complex64::new(0.2, 14.0)).unwrap() < 1e-9);
        assert!(matches!(completed_zeta(Complex64::from(1.0)), Err(Error::Pole { .. })));
        assert!(matches!(completed_zeta(Complex64::from(0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn tate_integrals_basic() {
        let h = HermiteGaussian::gaussian();
        let v = tate_local_integral_real(&h, Complex64::from(1.0)).unwrap();
        assert!((v.re - 0.5).abs() < 1e-13);
        let one = xi_basis(3, 0).unwrap();
        let s = Complex64::new(0.6, 0.0);
        let v = tate_local_integral_finite(&one, s).unwrap();
        let want = 3f64.ln() / (1.0 - 3f64.powf(-0.6));
        assert!((v.re - want).abs() < 1e-14);
        assert!(matches!(tate_local_integral_finite(&one, Complex64::from(-0.1)), Err(Error::Divergence(_))));
    }

    #[test]
    fn local_functional_equation() {
        // Z(𝔉f, s) = γ(s) Z(f, 1 - s)
        let s = Complex64::new(0.3, 1.1);
        let f = LevelFunction::from_real(2, 1, 2, &[1.0, 0.0, 2.0, 0.5, 1.0, 3.0, -1.0, 0.25]).unwrap();
        let lhs = tate_local_integral_finite(&fourier_padic(&f).unwrap(), s).unwrap();
        let g = GammaFactor::new(Place::finite(2).unwrap()).eval(s).unwrap();
        let rhs = g * tate_local_integral_finite(&f, 1.0 - s).unwrap();
        assert!((lhs - rhs).norm() < 1e-12, "{lhs} {rhs}");
        let h = HermiteGaussian::new(vec![Complex64::from(1.0), Complex64::from(0.0), Complex64::from(0.4)]).unwrap();
        let lhs = tate_local_integral_real(&h.fourier(), s).unwrap();
        let g = GammaFactor::new(Place::real()).eval(s).unwrap();
        let rhs = g * tate_local_integral_real(&h, 1.0 - s).unwrap();
        assert!((lhs - rhs).norm() < 1e-11, "{lhs} {rhs}");
    }

    #[test]
    fn spectral_side_without_zeros() {
        let g = LogProfile::gaussian(2.0, 0.2, 1.0).unwrap();
        let r = spectral_side(&g, &ZeroTable::empty()).unwrap();
        let want = (g.laplace_transform(Complex64::from(0.0)).unwrap() + g.laplace_transform(Complex64::from(1.0)).unwrap()).re;
        assert_eq!(r.total, want);
    }
}
