//! Places of Q and the Haar measures attached to them.
//!
//! At a finite place the additive measure gives `O` volume 1 and the
//! multiplicative measure gives `O^x` volume `ln q`. At the real place
//! `d^x x = dx / (2|x|)`, which becomes `du` in the coordinate `u = ln|x|`.

use num_complex::Complex64;
use serde::Serialize;

use crate::arch::LogProfile;
use crate::bruhat::MultSeq;
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PlaceKind {
    Finite(u64),
    Real,
}

/// A place of Q with its cached `ln q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Place {
    kind: PlaceKind,
    ln_q: f64,
}

impl Place {
    pub fn finite(p: u64) -> Result<Place> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Place { kind: PlaceKind::Finite(p), ln_q: (p as f64).ln() })
    }

    pub fn real() -> Place {
        Place { kind: PlaceKind::Real, ln_q: f64::NAN }
    }

    pub fn kind(&self) -> PlaceKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == PlaceKind::Real
    }

    /// Residue field size, or an error at the real place.
    pub fn q(&self) -> Result<u64> {
        match self.kind {
            PlaceKind::Finite(p) => Ok(p),
            PlaceKind::Real => Err(Error::WrongPlace { expected: "finite" }),
        }
    }

    pub fn ln_q(&self) -> Result<f64> {
        self.q().map(|_| self.ln_q)
    }
}

/// How the multiplicative Haar measure is written at the real place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArchDensity {
    /// `dx / (2|x|)`
    HalfInverseAbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureCtx {
    pub place: Place,
    pub additive_unit_volume: f64,
    pub shell_volume: Option<f64>,
    pub arch_density: Option<ArchDensity>,
}

impl MeasureCtx {
    pub fn new(place: Place) -> MeasureCtx {
        match place.kind {
            PlaceKind::Finite(_) => MeasureCtx {
                place,
                additive_unit_volume: 1.0,
                shell_volume: Some(place.ln_q),
                arch_density: None,
            },
            PlaceKind::Real => MeasureCtx {
                place,
                additive_unit_volume: 1.0,
                shell_volume: None,
                arch_density: Some(ArchDensity::HalfInverseAbs),
            },
        }
    }
}

/// Multiplicative volume of `O^x` (level 0) or of `1 + P^level`.
pub fn vol_subgroup(place: &Place, level: u32) -> Result<f64> {
    let q = place.q()? as f64;
    let ln_q = place.ln_q;
    if level == 0 {
        return Ok(ln_q);
    }
    Ok(ln_q / ((q - 1.0) * q.powi(level as i32 - 1)))
}

/// Additive volume of `ϖ^k O`.
pub fn additive_ball_volume(place: &Place, k: i32) -> Result<f64> {
    let q = place.q()? as f64;
    Ok(q.powi(-k))
}

/// `∫ f(x) |x|^s d^x x` for an O^x-invariant function given by shells.
pub fn mult_integral_finite(place: &Place, f: &MultSeq, s: Complex64) -> Result<Complex64> {
    if f.p() != place.q()? {
        return Err(Error::Domain(format!("sequence for p = {} used at p = {}", f.p(), place.q()?)));
    }
    f.mellin(s)
}

/// `∫ f(x) |x|^s d^x x` for an even function with profile `g(ln|x|)`.
pub fn mult_integral_arch(place: &Place, f: &LogProfile, s: Complex64) -> Result<Complex64> {
    if !place.is_real() {
        return Err(Error::WrongPlace { expected: "real" });
    }
    f.laplace_transform(s)
}

/// Density of `d^x x` with respect to Lebesgue measure.
pub fn arch_density(x: f64) -> f64 {
    1.0 / (2.0 * x.abs())
}

/// `∫_{1 <= |x| < u} d^x x`, computed by quadrature of the density on both half-lines.
pub fn arch_shell_measure(u: f64) -> Result<f64> {
    if u < 1.0 {
        return Err(Error::Domain("shell radius must be at least 1".into()));
    }
    let opts = QuadOptions::default();
    let pos = integrate(arch_density, 1.0, u, opts)?.value;
    let neg = integrate(arch_density, -u, -1.0, opts)?.value;
    Ok(pos + neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime(2) && is_prime(3) && is_prime(7919));
        assert!(!is_prime(1) && !is_prime(0) && !is_prime(7917));
        assert_eq!(Place::finite(4), Err(Error::NotPrime(4)));
    }

    #[test]
    fn unit_group_volumes() {
        let p3 = Place::finite(3).unwrap();
        assert!((vol_subgroup(&p3, 0).unwrap() - 3f64.ln()).abs() < 1e-15);
        let p2 = Place::finite(2).unwrap();
        assert!((vol_subgroup(&p2, 1).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((vol_subgroup(&p3, 2).unwrap() - 3f64.ln() / 6.0).abs() < 1e-15);
        assert!(matches!(vol_subgroup(&Place::real(), 0), Err(Error::WrongPlace { .. })));
    }

    #[test]
    fn index_relation() {
        // [O^x : 1 + P^k] = (q - 1) q^(k-1)
        for p in [2u64, 3, 5, 7] {
            let place = Place::finite(p).unwrap();
            let q = p as f64;
            for k in 1..5 {
                let ratio = vol_subgroup(&place, 0).unwrap() / vol_subgroup(&place, k).unwrap();
                assert!((ratio - (q - 1.0) * q.powi(k as i32 - 1)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn real_shell_is_log() {
        for u in [1.0, 2.0, std::f64::consts::E, 50.0] {
            assert!((arch_shell_measure(u).unwrap() - f64::ln(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn context_fields() {
        let ctx = MeasureCtx::new(Place::finite(5).unwrap());
        assert_eq!(ctx.shell_volume, Some(5f64.ln()));
        let ctx = MeasureCtx::new(Place::real());
        assert_eq!(ctx.arch_density, Some(ArchDensity::HalfInverseAbs));
    }
}
