//! Local Fourier transforms, the inversion `J` and the equivariant transform `𝖥 = 𝔉 ∘ J`.
//!
//! At a finite place `𝔉f(y) = ∫ f(x) ψ(xy) dx` with `ψ(x) = e^(2πi{x}_p)`; on
//! level data this sends level `(m, n)` to `(n, m)` with
//! `out[E] = p^-n Σ_D c_D ω^(DE)`, `ω = e^(2πi/p^(m+n))`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use crate::arch::HermiteGaussian;
use crate::bruhat::{CyclotomicField, ExactLevelFunction, ExactMultSeq, ExactScalar, LevelFunction, MultSeq};
use crate::error::{Error, Result};
use crate::measures::{Place, PlaceKind};
use crate::special::{digamma, gamma};

type PlanCache = RwLock<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().expect("plan cache poisoned").get(&(n, inverse)) {
        return p.clone();
    }
    let mut planner = FftPlanner::new();
    let p = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    cache.write().expect("plan cache poisoned").entry((n, inverse)).or_insert(p).clone()
}

fn transform(f: &LevelFunction, sign: f64) -> Result<LevelFunction> {
    let (m, n) = f.level();
    let mut buf = f.coeffs().to_vec();
    // Σ_D c_D e^(+2πi DE/N) is the unnormalised inverse DFT.
    plan(buf.len(), sign > 0.0).process(&mut buf);
    let w = (f.p() as f64).powi(-n);
    for c in buf.iter_mut() {
        *c *= w;
    }
    LevelFunction::new(f.p(), n, m, buf)
}

/// `𝔉 f`.
pub fn fourier_padic(f: &LevelFunction) -> Result<LevelFunction> {
    transform(f, 1.0)
}

/// `𝔉* f`, i.e. `𝔉 f(-y)`.
pub fn fourier_padic_inverse(f: &LevelFunction) -> Result<LevelFunction> {
    transform(f, -1.0)
}

/// Radix-p DFT over `Z[x]/(x^order - 1)`: `out[E] = Σ_D a_D x^(step·D·E)`.
fn exact_dft(a: &[Vec<i128>], p: usize, step: usize, order: usize) -> Vec<Vec<i128>> {
    let size = a.len();
    if size == 1 {
        return a.to_vec();
    }
    let sub = size / p;
    let parts: Vec<Vec<Vec<i128>>> = (0..p)
        .map(|r| {
            let strided: Vec<Vec<i128>> = (0..sub).map(|d| a[d * p + r].clone()).collect();
            exact_dft(&strided, p, step * p % order, order)
        })
        .collect();
    (0..size)
        .map(|e| {
            let mut acc = vec![0i128; order];
            for (r, part) in parts.iter().enumerate() {
                let v = &part[e % sub];
                let shift = r * e % size * step % order;
                for (i, &c) in v.iter().enumerate() {
                    if c != 0 {
                        let j = i + shift;
                        acc[if j >= order { j - order } else { j }] += c;
                    }
                }
            }
            acc
        })
        .collect()
}

fn transform_exact(f: &ExactLevelFunction, sign: i64) -> Result<ExactLevelFunction> {
    let (m, n) = f.level();
    let field = f.field();
    let size = f.size();
    let order = field.order();
    let scale = order / size;
    let e_min = f.coeffs().iter().filter(|c| !c.is_zero()).map(|c| c.exp()).min().unwrap_or(0);
    let lifted: Vec<Vec<i128>> = f
        .coeffs()
        .iter()
        .map(|c| {
            let mut v = if c.is_zero() { Vec::new() } else { c.lifted(e_min) };
            v.resize(order, 0);
            v
        })
        .collect();
    let step = if sign < 0 { (order - scale) % order } else { scale };
    let out = exact_dft(&lifted, f.p() as usize, step, order)
        .into_iter()
        .map(|mut acc| ExactScalar::from_parts(field, field.reduce(&mut acc), e_min - n))
        .collect();
    ExactLevelFunction::new(f.p(), n, m, field, out)
}

/// `𝔉 f` in exact cyclotomic arithmetic.
pub fn fourier_padic_exact(f: &ExactLevelFunction) -> Result<ExactLevelFunction> {
    transform_exact(f, 1)
}

pub fn fourier_padic_inverse_exact(f: &ExactLevelFunction) -> Result<ExactLevelFunction> {
    transform_exact(f, -1)
}

/// Exact check that the character matrix at level `(m, n)` is unitary:
/// `Σ_E ω^(jE) = N [j = 0]` for every `j`, which is `M* M = I` for `M_(E,D) = p^-n ω^(DE)`
/// with the coset weights `p^-n` and `p^-m`.
pub fn exact_character_orthogonality(p: u64, m: i32, n: i32) -> Result<bool> {
    if m + n < 0 {
        return Err(Error::Level(format!("m + n = {} is negative", m + n)));
    }
    let field = CyclotomicField::new(p, (m + n) as u32)?;
    let size = field.order();
    let scale = 1;
    for j in 0..size {
        let mut acc = vec![0i128; field.order()];
        for e in 0..size {
            acc[(j * e % size) * scale] += 1;
        }
        let s = ExactScalar::from_parts(field, field.reduce(&mut acc), 0);
        let want = if j == 0 { ExactScalar::from_int(field, size as i128) } else { ExactScalar::zero(field) };
        if s != want {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `𝔉` at the real place on Hermite expansions.
pub fn hermite_fourier(f: &HermiteGaussian) -> HermiteGaussian {
    f.fourier()
}

/// `(J f)[k] = q^k f[-k]`.
pub fn j_op_mult(f: &MultSeq) -> Result<MultSeq> {
    f.j_op()
}

/// Relative tolerance when reading shell values off a floating-point transform.
const SHELL_TOL: f64 = 1e-9;

/// `𝖥 f = 𝔉(J f)` on a finitely supported shell sequence.
pub fn equiv_fourier(f: &MultSeq) -> Result<MultSeq> {
    let level = f.j_op()?.to_level_function()?;
    fourier_padic(&level)?.restrict_with_tol(SHELL_TOL)
}

/// `𝖥* f = J(𝔉* f)`; needs `∫ f dx = 0` so that `𝔉* f` vanishes near zero.
pub fn equiv_fourier_adjoint(f: &MultSeq) -> Result<MultSeq> {
    let g = fourier_padic_inverse(&f.to_level_function()?)?.restrict_with_tol(SHELL_TOL)?;
    drop_small_tail(g)?.j_op()
}

fn drop_small_tail(g: MultSeq) -> Result<MultSeq> {
    match g.tail() {
        Some((_, v)) if v.norm() > 1e-12 => {
            Err(Error::Support("transform does not vanish near zero (∫ f dx ≠ 0)".into()))
        }
        Some(_) => {
            let p = g.p();
            MultSeq::from_shells(p, g.coeffs().iter().map(|(&k, &v)| (k, v)))
        }
        None => Ok(g),
    }
}

pub fn equiv_fourier_exact(f: &ExactMultSeq) -> Result<ExactMultSeq> {
    let level = f.j_op()?.to_level_function()?;
    fourier_padic_exact(&level)?.restrict_to_units_part()
}

pub fn equiv_fourier_adjoint_exact(f: &ExactMultSeq) -> Result<ExactMultSeq> {
    let g = fourier_padic_inverse_exact(&f.to_level_function()?)?.restrict_to_units_part()?;
    if g.tail().is_some() {
        return Err(Error::Support("transform does not vanish near zero (∫ f dx ≠ 0)".into()));
    }
    g.j_op()
}

/// The Mellin symbol `γ_v` of `𝖥` at a place: `M[𝖥 F](s) = γ_v(s) M[F](s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaFactor {
    pub place: Place,
}

impl GammaFactor {
    pub fn new(place: Place) -> GammaFactor {
        GammaFactor { place }
    }

    /// `γ_p(s) = (1 - p^(s-1)) / (1 - p^-s)`, `γ_R(s) = π^(1/2-s) Γ(s/2) / Γ((1-s)/2)`.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        match self.place.kind() {
            PlaceKind::Finite(p) => {
                let lp = (p as f64).ln();
                let den = 1.0 - (-s * lp).exp();
                if den.norm() < 1e-300 {
                    return Err(Error::Pole { re: s.re, im: s.im });
                }
                Ok((1.0 - ((s - 1.0) * lp).exp()) / den)
            }
            PlaceKind::Real => {
                let num = gamma(s / 2.0)?;
                let half = (1.0 - s) / 2.0;
                // 1/Γ vanishes at the poles of Γ((1-s)/2).
                if half.im == 0.0 && half.re <= 0.0 && half.re == half.re.round() {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let den = gamma(half)?;
                Ok(((0.5 - s) * PI.ln()).exp() * num / den)
            }
        }
    }

    /// `γ'/γ (s)`.
    pub fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        match self.place.kind() {
            PlaceKind::Finite(p) => {
                let lp = (p as f64).ln();
                let a = ((s - 1.0) * lp).exp();
                let b = (-s * lp).exp();
                if (1.0 - a).norm() < 1e-300 || (1.0 - b).norm() < 1e-300 {
                    return Err(Error::Pole { re: s.re, im: s.im });
                }
                Ok(-lp * (a / (1.0 - a) + b / (1.0 - b)))
            }
            PlaceKind::Real => Ok(-PI.ln() + 0.5 * digamma(s / 2.0)? + 0.5 * digamma((1.0 - s) / 2.0)?),
        }
    }
}

pub fn equiv_fourier_symbol(place: &Place, s: Complex64) -> Result<Complex64> {
    GammaFactor::new(*place).eval(s)
}

/// Character value `e^(2πi x)` used in tests and diagnostics.
pub fn additive_character(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}
