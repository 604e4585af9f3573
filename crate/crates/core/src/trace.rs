//! Operators on the line `u = ln|x|` and the local trace formula.
//!
//! `λ(f)` is a convolution, `M_φ` is diagonal and `𝖥` is a Fourier multiplier
//! with symbol `Π_{v∈S} γ_v(1/2 - it)`. Traces of products are formed from
//! diagonals only, never from full matrix products.
//!
//! Inputs to [`local_trace_check`] are untwisted profiles `g`; the engine works
//! with the kernel `a(u) = e^(u/2) g(u)`, the image of `g` in the
//! `|x|^(1/2)`-twisted algebra.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::arch::LogProfile;
use crate::error::{Error, Result};
use crate::fourier::{plan, GammaFactor};
use crate::measures::{Place, PlaceKind};
use crate::quad::{integrate_with_points, QuadOptions};
use crate::special::ln_gamma;
use crate::weil::{weil_local_finite_profile, weil_local_real_pv, PvContext};

/// Largest grid for which a dense matrix may be formed.
pub const DENSE_CAP: usize = 8192;
/// Padding factor used by the trace computations.
pub const PAD: usize = 4;

/// `N` points `u_i = -U + i du` with `du = 2U/N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UGrid {
    u_half: f64,
    n: usize,
}

impl UGrid {
    pub fn new(u_half: f64, n: usize) -> Result<UGrid> {
        if !n.is_power_of_two() || n < 8 {
            return Err(Error::Grid(format!("point count {n} is not a power of two ≥ 8")));
        }
        if !(u_half > 0.0 && u_half.is_finite()) {
            return Err(Error::Grid(format!("half-width {u_half} must be positive")));
        }
        Ok(UGrid { u_half, n })
    }

    pub fn u_half(&self) -> f64 {
        self.u_half
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn du(&self) -> f64 {
        2.0 * self.u_half / self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -self.u_half + i as f64 * self.du()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Twice the points over twice the width, same spacing.
    pub fn doubled(&self) -> UGrid {
        UGrid { u_half: 2.0 * self.u_half, n: 2 * self.n }
    }

    /// Mass of `|f|` outside `[-r, r]`.
    fn mass_outside(f: &LogProfile, r: f64) -> Result<f64> {
        let (lo, hi) = f.support_hint();
        let opts = QuadOptions::tol(1e-300, 1e-8);
        let mut m = 0.0;
        if hi > r {
            m += integrate_with_points(|u: f64| f.eval(u).abs(), &[lo.max(r), hi], opts)?.value;
        }
        if lo < -r {
            m += integrate_with_points(|u: f64| f.eval(u).abs(), &[lo, hi.min(-r)], opts)?.value;
        }
        Ok(m)
    }

    /// Requires `f` to carry mass below `1e-12` outside `[-U/2, U/2]`.
    pub fn check_profile(&self, f: &LogProfile) -> Result<()> {
        let m = Self::mass_outside(f, 0.5 * self.u_half)?;
        if m > 1e-12 {
            return Err(Error::Grid(format!("profile mass {m:.3e} outside [-U/2, U/2] with U = {}", self.u_half)));
        }
        Ok(())
    }
}

/// `φ(u) = 1 - S((u + a)/(2a))` with the order-7 smoothstep `S`; 1 for `u ≤ -a`, 0 for `u ≥ a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffPhi {
    a: f64,
}

impl Default for CutoffPhi {
    fn default() -> Self {
        CutoffPhi { a: 6.0 }
    }
}

impl CutoffPhi {
    pub fn new(a: f64) -> Result<CutoffPhi> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("cutoff half-width {a} must be positive")));
        }
        Ok(CutoffPhi { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn eval(&self, u: f64) -> f64 {
        let x = ((u + self.a) / (2.0 * self.a)).clamp(0.0, 1.0);
        let s = x * x * x * x * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)));
        1.0 - s
    }

    /// Checks `φ(u) = 1 - φ(-u)` and `0 ≤ φ ≤ 1` on a sample of points.
    pub fn is_symmetric(&self) -> bool {
        (0..=2000).all(|i| {
            let u = -2.0 * self.a + 4.0 * self.a * i as f64 / 2000.0;
            let v = self.eval(u);
            (0.0..=1.0).contains(&v) && (v - (1.0 - self.eval(-u))).abs() < 1e-14
        })
    }
}

fn fft(buf: &mut [Complex64]) {
    plan(buf.len(), false).process(buf);
}

fn ifft(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
    let s = 1.0 / buf.len() as f64;
    for c in buf.iter_mut() {
        *c *= s;
    }
}

/// Signed lag of slot `z` in a circular array of length `m`.
fn lag(z: usize, m: usize) -> i64 {
    if z < m / 2 {
        z as i64
    } else {
        z as i64 - m as i64
    }
}

/// Angular frequencies of an `m`-point DFT with spacing `du`.
pub fn frequencies(m: usize, du: f64) -> Vec<f64> {
    (0..m).map(|k| 2.0 * PI * lag(k, m) as f64 / (m as f64 * du)).collect()
}

/// `Π_{v∈S} γ_v(1/2 - it)`.
pub fn f_symbol(places: &[Place], t: f64) -> Result<Complex64> {
    let mut out = Complex64::new(1.0, 0.0);
    for pl in places {
        out *= match pl.kind() {
            // π^(it) Γ(1/4 - it/2) / Γ(1/4 + it/2), through ln Γ to stay clear of underflow
            PlaceKind::Real => {
                let z = Complex64::new(0.25, -0.5 * t);
                (Complex64::new(0.0, t * PI.ln()) + ln_gamma(z)? - ln_gamma(z.conj())?).exp()
            }
            PlaceKind::Finite(_) => GammaFactor::new(*pl).eval(Complex64::new(0.5, -t))?,
        };
    }
    Ok(out)
}

/// `Σ_{v∈S} (γ_v'/γ_v)(1/2 - it)`.
pub fn f_symbol_log_derivative(places: &[Place], t: f64) -> Result<Complex64> {
    let mut out = Complex64::new(0.0, 0.0);
    for pl in places {
        out += GammaFactor::new(*pl).log_derivative(Complex64::new(0.5, -t))?;
    }
    Ok(out)
}

fn validate_places(places: &[Place]) -> Result<()> {
    let reals = places.iter().filter(|p| p.is_real()).count();
    if reals != 1 || places.len() > 2 {
        return Err(Error::Domain("place set must be {∞} or {∞, p}".into()));
    }
    Ok(())
}

/// An operator on `C^N` for a [`UGrid`], stored in the cheapest faithful form.
#[derive(Debug, Clone)]
pub enum UGridOperator {
    /// Row-major `N × N`.
    Dense { grid: UGrid, matrix: Vec<Complex64> },
    /// `A_ij = kernel[i - j + N - 1]`.
    Toeplitz { grid: UGrid, kernel: Vec<Complex64> },
    /// Fourier multiplier on a centred circular array of length `size ≥ N`, compressed to the grid.
    Circulant { grid: UGrid, size: usize, symbol: Vec<Complex64> },
    Diagonal { grid: UGrid, diag: Vec<Complex64> },
}

impl UGridOperator {
    pub fn grid(&self) -> UGrid {
        match self {
            UGridOperator::Dense { grid, .. }
            | UGridOperator::Toeplitz { grid, .. }
            | UGridOperator::Circulant { grid, .. }
            | UGridOperator::Diagonal { grid, .. } => *grid,
        }
    }

    pub fn multiplication(grid: UGrid, phi: &CutoffPhi) -> UGridOperator {
        let diag = grid.points().iter().map(|&u| Complex64::from(phi.eval(u))).collect();
        UGridOperator::Diagonal { grid, diag }
    }

    /// Entry function; circulant kernels are materialised once.
    fn entry_fn(&self) -> Box<dyn Fn(usize, usize) -> Complex64 + Sync + '_> {
        let n = self.grid().n();
        match self {
            UGridOperator::Dense { matrix, .. } => Box::new(move |i, j| matrix[i * n + j]),
            UGridOperator::Toeplitz { kernel, .. } => Box::new(move |i, j| kernel[i + n - 1 - j]),
            UGridOperator::Circulant { size, symbol, .. } => {
                let mut k = symbol.clone();
                ifft(&mut k);
                let size = *size;
                Box::new(move |i, j| k[(i + size - j) % size])
            }
            UGridOperator::Diagonal { diag, .. } => {
                Box::new(move |i, j| if i == j { diag[i] } else { Complex64::new(0.0, 0.0) })
            }
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entry_fn()(i, j)
    }

    pub fn to_dense(&self) -> Result<Vec<Complex64>> {
        let n = self.grid().n();
        if n > DENSE_CAP {
            return Err(Error::Capacity { size: n as u64, cap: DENSE_CAP as u64 });
        }
        let e = self.entry_fn();
        let mut m = vec![Complex64::new(0.0, 0.0); n * n];
        m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = e(i, j);
            }
        });
        Ok(m)
    }

    pub fn adjoint(&self) -> UGridOperator {
        let grid = self.grid();
        let n = grid.n();
        match self {
            UGridOperator::Dense { matrix, .. } => {
                let mut m = vec![Complex64::new(0.0, 0.0); n * n];
                for i in 0..n {
                    for j in 0..n {
                        m[j * n + i] = matrix[i * n + j].conj();
                    }
                }
                UGridOperator::Dense { grid, matrix: m }
            }
            UGridOperator::Toeplitz { kernel, .. } => {
                UGridOperator::Toeplitz { grid, kernel: kernel.iter().rev().map(|c| c.conj()).collect() }
            }
            UGridOperator::Circulant { size, symbol, .. } => {
                UGridOperator::Circulant { grid, size: *size, symbol: symbol.iter().map(|c| c.conj()).collect() }
            }
            UGridOperator::Diagonal { diag, .. } => {
                UGridOperator::Diagonal { grid, diag: diag.iter().map(|c| c.conj()).collect() }
            }
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.grid().n();
        if x.len() != n {
            return Err(Error::Grid(format!("vector length {} does not match grid size {n}", x.len())));
        }
        Ok(match self {
            UGridOperator::Dense { matrix, .. } => {
                matrix.par_chunks(n).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
            }
            UGridOperator::Toeplitz { kernel, .. } => {
                // linear convolution through a 2N-point circular one
                let m = 2 * n;
                let mut k = vec![Complex64::new(0.0, 0.0); m];
                for (idx, &c) in kernel.iter().enumerate() {
                    let z = idx as i64 - (n as i64 - 1);
                    k[z.rem_euclid(m as i64) as usize] = c;
                }
                let mut v = vec![Complex64::new(0.0, 0.0); m];
                v[..n].copy_from_slice(x);
                fft(&mut k);
                fft(&mut v);
                for (a, b) in v.iter_mut().zip(&k) {
                    *a *= b;
                }
                ifft(&mut v);
                v.truncate(n);
                v
            }
            UGridOperator::Circulant { size, symbol, .. } => {
                let off = (size - n) / 2;
                let mut v = vec![Complex64::new(0.0, 0.0); *size];
                v[off..off + n].copy_from_slice(x);
                fft(&mut v);
                for (a, b) in v.iter_mut().zip(symbol) {
                    *a *= b;
                }
                ifft(&mut v);
                v[off..off + n].to_vec()
            }
            UGridOperator::Diagonal { diag, .. } => x.iter().zip(diag).map(|(a, b)| a * b).collect(),
        })
    }

    /// `tr(AB) = Σ_ij A_ij B_ji`, rows in parallel.
    pub fn trace_product(&self, other: &UGridOperator) -> Result<Complex64> {
        if self.grid() != other.grid() {
            return Err(Error::Grid("operators live on different grids".into()));
        }
        let n = self.grid().n();
        let (a, b) = (self.entry_fn(), other.entry_fn());
        Ok((0..n).into_par_iter().map(|i| (0..n).map(|j| a(i, j) * b(j, i)).sum::<Complex64>()).sum())
    }

    pub fn trace(&self) -> Complex64 {
        let e = self.entry_fn();
        (0..self.grid().n()).map(|i| e(i, i)).sum()
    }
}

/// Kernel `f(u_i - u_j) du` of `λ(f)`.
pub fn build_convolution_op(grid: UGrid, f: &LogProfile) -> Result<UGridOperator> {
    let leak = UGrid::mass_outside(f, grid.u_half())?;
    if leak > 1e-10 {
        return Err(Error::Grid(format!("profile leaks mass {leak:.3e} outside the grid")));
    }
    let n = grid.n() as i64;
    let du = grid.du();
    let kernel = (-(n - 1)..n).map(|z| Complex64::from(f.eval(z as f64 * du) * du)).collect();
    Ok(UGridOperator::Toeplitz { grid, kernel })
}

/// `𝖥` on the grid as an exact circular multiplier (unitary).
pub fn build_f_op(grid: UGrid, places: &[Place]) -> Result<UGridOperator> {
    build_f_op_padded(grid, places, 1)
}

/// `𝖥` on a circular array `pad` times longer than the grid, compressed to the grid.
pub fn build_f_op_padded(grid: UGrid, places: &[Place], pad: usize) -> Result<UGridOperator> {
    validate_places(places)?;
    if !pad.is_power_of_two() {
        return Err(Error::Grid(format!("padding factor {pad} is not a power of two")));
    }
    let size = grid.n() * pad;
    let symbol = frequencies(size, grid.du()).iter().map(|&t| f_symbol(places, t)).collect::<Result<_>>()?;
    Ok(UGridOperator::Circulant { grid, size, symbol })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CommutatorReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// `tr λ(f₀)[M_φ, λ(f₁)]` against `-(f₀ ∗ (u f₁))(0) = ∫ w f₀(w) f₁(-w) dw`.
pub fn commutator_trace_check(
    grid: UGrid,
    f0: &LogProfile,
    f1: &LogProfile,
    phi: &CutoffPhi,
) -> Result<CommutatorReport> {
    if phi.a() >= grid.u_half() {
        return Err(Error::Grid("cutoff transition does not fit inside the grid".into()));
    }
    let a = build_convolution_op(grid, f0)?;
    let b = build_convolution_op(grid, f1)?;
    let (UGridOperator::Toeplitz { kernel: k0, .. }, UGridOperator::Toeplitz { kernel: k1, .. }) = (&a, &b) else {
        unreachable!("convolution operators are Toeplitz")
    };
    let n = grid.n();
    let phi_v: Vec<f64> = grid.points().iter().map(|&u| phi.eval(u)).collect();
    // Σ_ij A_ij (φ_j - φ_i) B_ji
    let lhs: f64 = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| (k0[i + n - 1 - j] * k1[j + n - 1 - i]).re * (phi_v[j] - phi_v[i])).sum::<f64>())
        .sum();

    let (l0, h0) = f0.support_hint();
    let (l1, h1) = f1.support_hint();
    let (lo, hi) = (l0.max(-h1), h0.min(-l1));
    let rhs = if lo < hi {
        let mut pts: Vec<f64> = f0.key_points().into_iter().chain(f1.key_points().into_iter().map(|u| -u)).collect();
        pts.retain(|u| *u > lo && *u < hi);
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        integrate_with_points(|w: f64| w * f0.eval(w) * f1.eval(-w), &pts, QuadOptions::tol(1e-15, 1e-12))?.value
    } else {
        0.0
    };
    Ok(CommutatorReport { lhs, rhs, residual: (lhs - rhs).abs() })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalTraceReport {
    pub operator_trace: f64,
    /// Imaginary part of the computed trace, zero up to rounding for real profiles.
    pub operator_trace_imag: f64,
    pub weil_sum: f64,
    pub tau_route: f64,
    pub residual: f64,
    pub tau_residual: f64,
}

/// Twisted kernel sampled on the lags of a circular array of length `m`.
fn twisted_kernel(grid: UGrid, g: &LogProfile, m: usize) -> Result<Vec<Complex64>> {
    let a = g.twisted(0.5);
    grid.check_profile(&a)?;
    let du = grid.du();
    Ok((0..m).map(|z| Complex64::from(a.eval(lag(z, m) as f64 * du) * du)).collect())
}

/// Diagonal of `λ(a)(M_φ - 𝖥 M_φ 𝖥*)` on the grid points, through padded FFTs.
fn local_trace_diagonal(grid: UGrid, g: &LogProfile, phi: &CutoffPhi, places: &[Place]) -> Result<Vec<Complex64>> {
    let n = grid.n();
    let m = n * PAD;
    let du = grid.du();
    let k_a = twisted_kernel(grid, g, m)?;
    let b = match build_f_op_padded(grid, places, PAD)? {
        UGridOperator::Circulant { symbol, .. } => symbol,
        _ => unreachable!("build_f_op_padded is circulant"),
    };
    let mut ab = k_a.clone();
    fft(&mut ab);
    for (x, y) in ab.iter_mut().zip(&b) {
        *x *= y;
    }
    ifft(&mut ab);
    let mut k_b = b;
    ifft(&mut k_b);
    // diag of λ(a)𝖥 M_φ 𝖥* at i is Σ_j K(i - j) φ_j with K(z) = k_ab(z) conj(k_b(z))
    let mut kk: Vec<Complex64> = ab.iter().zip(&k_b).map(|(x, y)| x * y.conj()).collect();
    let mut ph: Vec<Complex64> = (0..m).map(|j| Complex64::from(phi.eval((j as f64 - (m / 2) as f64) * du))).collect();
    fft(&mut kk);
    fft(&mut ph);
    for (x, y) in ph.iter_mut().zip(&kk) {
        *x *= y;
    }
    ifft(&mut ph);
    let off = (m - n) / 2;
    Ok((0..n).map(|i| k_a[0] * phi.eval(grid.point(i)) - ph[off + i]).collect())
}

/// `τ(𝖥 ∂ 𝖥* f) = -(1/2π) ∫ â(t) Σ_v (γ_v'/γ_v)(1/2 - it) dt` on grid frequencies.
pub fn tau_f_partial_route(grid: UGrid, g: &LogProfile, places: &[Place]) -> Result<Complex64> {
    validate_places(places)?;
    let m = grid.n() * PAD;
    let du = grid.du();
    let mut ahat = twisted_kernel(grid, g, m)?;
    fft(&mut ahat);
    let ts = frequencies(m, du);
    let dt = 2.0 * PI / (m as f64 * du);
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &a) in ts.iter().zip(&ahat) {
        let d = match f_symbol_log_derivative(places, t) {
            Ok(d) if d.is_finite() => d,
            // pole on a grid frequency: nudge once
            _ => f_symbol_log_derivative(places, t + 1e-6 * dt)
                .ok()
                .filter(|d| d.is_finite())
                .ok_or(Error::Pole { re: 0.5, im: -t })?,
        };
        acc += a * d;
    }
    Ok(-acc * dt / (2.0 * PI))
}

/// `Σ_{v∈S} W_v(g)`; the different term vanishes for the standard character.
pub fn weil_sum(ctx: &PvContext, g: &LogProfile, places: &[Place]) -> Result<f64> {
    let mut w = 0.0;
    for pl in places {
        w += match pl.kind() {
            PlaceKind::Real => weil_local_real_pv(ctx, g)?,
            PlaceKind::Finite(p) => weil_local_finite_profile(p, g)?,
        };
    }
    Ok(w)
}

/// `tr(λ(f)(M_φ - 𝖥 M_φ 𝖥*))` against `Σ_{v∈S} W_v(f)` and `τ(𝖥∂𝖥*f)`.
pub fn local_trace_check(
    grid: UGrid,
    g: &LogProfile,
    phi: &CutoffPhi,
    places: &[Place],
    ctx: &PvContext,
) -> Result<LocalTraceReport> {
    if phi.a() >= grid.u_half() {
        return Err(Error::Grid("cutoff transition does not fit inside the grid".into()));
    }
    let diag = local_trace_diagonal(grid, g, phi, places)?;
    let tr: Complex64 = diag.iter().sum();
    let tau = tau_f_partial_route(grid, g, places)?;
    let w = weil_sum(ctx, g, places)?;
    Ok(LocalTraceReport {
        operator_trace: tr.re,
        operator_trace_imag: tr.im,
        weil_sum: w,
        tau_route: tau.re,
        residual: (tr.re - w).abs(),
        tau_residual: (tau.re - tr.re).abs(),
    })
}
