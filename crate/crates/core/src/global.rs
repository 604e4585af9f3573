//! Global checks over Q: primes, zeros of zeta, the explicit formula, Poisson
//! summation and the prime number theorem.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

use crate::arch::{HermiteGaussian, LogProfile};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_points, QuadOptions};
use crate::spectral::{spectral_side, SpectralReport};
use crate::weil::{weil_local_real_pv, PvContext};
use crate::zeta::{theta, z_function_with_switch, RS_SWITCH};

const SEGMENT: usize = 1 << 16;

fn small_primes(limit: usize) -> Vec<u64> {
    let mut is = vec![true; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if is[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit {
                is[j] = false;
                j += i;
            }
        }
    }
    out
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    // primes in [lo, hi)
    let len = (hi - lo) as usize;
    let mut is = vec![true; len];
    for &p in base {
        if p * p >= hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut j = start;
        while j < hi {
            is[(j - lo) as usize] = false;
            j += p;
        }
    }
    (0..len).filter(|&i| is[i] && lo + i as u64 >= 2).map(|i| lo + i as u64).collect()
}

/// All primes `≤ x`, by a segmented sieve of Eratosthenes.
pub fn sieve_primes(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let base = small_primes((x as f64).sqrt() as usize + 1);
    let mut out = Vec::new();
    let mut lo = 0u64;
    while lo <= x {
        let hi = (lo + SEGMENT as u64).min(x + 1);
        out.extend(sieve_segment(lo, hi, &base));
        lo = hi;
    }
    out
}

/// Same as [`sieve_primes`], with segments processed in parallel and concatenated in order.
pub fn sieve_primes_parallel(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let base = small_primes((x as f64).sqrt() as usize + 1);
    let starts: Vec<u64> = (0..=x).step_by(SEGMENT).collect();
    let parts: Vec<Vec<u64>> =
        starts.par_iter().map(|&lo| sieve_segment(lo, (lo + SEGMENT as u64).min(x + 1), &base)).collect();
    parts.concat()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrimePower {
    pub p: u64,
    pub e: u32,
    pub ln_p: f64,
    pub value: u64,
}

/// Primes and prime powers up to `x_max`, prime powers sorted by value.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    x_max: u64,
    primes: Vec<u64>,
    powers: Vec<PrimePower>,
}

impl PrimeTable {
    pub fn new(x_max: u64) -> PrimeTable {
        Self::from_primes(x_max, sieve_primes(x_max))
    }

    pub fn new_parallel(x_max: u64) -> PrimeTable {
        Self::from_primes(x_max, sieve_primes_parallel(x_max))
    }

    fn from_primes(x_max: u64, primes: Vec<u64>) -> PrimeTable {
        let mut powers = Vec::with_capacity(primes.len() + 64);
        for &p in &primes {
            let ln_p = (p as f64).ln();
            let mut v = p;
            let mut e = 1;
            loop {
                powers.push(PrimePower { p, e, ln_p, value: v });
                match v.checked_mul(p) {
                    Some(n) if n <= x_max => {
                        v = n;
                        e += 1;
                    }
                    _ => break,
                }
            }
        }
        powers.sort_by_key(|pp| pp.value);
        PrimeTable { x_max, primes, powers }
    }

    pub fn x_max(&self) -> u64 {
        self.x_max
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn prime_powers(&self) -> &[PrimePower] {
        &self.powers
    }

    /// Compares the table on `[lo, hi]` against trial division.
    pub fn verify_window(&self, lo: u64, hi: u64) -> Result<()> {
        let hi = hi.min(self.x_max);
        let from_table: Vec<u64> = self.primes.iter().copied().filter(|&p| p >= lo && p <= hi).collect();
        let by_trial: Vec<u64> = (lo.max(2)..=hi).filter(|&n| crate::measures::is_prime(n)).collect();
        if from_table != by_trial {
            return Err(Error::Integrity(format!("sieve disagrees with trial division on [{lo}, {hi}]")));
        }
        Ok(())
    }

    /// `π(x)` for `x ≤ x_max`.
    pub fn pi(&self, x: u64) -> Result<usize> {
        if x > self.x_max {
            return Err(Error::Domain(format!("π({x}) beyond table limit {}", self.x_max)));
        }
        Ok(self.primes.partition_point(|&p| p <= x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ZeroSource {
    File(String),
    Computed,
    Inline,
}

/// Ordinates of zeros on the critical line, with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroTable {
    ordinates: Vec<f64>,
    multiplicities: Vec<u32>,
    source: ZeroSource,
}

impl ZeroTable {
    pub fn empty() -> ZeroTable {
        ZeroTable { ordinates: Vec::new(), multiplicities: Vec::new(), source: ZeroSource::Inline }
    }

    pub fn source(&self) -> &ZeroSource {
        &self.source
    }

    /// Non-decreasing positive ordinates; repeats count as multiplicity.
    pub fn from_ordinates(values: &[f64]) -> Result<ZeroTable> {
        let mut t = ZeroTable::empty();
        for (i, &v) in values.iter().enumerate() {
            t.push(v).map_err(|e| match e {
                Error::Integrity(m) => Error::Integrity(format!("entry {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(t)
    }

    fn push(&mut self, v: f64) -> Result<()> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Integrity(format!("ordinate {v} is not a positive number")));
        }
        match self.ordinates.last() {
            Some(&last) if v < last => Err(Error::Integrity(format!("ordinate {v} after {last} breaks ordering"))),
            Some(&last) if v == last => {
                *self.multiplicities.last_mut().expect("nonempty") += 1;
                Ok(())
            }
            _ => {
                self.ordinates.push(v);
                self.multiplicities.push(1);
                Ok(())
            }
        }
    }

    pub fn parse(text: &str) -> Result<ZeroTable> {
        let mut t = ZeroTable::empty();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line.parse().map_err(|e| Error::Parse { line: i + 1, msg: format!("{line}: {e}") })?;
            t.push(v).map_err(|e| match e {
                Error::Integrity(m) => Error::Integrity(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<ZeroTable> {
        let text = std::fs::read_to_string(path)?;
        let mut t = Self::parse(&text)?;
        t.source = ZeroSource::File(path.display().to_string());
        Ok(t)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# ordinates of zeros of zeta on the critical line\n");
        for (g, m) in self.iter() {
            for _ in 0..m {
                s.push_str(&format!("{g:.12}\n"));
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, u32)> + '_ {
        self.ordinates.iter().copied().zip(self.multiplicities.iter().copied())
    }

    /// Number of zeros counted with multiplicity.
    pub fn len(&self) -> usize {
        self.multiplicities.iter().map(|&m| m as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }

    /// The first `n` distinct ordinates.
    pub fn truncated(&self, n: usize) -> ZeroTable {
        let n = n.min(self.ordinates.len());
        ZeroTable {
            ordinates: self.ordinates[..n].to_vec(),
            multiplicities: self.multiplicities[..n].to_vec(),
            source: self.source.clone(),
        }
    }

    /// Copy with the `i`-th distinct ordinate removed.
    pub fn without(&self, i: usize) -> ZeroTable {
        let mut t = self.clone();
        if i < t.ordinates.len() {
            t.ordinates.remove(i);
            t.multiplicities.remove(i);
        }
        t
    }
}

/// `N(T) ≈ θ(T)/π + 1`, the smooth part of the zero-counting function.
pub fn smooth_zero_count(t: f64) -> f64 {
    theta(t) / PI + 1.0
}

#[derive(Debug, Clone, Copy)]
pub struct ZeroSearch {
    /// Height above which Riemann–Siegel replaces Euler–Maclaurin.
    pub switch: f64,
    /// Width of the final bracketing interval.
    pub bracket: f64,
}

impl Default for ZeroSearch {
    fn default() -> Self {
        ZeroSearch { switch: RS_SWITCH, bracket: 1e-11 }
    }
}

impl ZeroSearch {
    fn z(&self, t: f64) -> f64 {
        z_function_with_switch(t, self.switch)
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut za: f64) -> f64 {
        while b - a > self.bracket {
            let m = 0.5 * (a + b);
            let zm = self.z(m);
            if zm == 0.0 {
                return m;
            }
            if zm.signum() == za.signum() {
                a = m;
                za = zm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// Look for a sign change hidden between samples: minimise `|Z|` on `[a, c]`.
    fn hidden_pair(&self, a: f64, c: f64, sign: f64) -> Option<f64> {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (a, c);
        let f = |t: f64| sign * self.z(t);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..60 {
            if f1 < 0.0 {
                return Some(x1);
            }
            if f2 < 0.0 {
                return Some(x2);
            }
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = f(x2);
            }
            if hi - lo < 1e-9 {
                break;
            }
        }
        None
    }

    /// The first `count` zeros above height 0, bracketed by sign changes of Z.
    pub fn find(&self, count: usize) -> Result<ZeroTable> {
        let mut zeros = Vec::with_capacity(count);
        let step = |t: f64| {
            let spacing = 2.0 * PI / (t / (2.0 * PI)).ln().max(1.0);
            spacing / 8.0
        };
        let mut t0 = 10.0;
        let mut z0 = self.z(t0);
        let mut prev: Option<(f64, f64)> = None;
        while zeros.len() < count {
            let t1 = t0 + step(t0);
            let z1 = self.z(t1);
            if z1.signum() != z0.signum() {
                zeros.push(self.bisect(t0, t1, z0));
                prev = None;
            } else {
                if let Some((tp, zp)) = prev {
                    // local extremum of |Z| without a sign change
                    if z0.abs() < zp.abs() && z0.abs() < z1.abs() {
                        if let Some(m) = self.hidden_pair(tp, t1, z0.signum()) {
                            let zm = self.z(m);
                            zeros.push(self.bisect(tp, m, zp));
                            zeros.push(self.bisect(m, t1, zm));
                        }
                    }
                }
                prev = Some((t0, z0));
            }
            t0 = t1;
            z0 = z1;
            if t0 > 1e7 {
                return Err(Error::Accuracy("zero search ran past t = 1e7".into()));
            }
        }
        zeros.sort_by(f64::total_cmp);
        zeros.truncate(count);
        if let Some(&last) = zeros.last() {
            let expected = smooth_zero_count(last + 1e-9);
            if (zeros.len() as f64 - expected).abs() > 2.5 {
                return Err(Error::Integrity(format!(
                    "found {} zeros up to {last}, smooth count predicts {expected:.2}",
                    zeros.len()
                )));
            }
        }
        for &g in &zeros {
            if !self.certify(g, 1e-9) {
                return Err(Error::Integrity(format!("no sign change of Z within 1e-9 of {g}")));
            }
        }
        let mut t = ZeroTable::from_ordinates(&zeros)?;
        t.source = ZeroSource::Computed;
        Ok(t)
    }

    /// True if Z changes sign across `[γ - h, γ + h]`.
    pub fn certify(&self, gamma: f64, h: f64) -> bool {
        self.z(gamma - h).signum() != self.z(gamma + h).signum()
    }
}

pub fn find_zeros(count: usize) -> Result<ZeroTable> {
    ZeroSearch::default().find(count)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometricReport {
    /// `Σ_{n ≤ X} Λ(n) g(ln n)`
    pub finite_positive: f64,
    /// `Σ_{n ≤ X} Λ(n) n^-1 g(-ln n)`
    pub finite_negative: f64,
    pub archimedean: f64,
    /// `ln D` for Q, which is 0.
    pub discriminant: f64,
    pub total: f64,
    pub prime_tail_bound: f64,
    pub x_max: u64,
}

/// Upper bound for `Σ_{n > X} φ(ln n)` with `φ ≥ 0`, via `∫_{ln X}^∞ φ(u) e^u du` when `φ`
/// decreases on the tail; `None` if monotonicity fails.
fn monotone_sum_bound<F: Fn(f64) -> f64>(phi: F, u_start: f64, u_end: f64) -> Result<Option<f64>> {
    if u_end <= u_start {
        return Ok(Some(0.0));
    }
    let n = 4000;
    let mut last = f64::INFINITY;
    for i in 0..=n {
        let u = u_start + (u_end - u_start) * i as f64 / n as f64;
        let v = phi(u);
        if v > last * (1.0 + 1e-12) + 1e-300 {
            return Ok(None);
        }
        last = v;
    }
    let mid = 0.5 * (u_start + u_end);
    let q = integrate_with_points(|u: f64| phi(u) * u.exp(), &[u_start, mid, u_end], QuadOptions::tol(1e-300, 1e-6))?;
    Ok(Some(q.value))
}

/// Bound on the prime-power terms beyond `x_max`.
pub fn prime_tail_bound(g: &LogProfile, x_max: u64) -> Result<f64> {
    let (lo, hi) = g.support_hint();
    let lx = (x_max as f64).ln();
    let pos = |u: f64| (u + 1.0) * g.eval(u).abs();
    let neg = |u: f64| (u + 1.0) * g.eval(-u).abs() * (-u).exp();
    let fallback = |a: f64, b: f64, h: &dyn Fn(f64) -> f64| -> f64 {
        // sup · (number of integers in the range) for compactly supported data
        let mut sup: f64 = 0.0;
        for i in 0..=4000 {
            sup = sup.max(h(a + (b - a) * i as f64 / 4000.0));
        }
        1.01 * sup * b.exp()
    };
    let p = match monotone_sum_bound(pos, lx, hi.max(lx))? {
        Some(b) => b,
        None => fallback(lx, hi, &pos),
    };
    let n_end = (-lo).max(lx) + 40.0;
    let n = match monotone_sum_bound(neg, lx, n_end)? {
        Some(b) => b,
        None => fallback(lx, n_end, &neg),
    };
    Ok(p + n)
}

pub fn geometric_side(g: &LogProfile, primes: &PrimeTable, ctx: &PvContext) -> Result<GeometricReport> {
    let mut pos = 0.0;
    let mut neg = 0.0;
    for pp in primes.prime_powers() {
        let u = (pp.value as f64).ln();
        pos += pp.ln_p * g.eval(u);
        neg += pp.ln_p * g.eval(-u) / pp.value as f64;
    }
    let archimedean = weil_local_real_pv(ctx, g)?;
    let total = pos + neg + archimedean;
    Ok(GeometricReport {
        finite_positive: pos,
        finite_negative: neg,
        archimedean,
        discriminant: 0.0,
        total,
        prime_tail_bound: prime_tail_bound(g, primes.x_max())?,
        x_max: primes.x_max(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExplicitFormulaReport {
    pub profile: LogProfile,
    pub geometric: GeometricReport,
    pub spectral: SpectralReport,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compare `Σ Λ(n)[g(ln n) + g(-ln n)/n] + W_∞(g)` with `G(0) + G(1) - Σ_γ 2 Re G(1/2 + iγ)`.
pub fn explicit_formula_check(
    g: &LogProfile,
    zeros: &ZeroTable,
    primes: &PrimeTable,
    ctx: &PvContext,
    tol: f64,
) -> Result<ExplicitFormulaReport> {
    let geometric = geometric_side(g, primes, ctx)?;
    if geometric.prime_tail_bound > 0.1 * tol {
        let mut x = primes.x_max().max(10) as f64;
        let mut bound = geometric.prime_tail_bound;
        while bound > 0.1 * tol && x < 1e13 {
            x *= 10.0;
            bound = prime_tail_bound(g, x as u64)?;
        }
        return Err(Error::Truncation { bound: geometric.prime_tail_bound, suggested: x });
    }
    let spectral = spectral_side(g, zeros)?;
    if spectral.tail_bound > 0.1 * tol {
        return Err(Error::Truncation { bound: spectral.tail_bound, suggested: f64::NAN });
    }
    let residual = (geometric.total - spectral.total).abs();
    let pass = residual <= tol;
    Ok(ExplicitFormulaReport { profile: g.clone(), geometric, spectral, residual, tolerance: tol, pass })
}

/// Residual of the explicit formula using only the first `k` zeros, for `k = 0..=len`.
pub fn residual_curve(g: &LogProfile, zeros: &ZeroTable, geometric_total: f64) -> Result<Vec<(usize, f64)>> {
    let pole = (g.laplace_transform(Complex64::from(0.0))? + g.laplace_transform(Complex64::from(1.0))?).re;
    let mut acc = pole;
    let mut out = vec![(0, (geometric_total - acc).abs())];
    let mut k = 0;
    for (gamma, m) in zeros.iter() {
        acc -= m as f64 * 2.0 * g.laplace_transform(Complex64::new(0.5, gamma))?.re;
        k += m as usize;
        out.push((k, (geometric_total - acc).abs()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonReport {
    pub x: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
}

/// `Σ_n f(nx)` against `x^-1 Σ_n 𝔉f(n/x)`.
pub fn poisson_check(f: &HermiteGaussian, x: f64) -> Result<PoissonReport> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("Poisson scale must be positive, got {x}")));
    }
    let ff = f.fourier();
    let r = f.effective_radius();
    let lattice_sum = |h: &HermiteGaussian, step: f64| -> Complex64 {
        let n_max = (r / step).ceil() as i64 + 1;
        // sum small terms first
        let mut acc = Complex64::new(0.0, 0.0);
        for n in (1..=n_max).rev() {
            acc += h.eval(n as f64 * step) + h.eval(-(n as f64) * step);
        }
        acc + h.eval(0.0)
    };
    let lhs = lattice_sum(f, x);
    let rhs = lattice_sum(&ff, 1.0 / x) / x;
    Ok(PoissonReport { x, lhs, rhs, residual: (lhs - rhs).norm() })
}

#[derive(Debug, Clone, Serialize)]
pub struct PntPoint {
    pub x: u64,
    pub pi: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PntReport {
    pub x: u64,
    pub pi: usize,
    pub ratio: f64,
    /// `π(x) ln x / x` at `x, x/10, x/100, ...` down to 1000.
    pub series: Vec<PntPoint>,
}

pub fn pnt_check(x: u64, primes: &PrimeTable) -> Result<PntReport> {
    if x < 2 {
        return Err(Error::Domain("PNT check needs x ≥ 2".into()));
    }
    let point = |y: u64| -> Result<PntPoint> {
        let pi = primes.pi(y)?;
        Ok(PntPoint { x: y, pi, ratio: pi as f64 * (y as f64).ln() / y as f64 })
    };
    let head = point(x)?;
    let mut series = vec![head.clone()];
    let mut y = x / 10;
    while y >= 1000 {
        series.push(point(y)?);
        y /= 10;
    }
    series.reverse();
    Ok(PntReport { x, pi: head.pi, ratio: head.ratio, series })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothedPntReport {
    pub xi: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when `G(1) = 0`.
    pub ratio: Option<f64>,
}

/// `Σ_p ln p (g ∗ l_ξ)(p)` against `G(1) ξ / ln ξ`, with `l_ξ = 1/ln x` on `[3/2, ξ]`.
pub fn smoothed_pnt_check(g: &LogProfile, xi: f64) -> Result<SmoothedPntReport> {
    if !(xi > 1.5) {
        return Err(Error::Domain(format!("ξ must exceed 3/2, got {xi}")));
    }
    let (lo, hi) = g.support_hint();
    let p_max = (xi * hi.exp()).floor();
    if p_max > 1e10 {
        return Err(Error::Domain("profile support too wide for the smoothed PNT sum".into()));
    }
    let primes = sieve_primes(p_max as u64);
    let l_xi = xi.ln();
    let l15 = 1.5f64.ln();
    let keys = g.key_points();
    let opts = QuadOptions::tol(1e-14, 1e-11);
    let mut lhs = 0.0;
    for &p in &primes {
        let lp = (p as f64).ln();
        let a = lo.max(lp - l_xi);
        let b = hi.min(lp - l15);
        if a >= b {
            continue;
        }
        let mut pts: Vec<f64> = keys.iter().copied().filter(|u| *u > a && *u < b).collect();
        pts.push(a);
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        let q = integrate_with_points(|v: f64| g.eval(v) / (lp - v), &pts, opts)?;
        lhs += lp * q.value;
    }
    let g1 = g.laplace_transform(Complex64::from(1.0))?.re;
    let rhs = g1 * xi / l_xi;
    let ratio = if g1 == 0.0 { None } else { Some(lhs / rhs) };
    Ok(SmoothedPntReport { xi, lhs, rhs, ratio })
}
