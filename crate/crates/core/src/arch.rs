//! Test functions at the real place.
//!
//! [`HermiteGaussian`] holds finite Hermite expansions on R. [`LogProfile`]
//! describes an even function through its profile `g(u) = f(e^u)` in the
//! coordinate `u = ln|x|`, where `d^x x` becomes `du`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::quad::{integrate_with_points, QuadOptions};

pub const MAX_HERMITE_DEGREE: usize = 64;

/// `Σ c_k h_k` with `h_k` the L²-normalised Hermite functions for `e^(-2πixξ)`,
/// so that `𝔉 h_k = (-i)^k h_k` and `h_0 = 2^(1/4) e^(-πx²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteGaussian {
    coeffs: Vec<Complex64>,
}

impl HermiteGaussian {
    pub fn new(coeffs: Vec<Complex64>) -> Result<HermiteGaussian> {
        if coeffs.is_empty() || coeffs.len() > MAX_HERMITE_DEGREE + 1 {
            return Err(Error::Domain(format!("Hermite degree must be in 0..={MAX_HERMITE_DEGREE}")));
        }
        Ok(HermiteGaussian { coeffs })
    }

    pub fn basis(k: usize) -> Result<HermiteGaussian> {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c)
    }

    /// `e^(-πx²)` (unnormalised), i.e. `2^(-1/4) h_0`.
    pub fn gaussian() -> HermiteGaussian {
        HermiteGaussian { coeffs: vec![Complex64::from(2f64.powf(-0.25))] }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Values `h_0(x), ..., h_deg(x)`.
    pub fn basis_values(deg: usize, x: f64) -> Vec<f64> {
        let y = (2.0 * PI).sqrt() * x;
        let mut out = Vec::with_capacity(deg + 1);
        let h0 = 2f64.powf(0.25) * (-PI * x * x).exp();
        out.push(h0);
        if deg >= 1 {
            out.push(2f64.sqrt() * y * h0);
        }
        for k in 1..deg {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * y * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
            out.push(next);
        }
        out
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let h = Self::basis_values(self.degree(), x);
        self.coeffs.iter().zip(h).map(|(c, v)| c * v).sum()
    }

    /// `𝔉 f` in the Hermite basis.
    pub fn fourier(&self) -> HermiteGaussian {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c * phase);
            phase *= Complex64::new(0.0, -1.0);
        }
        HermiteGaussian { coeffs }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn reflect(&self) -> HermiteGaussian {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { *c }).collect();
        HermiteGaussian { coeffs }
    }

    /// Beyond this radius every basis function is below 1e-18.
    pub fn effective_radius(&self) -> f64 {
        3.5 + 0.5 * (self.degree() as f64).sqrt()
    }
}

/// Natural cubic spline through sampled profile values, zero outside the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledProfile {
    grid: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip)]
    second: Vec<f64>,
    /// Extra factor `e^(twist u)`.
    twist: f64,
}

impl SampledProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<SampledProfile> {
        if grid.len() != values.len() || grid.len() < 4 {
            return Err(Error::Integrity("sampled profile needs at least 4 (u, value) pairs".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Integrity("sampled profile grid is not strictly increasing".into()));
        }
        if values.iter().chain(&grid).any(|v| !v.is_finite()) {
            return Err(Error::Integrity("non-finite value in sampled profile".into()));
        }
        let second = natural_spline(&grid, &values);
        Ok(SampledProfile { grid, values, second, twist: 0.0 })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn spline(&self, u: f64) -> f64 {
        let n = self.grid.len();
        if u < self.grid[0] || u > self.grid[n - 1] {
            return 0.0;
        }
        let i = match self.grid.binary_search_by(|g| g.total_cmp(&u)) {
            Ok(i) => return self.values[i],
            Err(i) => i - 1,
        };
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let h = x1 - x0;
        let a = (x1 - u) / h;
        let b = (u - x0) / h;
        a * self.values[i]
            + b * self.values[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }

    fn eval(&self, u: f64) -> f64 {
        let v = self.spline(u);
        if self.twist == 0.0 || v == 0.0 {
            v
        } else {
            v * (self.twist * u).exp()
        }
    }
}

fn natural_spline(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let a = h0 / 6.0;
        let b = (h0 + h1) / 3.0;
        let cc = h1 / 6.0;
        let rhs = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        let denom = b - a * c[i - 1];
        c[i] = cc / denom;
        d[i] = (rhs - a * d[i - 1]) / denom;
    }
    for i in (1..n - 1).rev() {
        m[i] = d[i] - c[i] * m[i + 1];
    }
    m
}

/// Profile `g(u)` of an even test function at the real place.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogProfile {
    /// `amp · exp(-(u - u0)² / (2σ²))`
    Gaussian { u0: f64, sigma: f64, amp: f64 },
    Sampled(SampledProfile),
    Sum(Vec<LogProfile>),
}

impl LogProfile {
    pub fn gaussian(u0: f64, sigma: f64, amp: f64) -> Result<LogProfile> {
        if !(sigma > 0.0) || !u0.is_finite() || !amp.is_finite() {
            return Err(Error::Domain(format!("invalid Gaussian profile (u0 = {u0}, σ = {sigma})")));
        }
        Ok(LogProfile::Gaussian { u0, sigma, amp })
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<LogProfile> {
        Ok(LogProfile::Sampled(SampledProfile::new(grid, values)?))
    }

    /// Parse a two-column ASCII file `u value` ('#' starts a comment).
    pub fn load_sampled(path: &Path) -> Result<LogProfile> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_sampled(&text)
    }

    pub fn parse_sampled(text: &str) -> Result<LogProfile> {
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::Parse { line: i + 1, msg: format!("expected 2 columns, found {}", cols.len()) });
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: format!("{s}: {e}") })
            };
            grid.push(parse(cols[0])?);
            values.push(parse(cols[1])?);
        }
        Self::sampled(grid, values)
    }

    pub fn sum(parts: Vec<LogProfile>) -> LogProfile {
        LogProfile::Sum(parts)
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            LogProfile::Gaussian { u0, sigma, amp } => {
                let z = (u - u0) / sigma;
                amp * (-0.5 * z * z).exp()
            }
            LogProfile::Sampled(s) => s.eval(u),
            LogProfile::Sum(parts) => parts.iter().map(|p| p.eval(u)).sum(),
        }
    }

    /// The function itself: `f(x) = g(ln|x|)`.
    pub fn eval_x(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else {
            self.eval(x.abs().ln())
        }
    }

    /// `e^(αu) g(u)`.
    pub fn twisted(&self, alpha: f64) -> LogProfile {
        match self {
            LogProfile::Gaussian { u0, sigma, amp } => LogProfile::Gaussian {
                u0: u0 + alpha * sigma * sigma,
                sigma: *sigma,
                amp: amp * (alpha * u0 + 0.5 * alpha * alpha * sigma * sigma).exp(),
            },
            LogProfile::Sampled(s) => {
                let mut t = s.clone();
                t.twist += alpha;
                LogProfile::Sampled(t)
            }
            LogProfile::Sum(parts) => LogProfile::Sum(parts.iter().map(|p| p.twisted(alpha)).collect()),
        }
    }

    /// `u ↦ g(-u)`.
    pub fn reflected(&self) -> LogProfile {
        match self {
            LogProfile::Gaussian { u0, sigma, amp } => LogProfile::Gaussian { u0: -u0, sigma: *sigma, amp: *amp },
            LogProfile::Sampled(s) => {
                let grid: Vec<f64> = s.grid.iter().rev().map(|u| -u).collect();
                let values: Vec<f64> = s.values.iter().rev().copied().collect();
                let mut r = SampledProfile::new(grid, values).expect("reflection of a valid grid");
                r.twist = -s.twist;
                LogProfile::Sampled(r)
            }
            LogProfile::Sum(parts) => LogProfile::Sum(parts.iter().map(|p| p.reflected()).collect()),
        }
    }

    /// Interval outside of which the profile is negligible (below ~1e-18 of its scale).
    pub fn support_hint(&self) -> (f64, f64) {
        match self {
            LogProfile::Gaussian { u0, sigma, .. } => (u0 - 9.5 * sigma, u0 + 9.5 * sigma),
            LogProfile::Sampled(s) => (s.grid[0], s.grid[s.grid.len() - 1]),
            LogProfile::Sum(parts) => parts
                .iter()
                .map(|p| p.support_hint())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d))),
        }
    }

    /// Points where the profile is non-smooth or where its mass concentrates.
    pub fn key_points(&self) -> Vec<f64> {
        match self {
            LogProfile::Gaussian { u0, sigma, .. } => vec![u0 - 3.0 * sigma, *u0, u0 + 3.0 * sigma],
            LogProfile::Sampled(s) => {
                let n = s.grid.len();
                let stride = (n / 64).max(1);
                let mut pts: Vec<f64> = s.grid.iter().step_by(stride).copied().collect();
                pts.push(s.grid[n - 1]);
                pts
            }
            LogProfile::Sum(parts) => parts.iter().flat_map(|p| p.key_points()).collect(),
        }
    }

    /// Upper bound for `sup |g|` on `[lo, hi]`.
    pub fn sup_abs(&self, lo: f64, hi: f64) -> f64 {
        match self {
            LogProfile::Gaussian { u0, .. } => self.eval(u0.clamp(lo, hi)).abs(),
            LogProfile::Sampled(s) => {
                let (a, b) = (lo.max(s.grid[0]), hi.min(s.grid[s.grid.len() - 1]));
                if a > b {
                    return 0.0;
                }
                let n = 8 * s.grid.len();
                let mut best: f64 = 0.0;
                for i in 0..=n {
                    let u = a + (b - a) * i as f64 / n as f64;
                    best = best.max(s.eval(u).abs());
                }
                best * 1.01
            }
            LogProfile::Sum(parts) => parts.iter().map(|p| p.sup_abs(lo, hi)).sum(),
        }
    }

    /// True if `G(s)` has a closed form.
    pub fn has_closed_form(&self) -> bool {
        match self {
            LogProfile::Gaussian { .. } => true,
            LogProfile::Sampled(_) => false,
            LogProfile::Sum(parts) => parts.iter().all(|p| p.has_closed_form()),
        }
    }

    /// Sorted breakpoints covering the support, for quadrature.
    pub fn quadrature_points(&self) -> Vec<f64> {
        let (lo, hi) = self.support_hint();
        let mut pts: Vec<f64> = self.key_points().into_iter().filter(|u| *u > lo && *u < hi).collect();
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `G(s) = ∫ g(u) e^(su) du`.
    pub fn laplace_transform(&self, s: Complex64) -> Result<Complex64> {
        match self {
            LogProfile::Gaussian { u0, sigma, amp } => {
                let e = s * *u0 + 0.5 * sigma * sigma * s * s;
                Ok(e.exp() * (amp * sigma * (2.0 * PI).sqrt()))
            }
            LogProfile::Sampled(sp) => {
                let n = sp.grid.len();
                let weight = |u: f64| (s.re * u).exp();
                let scale = sp
                    .grid
                    .iter()
                    .zip(&sp.values)
                    .map(|(u, v)| (v * (sp.twist * u).exp()).abs() * weight(*u))
                    .fold(0.0, f64::max);
                for &i in &[0, n - 1] {
                    let u = sp.grid[i];
                    let edge = (sp.values[i] * (sp.twist * u).exp()).abs() * weight(u);
                    if edge > 1e-10 * scale {
                        return Err(Error::Divergence(format!(
                            "sampled profile has not decayed at u = {u} for Re s = {}",
                            s.re
                        )));
                    }
                }
                self.laplace_quadrature(s)
            }
            LogProfile::Sum(parts) => parts.iter().map(|p| p.laplace_transform(s)).sum(),
        }
    }

    /// `G(s)` by adaptive quadrature regardless of kind.
    pub fn laplace_quadrature(&self, s: Complex64) -> Result<Complex64> {
        let pts = self.quadrature_points();
        let q = integrate_with_points(|u| (s * u).exp() * self.eval(u), &pts, QuadOptions::tol(1e-14, 1e-12))?;
        Ok(q.value)
    }
}
