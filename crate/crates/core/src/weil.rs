//! Local Weil distributions, the principal-value functionals `P_v`, and the
//! local error terms `E_v`, `E_S`.
//!
//! At a finite place, with `f` given on valuation shells,
//! `W_p(f) = ln q Σ_{e≥1} (f[-e] + q^-e f[e])`: the point of norm `q^e` has weight
//! `ln q`, the point of norm `q^-e` has weight `q^-e ln q`.
//!
//! At the real place two independent routes are provided. The principal-value
//! route evaluates `P_∞ = -½ Pf(1/|x|) + C δ_0` in x-space, with `C` fixed by
//! pairing against the self-dual Gaussian. The digamma route integrates the
//! Mellin transform against `ln π - Re ψ(1/4 + it/2) + c` on the critical line,
//! where `c` is calibrated once on a reference profile.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::arch::LogProfile;
use crate::bruhat::{ExactLevelFunction, LevelFunction, MultSeq};
use crate::error::{Error, Result};
use crate::measures::{is_prime, Place, PlaceKind};
use crate::quad::{integrate, integrate_with_points, QuadOptions};
use crate::special::digamma;

/// Principal-value context for one place.
#[derive(Debug)]
pub struct PvContext {
    place: Place,
    opts: QuadOptions,
    delta: f64,
    calibration: OnceLock<f64>,
}

impl Clone for PvContext {
    fn clone(&self) -> Self {
        let calibration = OnceLock::new();
        if let Some(&c) = self.calibration.get() {
            let _ = calibration.set(c);
        }
        PvContext { place: self.place, opts: self.opts, delta: self.delta, calibration }
    }
}

fn self_dual_gaussian(x: f64) -> f64 {
    (-PI * x * x).exp()
}

/// `⟨Pf(1/|x|), h⟩ = 2 [∫_0^1 (h(x) - h(0))/x dx + ∫_1^∞ h(x)/x dx]` for even `h`,
/// computed in `x = e^v`.
pub fn finite_part_pairing<F: Fn(f64) -> f64>(h: F, v_max: f64, opts: QuadOptions) -> Result<f64> {
    let h0 = h(0.0);
    let inner = integrate(|v: f64| h(v.exp()) - h0, -40.0, 0.0, opts)?.value;
    let outer = integrate_with_points(|v: f64| h(v.exp()), &[0.0, 0.5 * v_max, v_max], opts)?.value;
    Ok(2.0 * (inner + outer))
}

impl PvContext {
    pub fn new(place: Place) -> Result<PvContext> {
        let opts = QuadOptions::tol(1e-15, 1e-13);
        let delta = match place.kind() {
            PlaceKind::Finite(_) => 0.0,
            PlaceKind::Real => {
                // C = ⟨ln|ξ|, e^(-πξ²)⟩ + ½ ⟨Pf(1/|x|), e^(-πx²)⟩, the Gaussian being self-dual.
                let log_pair = 2.0
                    * integrate_with_points(
                        |w: f64| w * w.exp() * self_dual_gaussian(w.exp()),
                        &[-45.0, -5.0, 0.0, 2.5],
                        opts,
                    )?
                    .value;
                let pf = finite_part_pairing(self_dual_gaussian, 2.5, opts)?;
                log_pair + 0.5 * pf
            }
        };
        Ok(PvContext { place, opts, delta, calibration: OnceLock::new() })
    }

    pub fn real() -> Result<PvContext> {
        Self::new(Place::real())
    }

    /// Real-place context calibrated on `reference` before it is returned.
    pub fn calibrated_real(reference: &LogProfile) -> Result<PvContext> {
        let ctx = Self::real()?;
        ctx.calibrate(reference)?;
        Ok(ctx)
    }

    pub fn place(&self) -> Place {
        self.place
    }

    /// Coefficient of `δ_0` in `P_∞`.
    pub fn delta_coefficient(&self) -> f64 {
        self.delta
    }

    pub fn calibration(&self) -> Option<f64> {
        self.calibration.get().copied()
    }

    /// Fix the digamma-route constant from one reference profile. Calibrating twice is an error.
    pub fn calibrate(&self, reference: &LogProfile) -> Result<f64> {
        if !self.place.is_real() {
            return Err(Error::WrongPlace { expected: "real" });
        }
        let target = weil_local_real_pv(self, reference)?;
        let (raw, weight) = digamma_route_parts(reference)?;
        if weight.abs() < 1e-12 {
            return Err(Error::Calibration("reference profile has g(0) ≈ 0".into()));
        }
        let c = (target - raw) / weight;
        self.calibration.set(c).map_err(|_| Error::Calibration("context already calibrated".into()))?;
        Ok(c)
    }

    /// `⟨P_v, h⟩` at a finite place.
    pub fn pairing_finite(&self, h: &LevelFunction) -> Result<f64> {
        pv_pairing_finite(self.place.q()?, h).map(|z| z.re)
    }

    /// `⟨P_∞, h⟩ = -½ ⟨Pf(1/|x|), h⟩ + C h(0)` for an even function `h` that is negligible beyond `e^v_max`.
    pub fn pairing_real<F: Fn(f64) -> f64>(&self, h: F, v_max: f64) -> Result<f64> {
        if !self.place.is_real() {
            return Err(Error::WrongPlace { expected: "real" });
        }
        let h0 = h(0.0);
        Ok(-0.5 * finite_part_pairing(h, v_max, self.opts)? + self.delta * h0)
    }
}

/// `⟨P_p, h⟩ = -∫ (h(x) - h(0) 1_O(x)) d^x x - h(0) ln q / (q - 1)`.
pub fn pv_pairing_finite(p: u64, h: &LevelFunction) -> Result<Complex64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if h.p() != p {
        return Err(Error::Domain("function lives on another Q_p".into()));
    }
    let q = p as f64;
    let ln_q = q.ln();
    let (m, n) = h.level();
    let h0 = h.at_zero();
    // shell averages: shell k = {v_p(D) = k + m}
    let size = h.size();
    let mut sums = vec![Complex64::new(0.0, 0.0); (m + n).max(0) as usize];
    let mut counts = vec![0usize; sums.len()];
    for (d, &c) in h.coeffs().iter().enumerate().skip(1) {
        let mut v = 0usize;
        let mut x = d;
        while x % p as usize == 0 {
            x /= p as usize;
            v += 1;
        }
        sums[v] += c;
        counts[v] += 1;
    }
    debug_assert_eq!(counts.iter().sum::<usize>() + 1, size);
    let avg = |k: i32| -> Complex64 {
        if k >= n {
            h0
        } else if k < -m {
            Complex64::new(0.0, 0.0)
        } else {
            let i = (k + m) as usize;
            sums[i] / counts[i] as f64
        }
    };
    let lo = (-m).min(0);
    let hi = n.max(0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in lo..hi {
        let one_o = if k >= 0 { h0 } else { Complex64::new(0.0, 0.0) };
        acc += (avg(k) - one_o) * ln_q;
    }
    Ok(-acc - h0 * ln_q / (q - 1.0))
}

/// Exact rational multiple `num/den · ln q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LnMultiple {
    pub num: i128,
    pub den: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl LnMultiple {
    pub fn new(num: i128, den: i128) -> LnMultiple {
        let g = gcd(num, den).max(1) * den.signum();
        LnMultiple { num: num / g, den: den / g }
    }

    pub fn zero() -> LnMultiple {
        LnMultiple { num: 0, den: 1 }
    }

    pub fn add(self, o: LnMultiple) -> LnMultiple {
        LnMultiple::new(self.num * o.den + o.num * self.den, self.den * o.den)
    }

    pub fn neg(self) -> LnMultiple {
        LnMultiple { num: -self.num, den: self.den }
    }

    pub fn sub(self, o: LnMultiple) -> LnMultiple {
        self.add(o.neg())
    }

    pub fn value(self, ln_q: f64) -> f64 {
        self.num as f64 / self.den as f64 * ln_q
    }
}

/// `vol(1 + P^k) = ln q / ((q - 1) q^(k-1))` as an exact multiple of `ln q`.
pub fn vol_subgroup_exact(p: u64, k: u32) -> Result<LnMultiple> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if k == 0 {
        return Ok(LnMultiple::new(1, 1));
    }
    let q = p as i128;
    Ok(LnMultiple::new(1, (q - 1) * q.pow(k - 1)))
}

/// [`pv_pairing_finite`] for rational-valued data, exactly.
pub fn pv_pairing_finite_exact(h: &ExactLevelFunction) -> Result<LnMultiple> {
    let p = h.p();
    let q = p as i128;
    let (m, n) = h.level();
    let value = |d: usize| -> Result<LnMultiple> {
        let (num, e) = h.coeffs()[d]
            .as_rational()
            .ok_or_else(|| Error::Domain("exact principal value needs rational values".into()))?;
        Ok(if e >= 0 { LnMultiple::new(num * q.pow(e as u32), 1) } else { LnMultiple::new(num, q.pow((-e) as u32)) })
    };
    let h0 = value(0)?;
    let shells = (m + n).max(0) as usize;
    let mut sums = vec![LnMultiple::zero(); shells];
    let mut counts = vec![0i128; shells];
    for d in 1..h.size() {
        let mut v = 0usize;
        let mut x = d;
        while x % p as usize == 0 {
            x /= p as usize;
            v += 1;
        }
        sums[v] = sums[v].add(value(d)?);
        counts[v] += 1;
    }
    let mut acc = LnMultiple::zero();
    for k in (-m).min(0)..n.max(0) {
        let avg = if k >= n {
            h0
        } else if k < -m {
            LnMultiple::zero()
        } else {
            let i = (k + m) as usize;
            LnMultiple::new(sums[i].num, sums[i].den * counts[i])
        };
        let one_o = if k >= 0 { h0 } else { LnMultiple::zero() };
        acc = acc.add(avg.sub(one_o));
    }
    Ok(acc.neg().sub(LnMultiple::new(h0.num, h0.den * (q - 1))))
}

/// `∫'_{O^x} |x| / |1 - x| d^x x = -⟨P, 1_O⟩ - vol(1 + P)`, exactly.
pub fn unit_pv_integral_exact(p: u64) -> Result<LnMultiple> {
    let one_o = ExactLevelFunction::from_integers(p, 0, 0, &[1])?;
    Ok(pv_pairing_finite_exact(&one_o)?.neg().sub(vol_subgroup_exact(p, 1)?))
}

/// The same integral as `-⟨P, 1_O - 1_(1+P)⟩`, evaluated on level `(0, 1)` data.
pub fn unit_pv_integral_shifted_exact(p: u64) -> Result<LnMultiple> {
    let values: Vec<i64> = (0..p).map(|d| if d == 1 { 0 } else { 1 }).collect();
    let h = ExactLevelFunction::from_integers(p, 0, 1, &values)?;
    Ok(pv_pairing_finite_exact(&h)?.neg())
}

fn finite_weighted_sum(f: &MultSeq, e_min: i32) -> Complex64 {
    let q = f.q();
    let ln_q = q.ln();
    let weight = |k: i32| -> f64 {
        if k <= -e_min {
            1.0
        } else if k >= e_min {
            q.powi(-k)
        } else {
            0.0
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (&k, &v) in f.coeffs() {
        acc += v * weight(k);
    }
    if let Some((from, v)) = f.tail() {
        // explicit negative shells covered by the tail
        for k in from..0 {
            acc += v * weight(k);
        }
        let start = from.max(e_min).max(1);
        acc += v * q.powi(-start) / (1.0 - 1.0 / q);
    }
    acc * ln_q
}

/// `W_p(f)` for an O^x-invariant function given on valuation shells.
pub fn weil_local_finite(f: &MultSeq) -> Complex64 {
    finite_weighted_sum(f, 1)
}

/// `E_p(f)`: the same sum starting at `e = 2`.
pub fn error_term_ev(f: &MultSeq) -> Complex64 {
    finite_weighted_sum(f, 2)
}

fn profile_prime_sum(p: u64, g: &LogProfile, e_min: u32) -> Result<f64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let lp = (p as f64).ln();
    let (lo, hi) = g.support_hint();
    let sup = g.sup_abs(f64::NEG_INFINITY, f64::INFINITY);
    let mut acc = 0.0;
    let mut e = e_min;
    loop {
        let u = e as f64 * lp;
        let w = (p as f64).powi(-(e as i32));
        let pos = if u <= hi { g.eval(u) } else { 0.0 };
        let neg = if -u >= lo { w * g.eval(-u) } else { 0.0 };
        acc += pos + neg;
        if u > hi && w * sup < 1e-18 * sup.max(1e-300) && -u < lo {
            break;
        }
        if e > 4000 {
            return Err(Error::Accuracy("prime-power sum did not terminate".into()));
        }
        e += 1;
    }
    Ok(acc * lp)
}

/// `W_p(g) = ln p Σ_{e≥1} [g(e ln p) + p^-e g(-e ln p)]` for an unramified profile.
pub fn weil_local_finite_profile(p: u64, g: &LogProfile) -> Result<f64> {
    profile_prime_sum(p, g, 1)
}

pub fn error_term_ev_profile(p: u64, g: &LogProfile) -> Result<f64> {
    profile_prime_sum(p, g, 2)
}

/// `W_∞(g)` by the principal-value route.
pub fn weil_local_real_pv(ctx: &PvContext, g: &LogProfile) -> Result<f64> {
    if !ctx.place.is_real() {
        return Err(Error::WrongPlace { expected: "real" });
    }
    let opts = ctx.opts;
    let (lo, hi) = g.support_hint();
    let g0 = g.eval(0.0);
    let ln2 = 2f64.ln();
    let keys = g.key_points();
    let points = |a: f64, b: f64| -> Vec<f64> {
        let mut pts: Vec<f64> = keys.iter().copied().filter(|u| *u > a && *u < b).collect();
        pts.push(a);
        pts.push(b);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    };
    // logistic weight e^v / (1 + e^v)
    let logistic = |v: f64| if v > 0.0 { 1.0 / (1.0 + (-v).exp()) } else { v.exp() / (1.0 + v.exp()) };
    let i1 = integrate_with_points(|v| g.eval(v) * logistic(v), &points(lo, hi), opts)?.value;
    // e^v / |e^v - 1|
    let kernel = |v: f64| v.exp() / v.exp_m1().abs();
    let left = lo.min(0.0) - 40.0;
    let i2a = integrate_with_points(|v| (g.eval(v) - g0) * kernel(v), &points(left, 0.0), opts)?.value;
    let i2b = integrate_with_points(|v| (g.eval(v) - g0) * kernel(v), &points(0.0, ln2), opts)?.value;
    let i3 = if hi > ln2 {
        integrate_with_points(|v| g.eval(v) * kernel(v), &points(ln2, hi), opts)?.value
    } else {
        0.0
    };
    Ok(0.5 * (i1 + i2a + i2b + i3) - ctx.delta * g0)
}

/// Height beyond which `|G(1/2 + it)|` is negligible.
fn spectral_cutoff(g: &LogProfile) -> Result<f64> {
    match g {
        LogProfile::Gaussian { u0, sigma, amp } => {
            let scale = (amp.abs() * sigma * (2.0 * PI).sqrt() * (0.5 * u0 + sigma * sigma / 8.0).exp()).max(1.0);
            Ok((2.0 * (42.0 + scale.ln())).sqrt() / sigma)
        }
        LogProfile::Sum(parts) => parts.iter().map(spectral_cutoff).try_fold(0.0f64, |a, b| b.map(|b| a.max(b))),
        LogProfile::Sampled(_) => {
            let g0 = g.laplace_transform(Complex64::from(0.5))?.norm().max(1e-300);
            let mut t = 16.0;
            while t < 4096.0 {
                let mut tail: f64 = 0.0;
                for i in 0..16 {
                    let z = g.laplace_transform(Complex64::new(0.5, t + 0.5 * i as f64))?;
                    tail = tail.max(z.norm());
                }
                if tail * t.ln() < 1e-13 * g0 {
                    return Ok(t);
                }
                t *= 2.0;
            }
            Err(Error::Accuracy("Mellin transform of the sampled profile decays too slowly".into()))
        }
    }
}

/// `((1/2π)∫ G(1/2+it)(ln π - Re ψ(1/4+it/2)) dt, (1/2π)∫ G(1/2+it) dt)`.
fn digamma_route_parts(g: &LogProfile) -> Result<(f64, f64)> {
    let t_max = spectral_cutoff(g)?;
    let ln_pi = PI.ln();
    let opts = QuadOptions::tol(1e-14, 1e-13);
    let n_pts = 16usize;
    let pts: Vec<f64> = (0..=n_pts).map(|i| t_max * i as f64 / n_pts as f64).collect();
    let both = |t: f64| -> Complex64 {
        let gt = g.laplace_transform(Complex64::new(0.5, t)).map(|z| z.re).unwrap_or(f64::NAN);
        let psi = digamma(Complex64::new(0.25, 0.5 * t)).map(|z| z.re).unwrap_or(f64::NAN);
        Complex64::new(gt * (ln_pi - psi), gt)
    };
    let q = integrate_with_points(both, &pts, opts)?;
    if !q.value.re.is_finite() || !q.value.im.is_finite() {
        return Err(Error::Accuracy("non-finite value in the digamma integrand".into()));
    }
    // real g: G(1/2 - it) = conj G(1/2 + it), so (1/2π)∫_R = (1/π)∫_0^∞ Re
    Ok((q.value.re / PI, q.value.im / PI))
}

/// `W_∞(g)` by the digamma route; needs a calibrated context.
pub fn weil_local_real_digamma(ctx: &PvContext, g: &LogProfile) -> Result<f64> {
    if !ctx.place.is_real() {
        return Err(Error::WrongPlace { expected: "real" });
    }
    let c = ctx.calibration().ok_or(Error::CalibrationRequired)?;
    let (raw, weight) = digamma_route_parts(g)?;
    Ok(raw + c * weight)
}

/// `W_v(g)` for an unramified profile at any place.
pub fn weil_local_profile(ctx: &PvContext, g: &LogProfile) -> Result<f64> {
    match ctx.place.kind() {
        PlaceKind::Real => weil_local_real_pv(ctx, g),
        PlaceKind::Finite(p) => weil_local_finite_profile(p, g),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorTermReport {
    pub value: f64,
    pub tail_bound: f64,
    pub p_max: u64,
}

/// `E_S(g) = Σ_{p ∉ S, p ≤ P_max} E_p(g) + Σ_{v ∈ S} W_v(g) - ln D δ_1` with `ln D = 0` over Q.
pub fn error_term_es(ctx: &PvContext, g: &LogProfile, s: &[Place], p_max: u64) -> Result<ErrorTermReport> {
    if !ctx.place.is_real() {
        return Err(Error::WrongPlace { expected: "real" });
    }
    let in_s = |p: u64| s.iter().any(|v| v.kind() == PlaceKind::Finite(p));
    let mut value = 0.0;
    for v in s {
        value += match v.kind() {
            PlaceKind::Real => weil_local_real_pv(ctx, g)?,
            PlaceKind::Finite(p) => weil_local_finite_profile(p, g)?,
        };
    }
    for p in 2..=p_max {
        if is_prime(p) && !in_s(p) {
            value += error_term_ev_profile(p, g)?;
        }
    }
    let (_, hi) = g.support_hint();
    let sup = g.sup_abs(f64::NEG_INFINITY, f64::INFINITY);
    let pf = p_max.max(2) as f64;
    // Σ_{p>P} Σ_{e≥2} p^-e ln p |g(-e ln p)| ≤ sup · Σ_{n>P} ln n / n² · P/(P-1)
    let negative = sup * ((pf).ln() + 1.0) / pf * pf / (pf - 1.0).max(1.0);
    // positive side only if p² can reach the support
    let positive = if 2.0 * pf.ln() > hi {
        0.0
    } else {
        let u_lo = 2.0 * pf.ln();
        let count = hi.exp().sqrt();
        g.sup_abs(u_lo, hi) * hi * count
    };
    Ok(ErrorTermReport { value, tail_bound: negative + positive, p_max })
}
