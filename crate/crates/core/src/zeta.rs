//! Riemann zeta by Euler–Maclaurin, the Riemann–Siegel theta and Z functions.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rs_coeffs::{RS_C0, RS_C1, RS_C2, RS_C3, RS_C4};
use crate::special::{ln_gamma, BERNOULLI_EVEN};

/// Height above which `z_function` uses the Riemann–Siegel formula.
pub const RS_SWITCH: f64 = 1000.0;

const EM_TERMS: usize = 6;

/// `ζ(s)` for `s ≠ 1` by Euler–Maclaurin summation with `N = max(50, 2|Im s|)`.
pub fn zeta(s: Complex64) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::Pole { re: 1.0, im: 0.0 });
    }
    let n = 50usize.max((2.0 * s.im.abs()).ceil() as usize);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..n).rev() {
        sum += (-s * (k as f64).ln()).exp();
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let n_pow = (-s * ln_n).exp();
    sum += n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    // B_2k/(2k)! · s(s+1)...(s+2k-2) · N^(-s-2k+1)
    let mut rising = s;
    let mut fact = 2.0;
    let mut n_term = n_pow / nf;
    for k in 0..EM_TERMS {
        sum += BERNOULLI_EVEN[k] / fact * rising * n_term;
        let j = 2.0 * k as f64 + 1.0;
        rising *= (s + j) * (s + j + 1.0);
        fact *= (j + 2.0) * (j + 3.0);
        n_term /= nf * nf;
    }
    Ok(sum)
}

/// `θ(t) = Im ln Γ(1/4 + it/2) - (t/2) ln π`.
pub fn theta(t: f64) -> f64 {
    if t.abs() > 50.0 {
        let a = t.abs();
        let v = 0.5 * a * (a / (2.0 * PI)).ln() - 0.5 * a - PI / 8.0
            + 1.0 / (48.0 * a)
            + 7.0 / (5760.0 * a.powi(3))
            + 31.0 / (80640.0 * a.powi(5));
        return v.copysign(t);
    }
    ln_gamma(Complex64::new(0.25, 0.5 * t)).expect("no pole on Re = 1/4").im - 0.5 * t * PI.ln()
}

/// `Z(t)` via Euler–Maclaurin: `Re(e^(iθ) ζ(1/2 + it))`.
pub fn z_euler_maclaurin(t: f64) -> f64 {
    let z = zeta(Complex64::new(0.5, t)).expect("no pole on the critical line");
    (Complex64::from_polar(1.0, theta(t)) * z).re
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// `Z(t)` via the Riemann–Siegel formula with corrections C0..C4 (t > 0).
pub fn z_riemann_siegel(t: f64) -> f64 {
    let a = (t / (2.0 * PI)).sqrt();
    let n = a.floor() as usize;
    let p = a - n as f64;
    let th = theta(t);
    let mut main = 0.0;
    for k in 1..=n {
        let kf = k as f64;
        main += (th - t * kf.ln()).cos() / kf.sqrt();
    }
    let x = p - 0.5;
    let corr = [&RS_C0[..], &RS_C1, &RS_C2, &RS_C3, &RS_C4];
    let mut r = 0.0;
    let mut w = 1.0;
    for c in corr {
        r += horner(c, x) * w;
        w /= a;
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    2.0 * main + sign * r / a.sqrt()
}

/// Hardy's Z, switching to Riemann–Siegel above `switch`.
pub fn z_function_with_switch(t: f64, switch: f64) -> f64 {
    if t > switch {
        z_riemann_siegel(t)
    } else {
        z_euler_maclaurin(t)
    }
}

pub fn z_function(t: f64) -> f64 {
    z_function_with_switch(t, RS_SWITCH)
}
