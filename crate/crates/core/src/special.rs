//! Complex log-gamma, gamma and digamma.
//!
//! Both functions shift the argument to `Re z >= 15` with the recurrence and
//! finish with the Stirling / asymptotic series. Left of `Re z = 1/2` the
//! reflection formulas are used.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// B_2, B_4, ..., B_20.
pub const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SHIFT: f64 = 15.0;

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal branch of log Gamma for `Re z > 0`; for `Re z <= 0` the imaginary
/// part is only meaningful modulo 2π.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.re <= 0.0 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        let s = (Complex64::from(PI) * z).sin();
        return Ok(Complex64::from(PI.ln()) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z)?);
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.ln();
        z += 1.0;
    }
    let ln_z = z.ln();
    let mut series = (z - 0.5) * ln_z - z + 0.5 * (2.0 * PI).ln();
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (n * (n - 1.0)));
        pow *= inv2;
    }
    Ok(acc + series)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    if z.im == 0.0 && z.re > 0.0 && z.re < 170.0 {
        return Ok(Complex64::from(ln_gamma(z)?.re.exp()));
    }
    Ok(ln_gamma(z)?.exp())
}

/// `cot z` without overflow for large `|Im z|`.
fn cot(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if z.im >= 0.0 {
        let w = (2.0 * i * z).exp();
        i * (w + 1.0) / (w - 1.0)
    } else {
        let v = (-2.0 * i * z).exp();
        i * (v + 1.0) / (1.0 - v)
    }
}

pub fn digamma(z: Complex64) -> Result<Complex64> {
    if is_nonpositive_integer(z) {
        return Err(Error::Pole { re: z.re, im: z.im });
    }
    if z.re < 0.5 {
        let one = Complex64::new(1.0, 0.0);
        let pz = Complex64::from(PI) * z;
        return Ok(digamma(one - z)? - Complex64::from(PI) * cot(pz));
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.inv();
        z += 1.0;
    }
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = z.ln() - 0.5 * inv;
    let mut pow = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        series -= pow * (b / n);
        pow *= inv2;
    }
    Ok(acc + series)
}

pub fn digamma_real(x: f64) -> Result<f64> {
    Ok(digamma(Complex64::from(x))?.re)
}
