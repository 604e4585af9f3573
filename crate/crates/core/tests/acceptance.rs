//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p weiltrace-core --test acceptance -- --nocapture --test-threads 1`
//! to see the lines in order.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weiltrace_core::bruhat::{xi_basis, ExactLevelFunction};
use weiltrace_core::fourier::fourier_padic_exact;
use weiltrace_core::global::{explicit_formula_check, find_zeros, pnt_check, poisson_check, smoothed_pnt_check};
use weiltrace_core::measures::vol_subgroup;
use weiltrace_core::trace::{commutator_trace_check, local_trace_check, CutoffPhi, UGrid};
use weiltrace_core::weil::{
    pv_pairing_finite, pv_pairing_finite_exact, unit_pv_integral_exact, unit_pv_integral_shifted_exact,
    vol_subgroup_exact, weil_local_real_digamma, weil_local_real_pv, LnMultiple,
};
use weiltrace_core::{HermiteGaussian, LevelFunction, LogProfile, Place, PrimeTable, PvContext, QpElem, ZeroTable};

fn report(n: u32, name: &str, checks: &[(&str, bool)], elapsed: Duration, limit: Duration) {
    let timely = elapsed < limit;
    let ok = timely && checks.iter().all(|(_, c)| *c);
    let failed: Vec<&str> = checks.iter().filter(|(_, c)| !*c).map(|(d, _)| *d).collect();
    let mut line = format!(
        "criterion {n:2} {name}: {} ({:.2?}, limit {:?})",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        limit
    );
    if !failed.is_empty() {
        line.push_str(&format!(" failing: {}", failed.join("; ")));
    }
    if !timely {
        line.push_str(" over time");
    }
    println!("{line}");
    assert!(ok, "{line}");
}

fn reference_zeros() -> ZeroTable {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/zeros_ref.txt");
    ZeroTable::load(&path).expect("reference zero file")
}

#[test]
fn criterion_01_exact_finite_identities() {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for p in [2u64, 3, 5, 7, 11] {
        let lp = (p as f64).ln();
        let place = Place::finite(p).unwrap();
        let pair = pv_pairing_finite(p, &xi_basis(p, 0).unwrap()).unwrap().re;
        let vol = vol_subgroup(&place, 1).unwrap();
        let shifted = LevelFunction::from_real(p, 0, 1, &(0..p).map(|d| if d == 1 { 0.0 } else { 1.0 }).collect::<Vec<_>>())
            .unwrap();
        let unit_integral = -pv_pairing_finite(p, &shifted).unwrap().re;
        worst = worst
            .max((pair + lp / (p as f64 - 1.0)).abs())
            .max((vol - lp / (p as f64 - 1.0)).abs())
            .max((-pair - vol).abs())
            .max(unit_integral.abs());

        let one_o = ExactLevelFunction::from_integers(p, 0, 0, &[1]).unwrap();
        exact &= pv_pairing_finite_exact(&one_o).unwrap() == LnMultiple::new(-1, p as i128 - 1);
        exact &= vol_subgroup_exact(p, 1).unwrap() == LnMultiple::new(1, p as i128 - 1);
        exact &= unit_pv_integral_exact(p).unwrap() == LnMultiple::zero();
        exact &= unit_pv_integral_shifted_exact(p).unwrap() == LnMultiple::zero();
    }
    println!("  max float deviation {worst:.2e}");
    checks.push(("float identities to 1e-12", worst <= 1e-12));
    checks.push(("exact identities", exact));
    report(1, "exact finite-place identities", &checks, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_02_padic_fourier_calculus() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut involution = true;
    let mut unitary = true;
    let mut levels = 0;
    for (p, max_total) in [(2u64, 9i32), (3, 6)] {
        for total in 0..=max_total {
            for m in [-1, 0, total / 2, total] {
                let n = total - m;
                if m + n != total || (m == -1 && n > max_total) {
                    continue;
                }
                let size = p.pow(total as u32) as usize;
                let draw = |rng: &mut ChaCha8Rng| -> Vec<i64> { (0..size).map(|_| rng.gen_range(-5..=5)).collect() };
                let f = ExactLevelFunction::from_integers(p, m, n, &draw(&mut rng)).unwrap();
                let g = ExactLevelFunction::from_integers(p, m, n, &draw(&mut rng)).unwrap();
                let ff = fourier_padic_exact(&f).unwrap();
                let fg = fourier_padic_exact(&g).unwrap();
                involution &= fourier_padic_exact(&ff).unwrap().equals(&f.reflect()).unwrap();
                unitary &= ff.inner(&fg).unwrap().sub(&f.inner(&g).unwrap()).is_zero();
                levels += 1;
            }
        }
    }
    let mut unit_ball = true;
    for p in [2u64, 3] {
        let one = ExactLevelFunction::from_integers(p, 0, 0, &[1]).unwrap();
        unit_ball &= fourier_padic_exact(&one).unwrap().equals(&one).unwrap();
        let fine = one.refine(2, 3).unwrap();
        unit_ball &= fourier_padic_exact(&fine).unwrap().equals(&fine).unwrap();
    }
    println!("  {levels} levels checked");
    let checks = [("F^2 f = f(-x)", involution), ("unitarity", unitary), ("F 1_Zp = 1_Zp", unit_ball)];
    report(2, "p-adic Fourier calculus (exact)", &checks, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_03_xi_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut round_trip = true;
    let mut equivariant = true;
    for trial in 0..100 {
        let p = [2u64, 3, 5, 7][trial % 4];
        let lo = rng.gen_range(-3..=0);
        let hi = rng.gen_range(lo..=3);
        let mut f = LevelFunction::zero(p, 0, 0).unwrap();
        for j in lo..=hi {
            let c = rng.gen_range(-9..=9) as f64;
            f = f.add(&xi_basis(p, j).unwrap().scale(c.into())).unwrap();
        }
        let rebuilt = f
            .xi_expansion()
            .unwrap()
            .into_iter()
            .fold(LevelFunction::zero(p, 0, 0).unwrap(), |acc, (j, b)| acc.add(&xi_basis(p, j).unwrap().scale(b)).unwrap());
        round_trip &= rebuilt.max_abs_diff(&f).unwrap() == 0.0;

        let seq = f.to_multiplicative().unwrap();
        let (m, n) = f.level();
        for k in -5..=5 {
            let a = QpElem::uniformizer_power(p, k, (m + n + 12) as u32);
            let moved = f.translate(&a).unwrap().to_multiplicative().unwrap();
            equivariant &= moved.max_abs_diff(&seq.shift(k)) == 0.0;
        }
    }
    let checks = [("greedy ξ-expansion exact", round_trip), ("shift equivariance |k| ≤ 5", equivariant)];
    report(3, "ξ-basis round trip", &checks, start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_04_poisson() {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..=4 {
        let h = HermiteGaussian::basis(k).unwrap();
        for x in [0.3, 0.7, 1.0, 1.7, 3.0] {
            worst = worst.max(poisson_check(&h, x).unwrap().residual);
        }
    }
    println!("  max residual {worst:.2e}");
    report(4, "Poisson summation", &[("residual < 1e-12", worst < 1e-12)], start.elapsed(), Duration::from_secs(1));
}

#[test]
fn criterion_05_archimedean_cross_route() {
    let start = Instant::now();
    let ctx = PvContext::calibrated_real(&LogProfile::gaussian(0.0, 1.0, 1.0).unwrap()).unwrap();
    let holdout = [
        (1.0, 0.7, 1.0),
        (2.0, 0.5, 1.0),
        (-1.5, 0.3, 0.8),
        (0.3, 0.2, 1.7),
        (-0.4, 1.2, 0.5),
        (2.5, 0.25, 1.1),
        (-2.2, 0.6, 2.0),
        (0.8, 0.9, -0.7),
        (1.6, 0.15, 1.0),
        (-0.9, 0.45, 1.3),
    ];
    let mut worst: f64 = 0.0;
    for (u0, s, a) in holdout {
        let g = LogProfile::gaussian(u0, s, a).unwrap();
        let pv = weil_local_real_pv(&ctx, &g).unwrap();
        let dg = weil_local_real_digamma(&ctx, &g).unwrap();
        worst = worst.max((pv - dg).abs());
    }
    println!("  calibration constant {:.3e}, max route difference {worst:.2e}", ctx.calibration().unwrap());
    report(5, "archimedean Weil term cross-route", &[("agree to 1e-6", worst <= 1e-6)], start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_06_commutator_trace() {
    let start = Instant::now();
    let grid = UGrid::new(20.0, 4096).unwrap();
    let phi = CutoffPhi::new(4.0).unwrap();
    let gauss = |u0: f64, s: f64, a: f64| LogProfile::gaussian(u0, s, a).unwrap();
    let suite = [
        (gauss(0.0, 1.0, 1.0), gauss(0.0, 1.0, 1.0)),
        (gauss(0.5, 0.7, 1.0), gauss(-0.3, 0.5, 1.0)),
        (gauss(1.0, 0.4, 2.0), gauss(0.8, 0.6, -1.0)),
        (gauss(-1.2, 0.9, 1.0), gauss(2.0, 0.3, 0.5)),
        (gauss(0.0, 0.2, 1.0), gauss(0.1, 1.5, 1.0)),
    ];
    let mut worst: f64 = 0.0;
    let mut stable = true;
    let mut antisym: f64 = 0.0;
    for (f0, f1) in &suite {
        let r = commutator_trace_check(grid, f0, f1, &phi).unwrap();
        let d = commutator_trace_check(grid.doubled(), f0, f1, &phi).unwrap();
        let floor = 1e-12;
        stable &= (r.lhs - d.lhs).abs() < 10.0 * r.residual.max(floor);
        worst = worst.max(r.residual);
        let s = commutator_trace_check(grid, f1, f0, &phi).unwrap();
        antisym = antisym.max((r.lhs + s.lhs).abs());
        println!("  lhs {:+.12e} rhs {:+.12e} residual {:.2e} doubled {:.2e}", r.lhs, r.rhs, r.residual, d.residual);
    }
    let checks = [
        ("residual ≤ 1e-6", worst <= 1e-6),
        ("stable under doubling", stable),
        ("swapped traces cancel", antisym <= 1e-6),
    ];
    report(6, "commutator trace identity", &checks, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_07_local_trace_formula() {
    let start = Instant::now();
    let grid = UGrid::new(20.0, 4096).unwrap();
    let ctx = PvContext::real().unwrap();
    let real = [Place::real()];
    let two = [Place::real(), Place::finite(2).unwrap()];
    let mut ok_real = true;
    let mut ok_two = true;
    let cases_real = [
        (LogProfile::gaussian(1.5, 0.4, 1.0).unwrap(), CutoffPhi::default()),
        (LogProfile::gaussian(0.0, 0.05, 1.0).unwrap(), CutoffPhi::new(10.0).unwrap()),
        (LogProfile::gaussian(-0.5, 0.6, 0.8).unwrap(), CutoffPhi::default()),
    ];
    for (g, phi) in &cases_real {
        let r = local_trace_check(grid, g, phi, &real, &ctx).unwrap();
        println!("  S={{∞}}: trace {:+.10e} weil {:+.10e} tau {:+.10e} residual {:.2e} tau residual {:.2e}",
            r.operator_trace, r.weil_sum, r.tau_route, r.residual, r.tau_residual);
        ok_real &= r.residual <= 1e-5 && r.tau_residual <= 1e-5;
    }
    let cases_two = [LogProfile::gaussian(2f64.ln(), 0.15, 1.0).unwrap(), LogProfile::gaussian(0.3, 0.3, 1.0).unwrap()];
    for g in &cases_two {
        let r = local_trace_check(grid, g, &CutoffPhi::default(), &two, &ctx).unwrap();
        println!("  S={{∞,2}}: trace {:+.10e} weil {:+.10e} tau {:+.10e} residual {:.2e} tau residual {:.2e}",
            r.operator_trace, r.weil_sum, r.tau_route, r.residual, r.tau_residual);
        ok_two &= r.residual <= 1e-4 && r.tau_residual <= 1e-4;
    }
    let checks = [("S={∞} within 1e-5", ok_real), ("S={∞,2} within 1e-4", ok_two)];
    report(7, "local trace formula", &checks, start.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_08_explicit_formula() {
    let start = Instant::now();
    let zeros = reference_zeros().truncated(100);
    let primes = PrimeTable::new(10_000);
    let ctx = PvContext::real().unwrap();
    let g = LogProfile::gaussian(2.0, 0.2, 1.0).unwrap();
    let tol = 1e-6;
    let r = explicit_formula_check(&g, &zeros, &primes, &ctx, tol).unwrap();
    let mutated = explicit_formula_check(&g, &zeros.without(0), &primes, &ctx, tol).unwrap();
    println!(
        "  geometric {:+.12} spectral {:+.12} residual {:.2e}; tails prime {:.1e} zeros {:.1e}; mutated residual {:.2e}",
        r.geometric.total, r.spectral.total, r.residual, r.geometric.prime_tail_bound, r.spectral.tail_bound, mutated.residual
    );
    let checks = [
        ("residual ≤ 1e-6", r.pass),
        ("tails < 1e-8", r.geometric.prime_tail_bound < 1e-8 && r.spectral.tail_bound < 1e-8),
        ("deleting γ1 breaks it", mutated.residual > 10.0 * tol),
    ];
    report(8, "explicit formula", &checks, start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_09_zero_finder() {
    let start = Instant::now();
    let reference = reference_zeros();
    let found = find_zeros(50).unwrap();
    let worst = found
        .ordinates()
        .iter()
        .zip(reference.ordinates())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let g1 = found.ordinates()[0];
    println!("  γ1 = {g1:.10}, max deviation from reference {worst:.2e}");
    let checks = [
        ("50 zeros found", found.len() == 50),
        ("match reference to 1e-6", worst <= 1e-6),
        ("γ1 = 14.134725 ± 1e-6", (g1 - 14.134725).abs() <= 1e-6),
    ];
    report(9, "zero finder", &checks, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_10_prime_number_theorem() {
    let start = Instant::now();
    let primes = PrimeTable::new(1_000_000);
    let r = pnt_check(1_000_000, &primes).unwrap();
    let ratios: Vec<f64> = r.series.iter().map(|p| p.ratio).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]) && ratios.len() == 4;
    let g = LogProfile::gaussian(0.0, 0.3, 1.0).unwrap();
    let s = smoothed_pnt_check(&g, 1e5).unwrap();
    let ratio = s.ratio.unwrap_or(f64::NAN);
    println!("  π(1e6) = {}, ratios {ratios:?}, smoothed ratio at 1e5 = {ratio:.6}", r.pi);
    let checks = [
        ("π(1e6) = 78498", r.pi == 78498),
        ("ratio(1e6) in [1.05, 1.12]", (1.05..=1.12).contains(&r.ratio)),
        ("ratio strictly decreasing", decreasing),
        ("smoothed ratio within 10% of 1", (ratio - 1.0).abs() <= 0.1),
    ];
    report(10, "prime number theorem", &checks, start.elapsed(), Duration::from_secs(30));
}
