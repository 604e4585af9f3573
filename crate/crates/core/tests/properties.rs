use num_complex::Complex64;
use proptest::prelude::*;
use weiltrace_core::bruhat::{xi_basis, ExactLevelFunction, ExactMultSeq};
use weiltrace_core::fourier::{equiv_fourier, equiv_fourier_adjoint_exact, equiv_fourier_exact, fourier_padic_exact};
use weiltrace_core::global::{sieve_primes, sieve_primes_parallel};
use weiltrace_core::measures::is_prime;
use weiltrace_core::weil::weil_local_real_pv;
use weiltrace_core::{GammaFactor, LevelFunction, LogProfile, MultSeq, Place, PvContext, QpElem};

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

/// `Σ c_j ξ_j` for `j` starting at `lo`.
fn xi_combination(p: u64, lo: i32, cs: &[i32]) -> LevelFunction {
    cs.iter().enumerate().fold(LevelFunction::zero(p, 0, 0).unwrap(), |acc, (i, &c)| {
        acc.add(&xi_basis(p, lo + i as i32).unwrap().scale(Complex64::from(c as f64))).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn xi_expansion_round_trip(p in prime(), lo in -3i32..=1, cs in prop::collection::vec(-9i32..=9, 1..5)) {
        let f = xi_combination(p, lo, &cs);
        let back = f.to_multiplicative().unwrap();
        let rebuilt = LevelFunction::from_multiplicative(&back).unwrap();
        prop_assert_eq!(rebuilt.max_abs_diff(&f).unwrap(), 0.0);
    }

    #[test]
    fn translation_is_a_shift(p in prime(), lo in -3i32..=1, cs in prop::collection::vec(-9i32..=9, 1..5), k in -5i32..=5) {
        let f = xi_combination(p, lo, &cs);
        let (m, n) = f.level();
        let a = QpElem::uniformizer_power(p, k, (m + n + 12) as u32);
        let moved = f.translate(&a).unwrap().to_multiplicative().unwrap();
        prop_assert_eq!(moved.max_abs_diff(&f.to_multiplicative().unwrap().shift(k)), 0.0);
    }

    #[test]
    fn refinement_preserves_everything(
        p in prop::sample::select(vec![2u64, 3]),
        m in -1i32..=1,
        n in 0i32..=2,
        dm in 0i32..=2,
        dn in 0i32..=2,
        seed in prop::collection::vec(-4.0f64..4.0, 27),
        x_val in -2i32..=4,
        x_unit in 1u64..200,
    ) {
        prop_assume!(m + n >= 0);
        let size = p.pow((m + n) as u32) as usize;
        let f = LevelFunction::from_real(p, m, n, &seed[..size]).unwrap();
        let r = f.refine(m + dm, n + dn).unwrap();
        prop_assert!((r.integral() - f.integral()).norm() < 1e-12);
        prop_assert!((r.norm_sqr() - f.norm_sqr()).abs() < 1e-12);
        let unit = if x_unit % p == 0 { x_unit + 1 } else { x_unit };
        let x = QpElem::new(p, x_val, unit, 16).unwrap();
        prop_assert!((r.evaluate(&x).unwrap() - f.evaluate(&x).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn exact_fourier_involution_and_unitarity(
        p in prop::sample::select(vec![2u64, 3]),
        m in -1i32..=2,
        n in 0i32..=2,
        a in prop::collection::vec(-6i64..=6, 81),
        b in prop::collection::vec(-6i64..=6, 81),
    ) {
        prop_assume!(m + n >= 0);
        let size = p.pow((m + n) as u32) as usize;
        let f = ExactLevelFunction::from_integers(p, m, n, &a[..size]).unwrap();
        let g = ExactLevelFunction::from_integers(p, m, n, &b[..size]).unwrap();
        let ff = fourier_padic_exact(&f).unwrap();
        let fg = fourier_padic_exact(&g).unwrap();
        prop_assert!(fourier_padic_exact(&ff).unwrap().equals(&f.reflect()).unwrap());
        prop_assert!(ff.inner(&fg).unwrap().sub(&f.inner(&g).unwrap()).is_zero());
    }

    #[test]
    fn equivariant_transform_inverts_exactly_on_mean_zero_data(
        p in prop::sample::select(vec![2u64, 3]),
        lo in -2i32..=1,
        cs in prop::collection::vec(-5i64..=5, 1..4),
    ) {
        // H - q λ_ϖ H has vanishing additive integral
        let shells: Vec<(i32, i64)> = cs.iter().enumerate().map(|(i, &c)| (lo + i as i32, c)).collect();
        let h = ExactMultSeq::from_integers(p, &shells).unwrap();
        let f = h.add(&h.shift(1).scale_p_pow(1).neg()).unwrap();
        prop_assert!(f.additive_integral().is_zero());
        let back = equiv_fourier_exact(&equiv_fourier_adjoint_exact(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn mellin_symbol_of_equivariant_transform(
        p in prime(),
        lo in -2i32..=1,
        cs in prop::collection::vec(-3.0f64..3.0, 1..4),
        re in 0.2f64..0.8,
        im in -10.0f64..10.0,
    ) {
        let shells: Vec<(i32, f64)> = cs.iter().enumerate().map(|(i, &c)| (lo + i as i32, c)).collect();
        let f = MultSeq::from_real_shells(p, &shells).unwrap();
        let s = Complex64::new(re, im);
        let mf = f.mellin(s).unwrap();
        prop_assume!(mf.norm() > 1e-3);
        let lhs = equiv_fourier(&f).unwrap().mellin(s).unwrap();
        let gamma = GammaFactor::new(Place::finite(p).unwrap()).eval(s).unwrap();
        prop_assert!((lhs - gamma * mf).norm() < 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn sieve_matches_trial_division(lo in 2u64..200_000, width in 1u64..2_000) {
        let hi = lo + width;
        let table: Vec<u64> = sieve_primes(hi).into_iter().filter(|&p| p >= lo).collect();
        let trial: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
        prop_assert_eq!(table, trial);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn archimedean_term_is_linear(
        u1 in -2.0f64..2.0, s1 in 0.2f64..1.0, a1 in -2.0f64..2.0,
        u2 in -2.0f64..2.0, s2 in 0.2f64..1.0, a2 in -2.0f64..2.0,
    ) {
        let ctx = PvContext::real().unwrap();
        let g1 = LogProfile::gaussian(u1, s1, a1).unwrap();
        let g2 = LogProfile::gaussian(u2, s2, a2).unwrap();
        let sum = LogProfile::sum(vec![g1.clone(), g2.clone()]);
        let w = weil_local_real_pv(&ctx, &sum).unwrap();
        let parts = weil_local_real_pv(&ctx, &g1).unwrap() + weil_local_real_pv(&ctx, &g2).unwrap();
        prop_assert!((w - parts).abs() < 1e-9);
    }
}

#[test]
fn parallel_sieve_is_identical() {
    for x in [2u64, 10, 65_535, 65_536, 65_537, 300_001] {
        assert_eq!(sieve_primes(x), sieve_primes_parallel(x));
    }
}
