use num_complex::Complex64;
use weiltrace_core::trace::{
    build_convolution_op, build_f_op, build_f_op_padded, local_trace_check, tau_f_partial_route, CutoffPhi, UGrid,
    UGridOperator,
};
use weiltrace_core::{LogProfile, Place, PvContext};

#[test]
fn f_times_adjoint_is_identity() {
    let grid = UGrid::new(20.0, 2048).unwrap();
    for places in [vec![Place::real()], vec![Place::real(), Place::finite(3).unwrap()]] {
        let f = build_f_op(grid, &places).unwrap();
        let fa = f.adjoint();
        let mut worst: f64 = 0.0;
        for k in [0usize, 100, 1024, 2047] {
            let mut e = vec![Complex64::default(); 2048];
            e[k] = Complex64::new(1.0, 0.0);
            let y = f.apply(&fa.apply(&e).unwrap()).unwrap();
            worst = worst.max(y.iter().zip(&e).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        assert!(worst < 1e-10, "{worst}");
    }
}

#[test]
fn trace_cyclicity_at_full_size() {
    let grid = UGrid::new(20.0, 4096).unwrap();
    let a = build_convolution_op(grid, &LogProfile::gaussian(0.4, 0.5, 1.0).unwrap()).unwrap();
    let f = build_f_op_padded(grid, &[Place::real()], 2).unwrap();
    let m = UGridOperator::multiplication(grid, &CutoffPhi::default());
    for (x, y) in [(&a, &m), (&f, &m), (&a, &f)] {
        let ab = x.trace_product(y).unwrap();
        let ba = y.trace_product(x).unwrap();
        assert!((ab - ba).norm() < 1e-10, "{ab} {ba}");
    }
}

#[test]
fn tau_route_is_real_for_real_profiles() {
    let grid = UGrid::new(20.0, 4096).unwrap();
    for g in [LogProfile::gaussian(1.5, 0.4, 1.0).unwrap(), LogProfile::gaussian(-0.5, 0.6, 0.8).unwrap()] {
        let t = tau_f_partial_route(grid, &g, &[Place::real()]).unwrap();
        assert!(t.im.abs() < 1e-9, "{t}");
    }
}

#[test]
fn local_trace_is_stable_under_grid_doubling() {
    let grid = UGrid::new(20.0, 4096).unwrap();
    let ctx = PvContext::real().unwrap();
    let g = LogProfile::gaussian(1.5, 0.4, 1.0).unwrap();
    let phi = CutoffPhi::default();
    let a = local_trace_check(grid, &g, &phi, &[Place::real()], &ctx).unwrap();
    let b = local_trace_check(grid.doubled(), &g, &phi, &[Place::real()], &ctx).unwrap();
    assert!((a.operator_trace - b.operator_trace).abs() < 10.0 * a.residual.max(1e-12));
    assert!(a.operator_trace_imag.abs() < 1e-9);
}

#[test]
fn local_trace_does_not_depend_on_the_cutoff() {
    let grid = UGrid::new(20.0, 4096).unwrap();
    let ctx = PvContext::real().unwrap();
    let g = LogProfile::gaussian(0.7, 0.5, 1.0).unwrap();
    for a in [2.0, 6.0, 9.0] {
        let r = local_trace_check(grid, &g, &CutoffPhi::new(a).unwrap(), &[Place::real()], &ctx).unwrap();
        assert!((r.operator_trace - r.weil_sum).abs() < 1e-6, "a = {a}: {r:?}");
    }
}

#[test]
fn profile_too_wide_for_grid_is_rejected() {
    let grid = UGrid::new(8.0, 1024).unwrap();
    let ctx = PvContext::real().unwrap();
    let g = LogProfile::gaussian(3.0, 0.5, 1.0).unwrap();
    assert!(local_trace_check(grid, &g, &CutoffPhi::new(2.0).unwrap(), &[Place::real()], &ctx).is_err());
}
