use std::f64::consts::PI;

use nonlocal_hj_core::analysis::{default_fit_range, holder_fit, log_radii, modulus_of_continuity};
use nonlocal_hj_core::ergodic::{vanishing_discount, DEFAULT_LAMBDAS};
use nonlocal_hj_core::hamiltonian::HamiltonianSpec;
use nonlocal_hj_core::levy::{discretize_default, push_forward, JumpFunction, LevyMeasureSpec};
use nonlocal_hj_core::nonlocal::{eval_operator, InvariantOperator, PointwiseOperator};
use nonlocal_hj_core::solver::{evolve, EvolutionConfig, StationaryConfig};
use nonlocal_hj_core::{GridField, PeriodicGrid};

#[test]
fn a_priori_bounds_along_cosine_evolution() {
    let g = PeriodicGrid::new(1, 128).unwrap();
    let m = discretize_default(&LevyMeasureSpec::fractional(1.0), &g).unwrap();
    let op = InvariantOperator::new(&g, &m).unwrap();
    let ham = HamiltonianSpec::power(2.0, GridField::from_fn(g, |p| (2.0 * PI * p[0]).cos()).unwrap()).unwrap();
    let u0 = GridField::from_fn(g, |p| 0.3 * (4.0 * PI * p[0]).sin()).unwrap();
    let cfg = EvolutionConfig::until(2.0).with_snapshots(vec![0.25, 0.5, 1.0, 1.5]);
    let tr = evolve(&u0, &ham, &op, &cfg).unwrap();
    for (t, u) in tr.times.iter().zip(&tr.fields) {
        assert!(u.sup_norm() <= ham.h0() * t + u0.sup_norm() + 1e-6);
    }
}

#[test]
fn levy_ito_dilation_matches_scaled_operator() {
    let g = PeriodicGrid::new(1, 512).unwrap();
    let u = GridField::from_fn(g, |p| (2.0 * PI * p[0]).cos()).unwrap();
    let jump = JumpFunction::dilation(&g, 2.0).unwrap();
    for sigma in [0.5, 1.0, 1.5] {
        let m = discretize_default(&LevyMeasureSpec::fractional_exact(sigma), &g).unwrap();
        for x in [0, 100, 256] {
            let base = eval_operator(&u, x, &m).unwrap();
            let pushed = eval_operator(&u, x, &push_forward(&m, &jump, x)).unwrap();
            let want = 2f64.powf(sigma) * base;
            assert!((pushed - want).abs() <= 0.03 * want.abs().max(1e-3), "σ {sigma} x {x}: {pushed} vs {want}");
        }
        let op = PointwiseOperator::levy_ito(&g, &m, &jump).unwrap();
        assert!(op.snap_error() <= g.h());
    }
}

#[test]
fn corrector_is_holder_with_expected_exponent() {
    let g = PeriodicGrid::new(1, 128).unwrap();
    let m = discretize_default(&LevyMeasureSpec::fractional(0.5), &g).unwrap();
    let op = InvariantOperator::new(&g, &m).unwrap();
    let ham = HamiltonianSpec::power(2.0, GridField::from_fn(g, |p| (2.0 * PI * p[0]).cos()).unwrap()).unwrap();
    let r = vanishing_discount(&ham, &op, &DEFAULT_LAMBDAS[..2], &StationaryConfig::default(), 0).unwrap();
    let table = modulus_of_continuity(&r.w, &log_radii(&g)).unwrap();
    let fit = holder_fit(&table, default_fit_range(&g)).unwrap();
    assert!(fit.gamma_est >= 0.65, "{fit:?}");
    assert!(fit.r2 >= 0.95);
}
