use super::*;
use crate::grid::GridField;
use proptest::prelude::*;

fn grid1(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(1, n).unwrap()
}

fn grid2(n: usize) -> PeriodicGrid {
    PeriodicGrid::new(2, n).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

#[test]
fn h_alpha_sigma_cases() {
    assert!((h_alpha_sigma(0.0, 1.0, 0.5).unwrap() - 2.0).abs() < 1e-14);
    assert!((h_alpha_sigma(1.0, 1.0, 0.5).unwrap() - 1.693_147_180_559_945).abs() < 1e-12);
    assert_eq!(h_alpha_sigma(2.0, 1.0, 0.3).unwrap(), 1.0);
    assert!(h_alpha_sigma(1.0, 1.0, 0.0).is_err());
}

#[test]
fn fractional_constant_known_values() {
    assert!((fractional_constant(1, 1.0) - 1.0 / math::PI).abs() < 1e-14);
    // C_{2,1} = 1 / (2π)
    assert!((fractional_constant(2, 1.0) - 1.0 / (2.0 * math::PI)).abs() < 1e-14);
}

#[test]
fn finite_measure_passthrough() {
    let spec = LevyMeasureSpec::Finite { atoms: vec![([0.25, 0.0], 1.0), ([-0.25, 0.0], 1.0)], sigma: 1.0 };
    let m = discretize_default(&spec, &grid1(64)).unwrap();
    assert_eq!(m.atoms.len(), 2);
    assert_eq!(m.near_second_moment, 0.0);
    assert_eq!(m.far_mass, 0.0);
    assert!(m.symmetric);
}

#[test]
fn near_second_moment_matches_numeric_integral() {
    let sigma = 0.5;
    let g = grid1(128);
    let spec = LevyMeasureSpec::fractional_exact(sigma);
    let m = discretize_default(&spec, &g).unwrap();
    let c = fractional_constant(1, sigma);
    let closed = c * 2.0 * math::powf(m.r_cut, 2.0 - sigma) / (2.0 - sigma);
    assert!((m.near_second_moment - closed).abs() < 1e-14 * closed.max(1.0));
    // ∫_{-r}^{r} z² c |z|^{-1-σ} dz with substitution z = t², smooth integrand
    let numeric = 2.0 * simpson(|t| c * 2.0 * math::powf(t, 3.0 - 2.0 * sigma), 0.0, math::sqrt(m.r_cut), 2000);
    assert!((m.near_second_moment - numeric).abs() < 1e-8 * closed);
}

#[test]
fn total_atom_mass_matches_analytic_tail() {
    let sigma = 0.5;
    let g = grid1(64);
    let spec = LevyMeasureSpec::fractional_exact(sigma);
    let m = discretize(&spec, &g, 0.01, DEFAULT_R_MAX).unwrap();
    let c = fractional_constant(1, sigma);
    let expected = c * 2.0 * (math::powf(0.01, -0.5) - math::powf(4.0, -0.5)) / 0.5;
    assert!((m.total_atom_mass() - expected).abs() < 1e-12 * expected);
}

#[test]
fn rejects_singular_cell() {
    let g = grid1(64);
    assert!(matches!(discretize(&LevyMeasureSpec::fractional(1.0), &g, 0.001, 4.0), Err(Error::SingularCell { .. })));
}

#[test]
fn symmetric_kinds_have_zero_first_moment() {
    for spec in [LevyMeasureSpec::fractional(0.7), LevyMeasureSpec::fractional(1.5)] {
        let m = discretize_default(&spec, &grid1(100)).unwrap();
        assert!(m.is_pairwise_symmetric());
        assert_eq!(m.first_moment_sum()[0], 0.0);
        let m2 = discretize_default(&spec, &grid2(16)).unwrap();
        assert!(m2.is_pairwise_symmetric());
        assert_eq!(m2.first_moment_sum(), [0.0, 0.0]);
    }
    let crossed = LevyMeasureSpec::Crossed { sigma1: 0.5, sigma2: 1.2, normalization: Normalization::Plain };
    let m = discretize_default(&crossed, &grid2(16)).unwrap();
    assert!(m.is_pairwise_symmetric());
    assert!(m.atoms.iter().all(|a| a.offset[0] == 0.0 || a.offset[1] == 0.0));
}

#[test]
fn halfspace_atoms_on_one_side() {
    let spec = LevyMeasureSpec::HalfspaceFractional {
        sigma: 0.5,
        axis: 0,
        positive: true,
        normalization: Normalization::Plain,
    };
    let m = discretize_default(&spec, &grid1(32)).unwrap();
    assert!(m.atoms.iter().all(|a| a.offset[0] > 0.0));
    assert!(!m.symmetric);
    assert!(m.near_drift[0] > 0.0);
}

#[test]
fn validation_rejects_bad_specs() {
    assert!(LevyMeasureSpec::fractional(2.0).validate(1).is_err());
    let crossed = LevyMeasureSpec::Crossed { sigma1: 0.5, sigma2: 0.5, normalization: Normalization::Plain };
    assert!(crossed.validate(1).is_err());
    let neg = LevyMeasureSpec::Finite { atoms: vec![([0.1, 0.0], -1.0)], sigma: 1.0 };
    assert!(neg.validate(1).is_err());
}

#[test]
fn moment_tail_ratio_constant_for_sigma_one() {
    let g = grid1(512);
    let m = discretize_default(&LevyMeasureSpec::fractional(1.0), &g).unwrap();
    let rep = check_moment_bounds(&m, 1.0, &[0.0], &[0.1, 0.2, 0.4], None).unwrap();
    let ratios: Vec<f64> = rep.tail.iter().map(|e| e.measured / e.profile).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo <= 1.05, "{ratios:?}");
    assert!(rep.passed());
}

#[test]
fn finite_measure_passes_with_total_mass() {
    let spec = LevyMeasureSpec::Finite { atoms: vec![([0.3, 0.0], 0.7), ([-0.1, 0.0], 0.4)], sigma: 1.0 };
    let m = discretize_default(&spec, &grid1(64)).unwrap();
    let total = m.total_atom_mass();
    for alpha in [0.0, 0.5, 1.5, 2.0] {
        let rep = check_moment_bounds(&m, 1.0, &[alpha], &[0.05, 0.2, 0.5], Some(total)).unwrap();
        assert!(rep.tail.iter().all(|e| e.pass || e.profile < 1.0));
    }
}

#[test]
fn crossed_small_ball_bound() {
    let spec = LevyMeasureSpec::Crossed { sigma1: 0.5, sigma2: 0.5, normalization: Normalization::Plain };
    let m = discretize_default(&spec, &grid2(64)).unwrap();
    let rep = check_moment_bounds(&m, 0.5, &[2.0], &[0.1], None).unwrap();
    let e = rep.small_ball[0];
    // per-axis analytic value 2 · 2 · δ^{1.5} / 1.5
    let analytic = 4.0 * math::powf(0.1, 1.5) / 1.5;
    assert!((e.measured - analytic).abs() < 0.1 * analytic, "{} vs {analytic}", e.measured);
    assert!(e.measured <= rep.fitted_c * math::powf(0.1, 1.5) * (1.0 + 1e-12));
}

#[test]
fn censor_center_is_noop_and_boundary_removes() {
    let g = grid1(256);
    let dom = Domain::ball(&g, [0.5, 0.0], 0.2).unwrap();
    let spec = LevyMeasureSpec::Finite { atoms: vec![([0.05, 0.0], 1.0), ([-0.05, 0.0], 1.0)], sigma: 1.0 };
    let m = discretize_default(&spec, &g).unwrap();
    let center = g.nearest(&[0.5, 0.0]);
    let c = censor(&m, &dom, center).unwrap();
    assert_eq!(c.atoms, m.atoms);

    let spec = LevyMeasureSpec::Finite { atoms: vec![([0.1, 0.0], 1.0), ([-0.01, 0.0], 1.0)], sigma: 1.0 };
    let m = discretize_default(&spec, &g).unwrap();
    // d_Ω ≈ 0.05 near x = 0.65
    let x = g.nearest(&[0.65, 0.0]);
    let c = censor(&m, &dom, x).unwrap();
    assert_eq!(c.atoms.len(), 1);
    assert_eq!(c.atoms[0].offset[0], -0.01);
}

#[test]
fn censor_mass_matches_enumeration() {
    let g = grid1(128);
    let dom = Domain::ball(&g, [0.5, 0.0], 0.3).unwrap();
    let m = discretize_default(&LevyMeasureSpec::fractional(0.8), &g).unwrap();
    for x in (0..g.len()).filter(|i| dom.dist()[*i] > m.r_cut) {
        let c = censor(&m, &dom, x).unwrap();
        let p = g.point(x);
        let removed: f64 = m.atoms.iter().filter(|a| !dom.contains(&[p[0] + a.offset[0], 0.0])).map(|a| a.weight).sum();
        let diff = m.total_atom_mass() - c.total_atom_mass();
        assert!((diff - removed).abs() < 1e-9 * m.total_atom_mass());
    }
}

#[test]
fn censor_rejects_boundary_cell() {
    let g = grid1(64);
    let dom = Domain::ball(&g, [0.5, 0.0], 0.2).unwrap();
    let m = discretize(&LevyMeasureSpec::fractional(1.0), &g, 0.05, 4.0).unwrap();
    let x = g.nearest(&[0.68, 0.0]);
    assert!(matches!(censor(&m, &dom, x), Err(Error::SingularCell { .. })));
    assert!(matches!(censor(&m, &dom, g.nearest(&[0.1, 0.0])), Err(Error::OutsideDomain)));
}

#[test]
fn censor_whole_torus_is_identity() {
    let g = grid1(64);
    let m = discretize_default(&LevyMeasureSpec::fractional(1.3), &g).unwrap();
    let c = censor(&m, &Domain::whole(&g), 5).unwrap();
    assert_eq!(c, m);
}

#[test]
fn push_forward_identity_and_dilation() {
    let g = grid1(256);
    let sigma = 0.8;
    let m = discretize_default(&LevyMeasureSpec::fractional(sigma), &g).unwrap();
    assert_eq!(push_forward(&m, &JumpFunction::identity(&g), 3), m);

    let j2 = JumpFunction::dilation(&g, 2.0).unwrap();
    let p = push_forward(&m, &j2, 3);
    let delta = 0.2;
    let pushed = check_moment_bounds(&p, sigma, &[0.0], &[delta], None).unwrap().tail[0].measured;
    let analytic = 2.0 * math::powf(delta, -sigma) / sigma;
    let expected = math::powf(2.0, sigma) * analytic;
    assert!((pushed - expected).abs() < 0.02 * expected, "{pushed} vs {expected}");
    assert!((p.near_second_moment - 4.0 * m.near_second_moment).abs() < 1e-12);
}

#[test]
fn push_forward_zero_scaling_drops_everything() {
    let g = grid1(64);
    let m = discretize_default(&LevyMeasureSpec::fractional(1.0), &g).unwrap();
    let j0 = JumpFunction::scaled(GridField::constant(g, 0.0)).unwrap();
    let p = push_forward(&m, &j0, 0);
    assert!(p.atoms.is_empty());
    assert_eq!(p.near_second_moment, 0.0);
    assert_eq!(p.far_mass, 0.0);
}

#[test]
fn covering_examples() {
    let g1 = grid1(64);
    let id1 = JumpFunction::identity(&g1);
    let r = covering_check(&LevyMeasureSpec::fractional(1.0), &id1, &g1, 10, 7).unwrap();
    assert_eq!(r.n_star, Some(1));

    let g2 = grid2(32);
    let id2 = JumpFunction::identity(&g2);
    let crossed = LevyMeasureSpec::Crossed { sigma1: 1.0, sigma2: 1.0, normalization: Normalization::Plain };
    let r = covering_check(&crossed, &id2, &g2, 10, 7).unwrap();
    assert_eq!(r.n_star, Some(2));

    let orbit = LevyMeasureSpec::Finite { atoms: vec![([0.5, 0.0], 1.0), ([-0.5, 0.0], 1.0)], sigma: 1.0 };
    let r = covering_check(&orbit, &id1, &g1, 50, 7).unwrap();
    assert_eq!(r.n_star, None);
    assert!(!r.grid_resolution_limited);
    assert_eq!(*r.history.last().unwrap(), 2);
}

#[test]
fn covering_flags_unaligned_failure() {
    let g = grid2(16);
    let alpha = math::sqrt(2.0);
    let atoms: Vec<(Point, f64)> = (1..4).map(|k| ([0.01 * k as f64, 0.01 * alpha * k as f64], 1.0)).collect();
    let spec = LevyMeasureSpec::Finite { atoms, sigma: 1.0 };
    let r = covering_check(&spec, &JumpFunction::identity(&g), &g, 3, 1).unwrap();
    assert!(r.n_star.is_none());
    assert!(r.grid_resolution_limited);
}

#[test]
fn covering_samples_large_grids_with_x_dependent_jump() {
    let g = grid1(128);
    let field = GridField::from_fn(g, |p| 1.0 + 0.5 * math::cos(2.0 * math::PI * p[0])).unwrap();
    let j = JumpFunction::scaled(field).unwrap();
    let r = covering_check(&LevyMeasureSpec::fractional(1.0), &j, &g, 10, 3).unwrap();
    assert_eq!(r.tested_points, 17);
    assert!(r.covered());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn censoring_never_adds_mass(sigma in 0.2f64..1.9, cx in 0.0f64..1.0, rad in 0.1f64..0.45, n in 16usize..80) {
        prop_assume!(PeriodicGrid::new(1, n).is_ok());
        let g = grid1(n);
        let m = discretize_default(&LevyMeasureSpec::fractional(sigma), &g).unwrap();
        let dom = Domain::ball(&g, [cx, 0.0], rad).unwrap();
        for x in 0..g.len() {
            if let Ok(c) = censor(&m, &dom, x) {
                prop_assert!(c.total_atom_mass() <= m.total_atom_mass());
                prop_assert!(c.far_mass <= m.far_mass);
            }
        }
    }

    #[test]
    fn fitted_constant_ignores_atom_order(seed in 0u64..1000, k in 2usize..12) {
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let atoms: Vec<(Point, f64)> =
            (0..k).map(|_| ([rng.gen_range(-0.5..0.5), 0.0], rng.gen_range(0.0..2.0))).collect();
        let mut shuffled = atoms.clone();
        shuffled.shuffle(&mut rng);
        let g = grid1(32);
        let a = discretize_default(&LevyMeasureSpec::Finite { atoms, sigma: 1.0 }, &g).unwrap();
        let b = discretize_default(&LevyMeasureSpec::Finite { atoms: shuffled, sigma: 1.0 }, &g).unwrap();
        let alphas = [0.0, 1.0, 2.0];
        let deltas = [0.01, 0.1, 0.3];
        let ra = check_moment_bounds(&a, 1.0, &alphas, &deltas, None).unwrap();
        let rb = check_moment_bounds(&b, 1.0, &alphas, &deltas, None).unwrap();
        prop_assert_eq!(ra.fitted_c, rb.fitted_c);
    }

    #[test]
    fn covering_monotone_in_support(seed in 0u64..500, k in 1usize..5) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = grid1(32);
        let h = g.h();
        let small: Vec<(Point, f64)> =
            (0..k).map(|_| ([rng.gen_range(-15i64..16) as f64 * h, 0.0], 1.0)).collect();
        let mut big = small.clone();
        big.push(([rng.gen_range(-15i64..16) as f64 * h, 0.0], 1.0));
        let id = JumpFunction::identity(&g);
        let a = covering_check(&LevyMeasureSpec::Finite { atoms: small, sigma: 1.0 }, &id, &g, 40, 0).unwrap();
        let b = covering_check(&LevyMeasureSpec::Finite { atoms: big, sigma: 1.0 }, &id, &g, 40, 0).unwrap();
        if let Some(na) = a.n_star {
            prop_assert!(b.n_star.is_some_and(|nb| nb <= na));
        }
    }
}
