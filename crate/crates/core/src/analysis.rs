//! Modulus of continuity, log-log Hölder fits and oscillation accounting.

use alloc::vec::Vec;

use crate::ergodic::ErgodicResult;
use crate::error::{invalid, Result};
use crate::grid::{Domain, GridField, PeriodicGrid};
use crate::math;

/// Geometric radii `h·round(2^{k/4})` from `2h` up to `0.5`, deduplicated.
pub fn log_radii(grid: &PeriodicGrid) -> Vec<f64> {
    let h = grid.h();
    let max_k = grid.n() / 2;
    let mut ks: Vec<usize> = Vec::new();
    let mut e = 4.0;
    loop {
        let k = math::round(math::powf(2.0, e / 4.0)) as usize;
        if k > max_k {
            break;
        }
        if ks.last() != Some(&k) {
            ks.push(k);
        }
        e += 1.0;
    }
    ks.into_iter().map(|k| k as f64 * h).collect()
}

/// `ω(r) = max |u(x) - u(y)|` over grid pairs at periodic distance `≤ r`.
/// Exhaustive in 1D; in 2D over axis and diagonal offsets.
pub fn modulus_of_continuity(field: &GridField, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("radii", "must be increasing"));
    }
    let grid = field.grid();
    let h = grid.h();
    let n = grid.n() as i64;
    let u = field.values();
    let r_max = radii.last().copied().unwrap_or(0.0);
    // (distance, max difference) per offset
    let mut per_offset: Vec<(f64, f64)> = Vec::new();
    let dirs: &[[i64; 2]] = if grid.dim() == 1 { &[[1, 0]] } else { &[[1, 0], [0, 1], [1, 1], [1, -1]] };
    for dir in dirs {
        let len = math::sqrt((dir[0] * dir[0] + dir[1] * dir[1]) as f64) * h;
        let mut d = 1i64;
        while d <= n / 2 && d as f64 * len <= r_max * (1.0 + 1e-12) {
            let shift = [dir[0] * d, dir[1] * d];
            let mut best: f64 = 0.0;
            for i in 0..grid.len() {
                best = best.max((u[grid.shift(i, shift)] - u[i]).abs());
            }
            per_offset.push((d as f64 * len, best));
            d += 1;
        }
    }
    per_offset.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(radii.len());
    let mut j = 0;
    let mut running: f64 = 0.0;
    for &r in radii {
        while j < per_offset.len() && per_offset[j].0 <= r * (1.0 + 1e-12) {
            running = running.max(per_offset[j].1);
            j += 1;
        }
        out.push((r, running));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub gamma_est: f64,
    pub seminorm_est: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least squares of `ln ω` against `ln r` over `range = (r_lo, r_hi)`.
pub fn holder_fit(table: &[(f64, f64)], range: (f64, f64)) -> Result<HolderFit> {
    let pts: Vec<(f64, f64)> =
        table.iter().filter(|(r, _)| *r >= range.0 * (1.0 - 1e-12) && *r <= range.1 * (1.0 + 1e-12)).copied().collect();
    if pts.len() < 4 {
        return Err(invalid("range", "need at least 4 points in the fit range"));
    }
    if pts.iter().any(|(r, w)| !(*w > 0.0) || !(*r > 0.0)) {
        return Err(invalid("omega", "fit range contains a zero value"));
    }
    let xs: Vec<f64> = pts.iter().map(|(r, _)| math::ln(*r)).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, w)| math::ln(*w)).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(HolderFit { gamma_est: slope, seminorm_est: math::exp(intercept), r2, points: pts.len() })
}

/// Default fit window `[4h, 1/8]`.
pub fn default_fit_range(grid: &PeriodicGrid) -> (f64, f64) {
    (4.0 * grid.h(), 0.125)
}

/// `sup u - inf u` over the domain (whole torus when `None`).
pub fn oscillation(field: &GridField, domain: Option<&Domain>) -> f64 {
    let vals = field.values();
    let (mx, mn) = match domain {
        None => (field.max(), field.min()),
        Some(d) => vals
            .iter()
            .zip(d.inside())
            .filter(|(_, b)| **b)
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), (v, _)| (a.max(*v), b.min(*v))),
    };
    if mx < mn {
        0.0
    } else {
        mx - mn
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    /// `osc(u_λ - u_λ(x_ref))` per λ.
    pub osc: Vec<f64>,
    /// `max / min` of `osc`, 1 when all vanish.
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// λ-uniformity of the corrector oscillation.
pub fn oscillation_stability(result: &ErgodicResult, threshold: f64) -> OscillationReport {
    let osc: Vec<f64> = (0..result.fields.len()).map(|i| oscillation(&result.corrector(i), None)).collect();
    let mx = osc.iter().cloned().fold(0.0, f64::max);
    let mn = osc.iter().cloned().fold(f64::INFINITY, f64::min);
    let ratio = if mx == 0.0 {
        1.0
    } else if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    };
    OscillationReport { osc, ratio, threshold, pass: ratio <= threshold }
}

/// Per-λ Hölder fits of the correctors plus the seminorm spread
/// `max_i |s_i - mean s| / mean s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub fits: Vec<HolderFit>,
    pub tables: Vec<Vec<(f64, f64)>>,
    pub seminorm_spread: f64,
}

pub fn regularity_sweep(result: &ErgodicResult, range: (f64, f64)) -> Result<RegularityReport> {
    let mut fits = Vec::new();
    let mut tables = Vec::new();
    for i in 0..result.fields.len() {
        let w = result.corrector(i);
        let table = modulus_of_continuity(&w, &log_radii(w.grid()))?;
        fits.push(holder_fit(&table, range)?);
        tables.push(table);
    }
    let mean = fits.iter().map(|f| f.seminorm_est).sum::<f64>() / fits.len().max(1) as f64;
    let spread = fits.iter().map(|f| (f.seminorm_est - mean).abs() / mean).fold(0.0, f64::max);
    Ok(RegularityReport { fits, tables, seminorm_spread: spread })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn sawtooth(grid: &PeriodicGrid, slope: f64) -> GridField {
        GridField::from_fn(*grid, |p| slope * (0.5 - (p[0] - 0.5).abs())).unwrap()
    }

    #[test]
    fn constant_has_zero_modulus() {
        let g = grid1(64);
        let t = modulus_of_continuity(&GridField::constant(g, 2.0), &log_radii(&g)).unwrap();
        assert!(t.iter().all(|(_, w)| *w == 0.0));
        let g2 = PeriodicGrid::new(2, 16).unwrap();
        let t = modulus_of_continuity(&GridField::constant(g2, 2.0), &[0.1, 0.2]).unwrap();
        assert!(t.iter().all(|(_, w)| *w == 0.0));
    }

    #[test]
    fn lipschitz_sawtooth_bound() {
        let g = grid1(256);
        let l = 3.0;
        let u = sawtooth(&g, l);
        for (r, w) in modulus_of_continuity(&u, &log_radii(&g)).unwrap() {
            assert!(w <= l * r + 2.0 * l * g.h());
        }
    }

    #[test]
    fn power_profile_exponent() {
        let g = grid1(512);
        let u = GridField::from_fn(g, |p| math::powf((p[0] - 0.5).abs(), 0.75)).unwrap();
        let radii: Vec<f64> = (8..=51).map(|k| k as f64 * g.h()).collect();
        for (r, w) in modulus_of_continuity(&u, &radii).unwrap() {
            let q = w / math::powf(r, 0.75);
            assert!((0.9..=1.1).contains(&q), "r {r}: {q}");
        }
    }

    #[test]
    fn fit_exact_power_data() {
        let table: Vec<(f64, f64)> = (1..20)
            .map(|k| {
                let r = 0.01 * k as f64;
                (r, 3.0 * math::powf(r, 0.6))
            })
            .collect();
        let f = holder_fit(&table, (0.0, 1.0)).unwrap();
        assert!((f.gamma_est - 0.6).abs() < 1e-10);
        assert!((f.seminorm_est - 3.0).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        let lin: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, k as f64)).collect();
        assert!((holder_fit(&lin, (1.0, 9.0)).unwrap().gamma_est - 1.0).abs() < 1e-12);
        assert!(holder_fit(&[(0.1, 0.0), (0.2, 1.0), (0.3, 1.0), (0.4, 1.0)], (0.0, 1.0)).is_err());
        assert!(holder_fit(&lin[..3], (0.0, 10.0)).is_err());
    }

    #[test]
    fn oscillation_examples() {
        let g = grid1(64);
        let u = GridField::from_fn(g, |p| math::cos(2.0 * math::PI * p[0])).unwrap();
        // cell centers miss the exact extrema by half a cell
        assert!((oscillation(&u, None) - 2.0).abs() < 5e-3);
        assert_eq!(oscillation(&GridField::constant(g, 5.0), None), 0.0);
        let big = Domain::ball(&g, [0.3, 0.0], 0.3).unwrap();
        let small = Domain::ball(&g, [0.3, 0.0], 0.15).unwrap();
        assert!(oscillation(&u, Some(&small)) <= oscillation(&u, Some(&big)));
    }

    proptest! {
        #[test]
        fn omega_monotone_and_osc_invariant(seed in 0u64..500, c in -5.0f64..5.0, s in -20i64..20) {
            use rand::{Rng, SeedableRng};
            let g = grid1(64);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let u = GridField::new(g, (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let t = modulus_of_continuity(&u, &log_radii(&g)).unwrap();
            for w in t.windows(2) {
                prop_assert!(w[1].1 >= w[0].1);
            }
            prop_assert_eq!(oscillation(&u.shifted([s, 0]), None), oscillation(&u, None));
            let shifted = u.offset(c);
            prop_assert!((oscillation(&shifted, None) - oscillation(&u, None)).abs() < 1e-12);
        }
    }
}
