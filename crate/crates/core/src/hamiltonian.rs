//! Coercive Hamiltonians `H(x,p) = b(x)|p|^m + a1(x)|p|^l + ⟨a2(x), p⟩ - f(x)`,
//! the Osher–Sethian upwind flux and sampled structure checks.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridField, PeriodicGrid, Point, MAX_DIM};
use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    b: GridField,
    m: f64,
    lower: Option<(GridField, f64)>,
    drift: Option<Vec<GridField>>,
    f: GridField,
    theta: f64,
    blowup: f64,
}

impl HamiltonianSpec {
    pub fn new(b: GridField, m: f64, f: GridField) -> Result<Self> {
        if b.grid() != f.grid() {
            return Err(invalid("f", "grid differs from b"));
        }
        if !(m > 0.0) || !m.is_finite() {
            return Err(invalid("m", "exponent must be positive"));
        }
        if !(b.min() > 0.0) {
            return Err(invalid("b", "b0 = min b must be positive"));
        }
        Ok(Self { b, m, lower: None, drift: None, f, theta: 0.0, blowup: 0.0 })
    }

    /// `|p|^m - f` with `b ≡ 1`.
    pub fn power(m: f64, f: GridField) -> Result<Self> {
        Self::new(GridField::constant(*f.grid(), 1.0), m, f)
    }

    /// Adds `a1(x)|p|^l` with `0 < l < m`.
    pub fn with_lower_order(mut self, a1: GridField, l: f64) -> Result<Self> {
        if a1.grid() != self.b.grid() {
            return Err(invalid("a1", "grid differs from b"));
        }
        if !(l > 0.0 && l < self.m) {
            return Err(invalid("l", "lower-order exponent must lie in (0, m)"));
        }
        self.lower = Some((a1, l));
        Ok(self)
    }

    /// Adds the drift `⟨a2(x), p⟩`, one field per axis; requires `m > 1`.
    pub fn with_drift(mut self, a2: Vec<GridField>) -> Result<Self> {
        if !(self.m > 1.0) {
            return Err(invalid("a2", "drift term requires m > 1"));
        }
        if a2.len() != self.grid().dim() || a2.iter().any(|g| g.grid() != self.b.grid()) {
            return Err(invalid("a2", "one field per axis on the Hamiltonian grid is required"));
        }
        self.drift = Some(a2);
        Ok(self)
    }

    /// Boundary blow-up data `A (d^{-θ} + 1)` of the growth condition.
    pub fn with_blowup(mut self, theta: f64, a: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta < self.m) {
            return Err(invalid("theta", "must lie in [0, m)"));
        }
        if !(a >= 0.0) || !a.is_finite() {
            return Err(invalid("A", "blow-up amplitude must be finite and >= 0"));
        }
        self.theta = theta;
        self.blowup = a;
        Ok(self)
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.b.grid()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn blowup(&self) -> f64 {
        self.blowup
    }

    pub fn b(&self) -> &GridField {
        &self.b
    }

    pub fn f(&self) -> &GridField {
        &self.f
    }

    pub fn lower_order(&self) -> Option<(&GridField, f64)> {
        self.lower.as_ref().map(|(a, l)| (a, *l))
    }

    pub fn drift(&self) -> Option<&[GridField]> {
        self.drift.as_deref()
    }

    /// `b0 = min b`.
    pub fn b0(&self) -> f64 {
        self.b.min()
    }

    /// `H0 = sup |H(·, 0)| = sup |f|`.
    pub fn h0(&self) -> f64 {
        self.f.sup_norm()
    }

    /// Replaces `f`, keeping the other coefficients.
    pub fn with_f(&self, f: GridField) -> Result<Self> {
        if f.grid() != self.b.grid() {
            return Err(invalid("f", "grid differs from b"));
        }
        let mut out = self.clone();
        out.f = f;
        Ok(out)
    }

    #[inline]
    fn coercive_part(&self, idx: usize, s2: f64) -> f64 {
        let mut v = self.b.get(idx) * math::powf(s2, 0.5 * self.m);
        if let Some((a1, l)) = &self.lower {
            v += a1.get(idx) * math::powf(s2, 0.5 * l);
        }
        v
    }

    /// `H(x, p)` at grid point `idx`.
    pub fn eval_h(&self, idx: usize, p: &Point) -> f64 {
        let dim = self.grid().dim();
        let mut s2 = 0.0;
        for k in 0..dim {
            s2 += p[k] * p[k];
        }
        let mut v = self.coercive_part(idx, s2);
        if let Some(a2) = &self.drift {
            for k in 0..dim {
                v += a2[k].get(idx) * p[k];
            }
        }
        v - self.f.get(idx)
    }

    /// Monotone upwind flux: nondecreasing in each `p_minus_k`, nonincreasing
    /// in each `p_plus_k`, and equal to `eval_h` when `p_minus = p_plus`.
    #[inline]
    pub fn numerical_h(&self, idx: usize, p_minus: &Point, p_plus: &Point) -> f64 {
        let dim = self.grid().dim();
        let mut s2 = 0.0;
        for k in 0..dim {
            let a = p_minus[k].max(0.0);
            let b = p_plus[k].min(0.0);
            s2 += a * a + b * b;
        }
        let mut v = self.coercive_part(idx, s2);
        if let Some(a2) = &self.drift {
            for k in 0..dim {
                let c = a2[k].get(idx);
                v += if c > 0.0 { c * p_minus[k] } else { c * p_plus[k] };
            }
        }
        v - self.f.get(idx)
    }

    /// Bound on `Σ_k |∂H_num/∂p_minus_k| + |∂H_num/∂p_plus_k|` when every
    /// one-sided slope is at most `max_slope` in magnitude.
    pub fn lipschitz_bound(&self, max_slope: f64) -> Result<f64> {
        let dim = self.grid().dim() as f64;
        let root = math::sqrt(2.0 * dim);
        let s = root * max_slope;
        if self.m < 1.0 {
            return Err(invalid("m", "explicit upwind flux needs m >= 1 to be Lipschitz"));
        }
        let pow_or_one = |e: f64| if e == 0.0 { 1.0 } else { math::powf(s, e) };
        let mut l = self.b.max() * self.m * pow_or_one(self.m - 1.0);
        if let Some((a1, lo)) = &self.lower {
            if a1.sup_norm() > 0.0 {
                if *lo < 1.0 {
                    return Err(invalid("l", "explicit upwind flux needs l >= 1 when a1 is nonzero"));
                }
                l += a1.sup_norm() * lo * pow_or_one(lo - 1.0);
            }
        }
        let mut out = l * root;
        if let Some(a2) = &self.drift {
            out += a2.iter().map(|g| g.sup_norm()).sum::<f64>();
        }
        if !out.is_finite() {
            return Err(Error::NonFinite("Hamiltonian Lipschitz bound"));
        }
        Ok(out)
    }

    /// Sampled (H1)/(H2) and growth checks.
    pub fn check_structure(&self, samples: usize, seed: u64) -> StructureReport {
        let grid = *self.grid();
        let dim = grid.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b0 = self.b0();
        let m = self.m;
        let analytic_a = self.lower.is_none() && self.drift.is_none();
        let rand_p = |rng: &mut ChaCha8Rng, scale: f64| {
            let mut p = [0.0; MAX_DIM];
            for v in p.iter_mut().take(dim) {
                *v = rng.gen_range(-scale..scale);
            }
            p
        };
        let norm = |p: &Point| {
            let mut s = 0.0;
            for v in p.iter().take(dim) {
                s += v * v;
            }
            math::sqrt(s)
        };

        // (H2): collect (lhs/(1-μ) - b0(1-m)|p|^m); A_fit is its max
        let mut h2 = Vec::with_capacity(samples);
        for i in 0..samples {
            let idx = rng.gen_range(0..grid.len());
            let p = rand_p(&mut rng, 4.0);
            let mu = if i == 0 { 1.0 } else { rng.gen_range(1e-3..1.0) };
            let mut q = p;
            for v in q.iter_mut().take(dim) {
                *v /= mu;
            }
            let lhs = self.eval_h(idx, &p) - mu * self.eval_h(idx, &q);
            let pm = math::powf(norm(&p), m);
            h2.push((lhs, 1.0 - mu, b0 * (1.0 - m) * pm, pm));
        }
        let a_fit = if analytic_a {
            self.h0()
        } else {
            h2.iter().filter(|(_, w, _, _)| *w > 0.0).map(|(lhs, w, c, _)| lhs / w - c).fold(0.0, f64::max)
        };
        let mut worst = f64::NEG_INFINITY;
        let mut violations = 0;
        for (lhs, w, c, pm) in &h2 {
            let margin = lhs - w * (c + a_fit);
            let scale = 1.0 + lhs.abs() + w * (c.abs() + a_fit + pm);
            if margin > 1e-12 * scale {
                violations += 1;
            }
            worst = worst.max(margin);
        }

        // (H1) with q = 0: ζ1 slope
        let mut zeta1: f64 = 0.0;
        for i in 0..samples {
            let x = rng.gen_range(0..grid.len());
            let mut shift = [0i64; MAX_DIM];
            shift[rng.gen_range(0..dim)] = rng.gen_range(1..=4) * if rng.gen_bool(0.5) { 1 } else { -1 };
            let y = grid.shift(x, shift);
            let p = if i % 2 == 0 { [0.0; MAX_DIM] } else { rand_p(&mut rng, 2.0) };
            let dist = grid.distance(&grid.point(x), &grid.point(y));
            let diff = self.eval_h(y, &p) - self.eval_h(x, &p);
            zeta1 = zeta1.max(diff / (dist * (1.0 + math::powf(norm(&p), m))));
        }
        // (H1) with x = y, |q| <= |p|/2: ζ2 slope
        let mut zeta2: f64 = 0.0;
        for _ in 0..samples {
            let x = rng.gen_range(0..grid.len());
            let p = rand_p(&mut rng, 4.0);
            let np = norm(&p);
            if np < 1e-6 {
                continue;
            }
            let mut q = rand_p(&mut rng, 1.0);
            let nq = norm(&q);
            if nq == 0.0 {
                continue;
            }
            let r = rng.gen_range(0.0..0.5) * np / nq;
            let mut pq = p;
            for k in 0..dim {
                q[k] *= r;
                pq[k] += q[k];
            }
            let diff = self.eval_h(x, &pq) - self.eval_h(x, &p);
            zeta2 = zeta2.max(diff / (norm(&q) * math::powf(np, m - 1.0)));
        }

        // growth: H(x,p) >= b0|p|^m - A(d^{-θ}+1) - sup|f| with d = 1 (torus)
        let a = self.blowup;
        let mut growth_worst = f64::NEG_INFINITY;
        for _ in 0..samples {
            let x = rng.gen_range(0..grid.len());
            let p = rand_p(&mut rng, 4.0);
            let lower = b0 * math::powf(norm(&p), m) - 2.0 * a - self.h0() - self.lower_slack(&p);
            growth_worst = growth_worst.max(lower - self.eval_h(x, &p));
        }

        StructureReport {
            samples,
            h2_a_fit: a_fit,
            h2_a_analytic: analytic_a,
            h2_worst_margin: worst,
            h2_violations: violations,
            zeta1,
            zeta2,
            growth_worst_margin: growth_worst,
        }
    }

    /// `sup_x |a1(x)| |p|^l + |a2(x)||p|`, the lower-order slack in the growth bound.
    fn lower_slack(&self, p: &Point) -> f64 {
        let dim = self.grid().dim();
        let mut s2 = 0.0;
        for v in p.iter().take(dim) {
            s2 += v * v;
        }
        let mut s = 0.0;
        if let Some((a1, l)) = &self.lower {
            s += a1.sup_norm() * math::powf(s2, 0.5 * l);
        }
        if let Some(a2) = &self.drift {
            s += a2.iter().map(|g| g.sup_norm()).sum::<f64>() * math::sqrt(s2);
        }
        s
    }

    /// Random one-sided perturbations of the upwind flux; counts sign violations.
    pub fn check_monotonicity(&self, samples: usize, seed: u64) -> MonotonicityReport {
        let grid = *self.grid();
        let dim = grid.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = 0;
        for _ in 0..samples {
            let idx = rng.gen_range(0..grid.len());
            let mut pm = [0.0; MAX_DIM];
            let mut pp = [0.0; MAX_DIM];
            for k in 0..dim {
                pm[k] = rng.gen_range(-3.0..3.0);
                pp[k] = rng.gen_range(-3.0..3.0);
            }
            let eps = rng.gen_range(1e-9..1.0);
            let k = rng.gen_range(0..dim);
            let base = self.numerical_h(idx, &pm, &pp);
            let mut pm2 = pm;
            pm2[k] += eps;
            let mut pp2 = pp;
            pp2[k] += eps;
            if self.numerical_h(idx, &pm2, &pp) < base {
                violations += 1;
            }
            if self.numerical_h(idx, &pm, &pp2) > base {
                violations += 1;
            }
        }
        MonotonicityReport { samples, violations }
    }
}

/// Fitted constants and margins of the sampled structure checks.
///
/// `zeta1` is fitted with `q = 0` over nearby grid pairs, `zeta2` with `x = y`
/// and `|q| ≤ |p|/2`; both are the largest observed ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub samples: usize,
    /// `A` used in (H2): `sup |f|` when the lower-order terms vanish,
    /// otherwise the smallest value covering the samples.
    pub h2_a_fit: f64,
    pub h2_a_analytic: bool,
    /// Largest `lhs - rhs` over the samples.
    pub h2_worst_margin: f64,
    pub h2_violations: usize,
    pub zeta1: f64,
    pub zeta2: f64,
    /// Largest violation of the growth lower bound (≤ 0 means it held).
    pub growth_worst_margin: f64,
}

impl StructureReport {
    pub fn h2_passed(&self) -> bool {
        self.h2_violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub samples: usize,
    pub violations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid1(n: usize) -> PeriodicGrid {
        PeriodicGrid::new(1, n).unwrap()
    }

    fn quad(g: PeriodicGrid) -> HamiltonianSpec {
        HamiltonianSpec::power(2.0, GridField::constant(g, 0.0)).unwrap()
    }

    #[test]
    fn eval_examples() {
        let g = PeriodicGrid::new(2, 8).unwrap();
        let h = quad(g);
        assert!((h.eval_h(0, &[0.3, 0.4]) - 0.25).abs() < 1e-15);
        let f = GridField::from_fn(g, |p| p[0] + 2.0).unwrap();
        let h = HamiltonianSpec::power(2.0, f.clone()).unwrap();
        assert_eq!(h.eval_h(5, &[0.0, 0.0]), -f.get(5));

        let g1 = grid1(8);
        let h = HamiltonianSpec::power(3.0, GridField::constant(g1, 0.0))
            .unwrap()
            .with_lower_order(GridField::constant(g1, 1.0), 1.0)
            .unwrap();
        assert_eq!(h.eval_h(0, &[2.0, 0.0]), 10.0);
    }

    #[test]
    fn upwind_examples() {
        let h = quad(grid1(8));
        assert_eq!(h.numerical_h(0, &[1.0, 0.0], &[-1.0, 0.0]), 2.0);
        assert_eq!(h.numerical_h(0, &[-1.0, 0.0], &[1.0, 0.0]), 0.0);
    }

    #[test]
    fn validation() {
        let g = grid1(8);
        let zero = GridField::constant(g, 0.0);
        assert!(HamiltonianSpec::new(zero.clone(), 2.0, zero.clone()).is_err());
        let h = HamiltonianSpec::power(2.0, zero.clone()).unwrap();
        assert!(h.clone().with_lower_order(zero.clone(), 2.5).is_err());
        assert!(h.clone().with_blowup(2.0, 1.0).is_err());
        let lin = HamiltonianSpec::power(1.0, zero.clone()).unwrap();
        assert!(lin.with_drift(vec![zero]).is_err());
    }

    #[test]
    fn h2_holds_for_power_hamiltonians() {
        let g = grid1(64);
        for m in [2.0, 3.0] {
            let b = GridField::from_fn(g, |p| 1.5 + 0.5 * math::cos(2.0 * math::PI * p[0])).unwrap();
            let f = GridField::from_fn(g, |p| math::sin(2.0 * math::PI * p[0])).unwrap();
            let h = HamiltonianSpec::new(b, m, f).unwrap();
            let r = h.check_structure(10_000, 11);
            assert!(r.h2_a_analytic);
            assert!(r.h2_passed(), "{r:?}");
            assert!(r.h2_worst_margin <= 1e-12);
            assert!(r.growth_worst_margin <= 0.0);
        }
    }

    #[test]
    fn h2_mu_one_margin_is_zero() {
        // the first (H2) sample uses μ = 1, for which both sides vanish
        let g = grid1(16);
        let h = quad(g);
        let r = h.check_structure(1, 3);
        assert_eq!(r.h2_worst_margin, 0.0);
    }

    #[test]
    fn zeta1_recovers_lipschitz_constant() {
        let g = grid1(1024);
        let f = GridField::from_fn(g, |p| 5.0 / (2.0 * math::PI) * math::sin(2.0 * math::PI * p[0])).unwrap();
        let h = HamiltonianSpec::power(2.0, f).unwrap();
        let r = h.check_structure(20_000, 5);
        assert!(r.zeta1 <= 5.0 + 1e-9 && r.zeta1 >= 5.0 - 1e-3, "{}", r.zeta1);
    }

    #[test]
    fn monotonicity_has_no_violations() {
        let g = PeriodicGrid::new(2, 8).unwrap();
        let f = GridField::constant(g, 1.0);
        let a2 = vec![GridField::from_fn(g, |p| p[0] - 0.5).unwrap(), GridField::from_fn(g, |p| 0.3 - p[1]).unwrap()];
        let h = HamiltonianSpec::power(2.5, f)
            .unwrap()
            .with_lower_order(GridField::constant(g, 0.7), 1.5)
            .unwrap()
            .with_drift(a2)
            .unwrap();
        assert_eq!(h.check_monotonicity(10_000, 9).violations, 0);
        assert!(!h.check_structure(2000, 1).h2_a_analytic);
    }

    #[test]
    fn lipschitz_bound_rejects_sublinear_lower_order() {
        let g = grid1(8);
        let h = quad(g).with_lower_order(GridField::constant(g, 1.0), 0.5).unwrap();
        assert!(h.lipschitz_bound(1.0).is_err());
        assert!(quad(g).lipschitz_bound(1.0).unwrap() > 0.0);
    }

    proptest! {
        #[test]
        fn upwind_is_consistent(p0 in -5.0f64..5.0, p1 in -5.0f64..5.0, m in 1.0f64..4.0, idx in 0usize..64) {
            let g = PeriodicGrid::new(2, 8).unwrap();
            let f = GridField::from_fn(g, |p| p[0] * p[1]).unwrap();
            let a2 = vec![GridField::constant(g, 0.4), GridField::constant(g, -1.1)];
            let mut h = HamiltonianSpec::power(m, f).unwrap();
            if m > 1.0 {
                h = h.with_drift(a2).unwrap();
            }
            let p = [p0, p1];
            prop_assert_eq!(h.numerical_h(idx, &p, &p), h.eval_h(idx, &p));
        }

        #[test]
        fn upwind_lipschitz_bound_holds(pm in -2.0f64..2.0, pp in -2.0f64..2.0, eps in 1e-6f64..0.1) {
            let g = grid1(8);
            let h = HamiltonianSpec::power(3.0, GridField::constant(g, 0.0)).unwrap();
            let l = h.lipschitz_bound(2.1).unwrap();
            let base = h.numerical_h(0, &[pm, 0.0], &[pp, 0.0]);
            let d1 = (h.numerical_h(0, &[pm + eps, 0.0], &[pp, 0.0]) - base).abs() / eps;
            let d2 = (h.numerical_h(0, &[pm, 0.0], &[pp - eps, 0.0]) - base).abs() / eps;
            prop_assert!(d1 + d2 <= l);
        }
    }
}
