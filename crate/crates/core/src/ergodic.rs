//! Ergodic constant and corrector by vanishing discount, the long-time slope
//! of the evolution, and the large-time gap `u - ct - w`.
//!
//! Conventions: the discounted solutions satisfy `λu_λ - I[u_λ] + H = 0` and
//! `λu_λ(x_ref) → c`, so the corrector solves `-I[w] + H(x, Dw) = -c`. Then
//! `w + ct` solves `u_t - I[u] + H = 0`, and the evolution grows with slope
//! [`evolution_slope`]`(c) = c`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::GridField;
use crate::hamiltonian::HamiltonianSpec;
use crate::nonlocal::NonlocalOperator;
use crate::solver::{evolution_rhs, evolve, solve_discounted, EvolutionConfig, StationaryConfig, Trajectory};

/// Default discount sequence.
pub const DEFAULT_LAMBDAS: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.00625];

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicResult {
    pub lambda_seq: Vec<f64>,
    pub x_ref: usize,
    /// `λ u_λ(x_ref)` per λ.
    pub c_estimates: Vec<f64>,
    /// `λ mean(u_λ)` per λ.
    pub c_mean_diag: Vec<f64>,
    /// `λ max(u_λ)` per λ.
    pub c_max_diag: Vec<f64>,
    /// `osc(u_λ)` per λ.
    pub osc_w: Vec<f64>,
    /// `sup |-I[w_λ] + H(x, Dw_λ) + λu_λ(x_ref)|` per λ.
    pub residuals: Vec<f64>,
    /// Final estimate (last entry of `c_estimates`).
    pub c: f64,
    /// `u_λmin - u_λmin(x_ref)`.
    pub w: GridField,
    /// Discounted solutions `u_λ`, one per λ.
    pub fields: Vec<GridField>,
}

impl ErgodicResult {
    /// `c_estimates[i+1] - c_estimates[i]`.
    pub fn successive_differences(&self) -> Vec<f64> {
        self.c_estimates.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Corrector at λ index `i`: `u_λ - u_λ(x_ref)`.
    pub fn corrector(&self, i: usize) -> GridField {
        let u = &self.fields[i];
        u.offset(-u.get(self.x_ref))
    }
}

/// The slope of `t ↦ u(x, t)` implied by the ergodic constant `c`.
pub fn evolution_slope(c: f64) -> f64 {
    c
}

/// `sup |-I[w] + H_num(w) + c|`.
pub fn ergodic_residual(c: f64, w: &GridField, ham: &HamiltonianSpec, op: &dyn NonlocalOperator) -> f64 {
    evolution_rhs(ham, op, w).iter().map(|r| (c - r).abs()).fold(0.0, f64::max)
}

/// Solves the discounted problem along `lambda_seq`, warm-starting each solve
/// from the previous one.
pub fn vanishing_discount(
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    lambda_seq: &[f64],
    cfg: &StationaryConfig,
    x_ref: usize,
) -> Result<ErgodicResult> {
    if lambda_seq.is_empty() {
        return Err(invalid("lambda_seq", "must not be empty"));
    }
    if lambda_seq.iter().any(|l| !(*l > 0.0)) || lambda_seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("lambda_seq", "must be positive and strictly decreasing"));
    }
    if x_ref >= op.grid().len() {
        return Err(Error::OutsideDomain);
    }
    let mut out = ErgodicResult {
        lambda_seq: lambda_seq.to_vec(),
        x_ref,
        c_estimates: Vec::new(),
        c_mean_diag: Vec::new(),
        c_max_diag: Vec::new(),
        osc_w: Vec::new(),
        residuals: Vec::new(),
        c: 0.0,
        w: GridField::constant(*op.grid(), 0.0),
        fields: Vec::new(),
    };
    let mut prev: Option<GridField> = None;
    for &lambda in lambda_seq {
        let sol = solve_discounted(lambda, ham, op, cfg, prev.as_ref())?;
        let u = sol.u;
        let c = lambda * u.get(x_ref);
        out.c_estimates.push(c);
        out.c_mean_diag.push(lambda * u.mean());
        out.c_max_diag.push(lambda * u.max());
        out.osc_w.push(u.max() - u.min());
        let w = u.offset(-u.get(x_ref));
        out.residuals.push(ergodic_residual(c, &w, ham, op));
        out.fields.push(u.clone());
        prev = Some(u);
    }
    let last = out.fields.len() - 1;
    out.c = out.c_estimates[last];
    out.w = out.corrector(last);
    Ok(out)
}

/// Long-time slope between `t1` and `t2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeEstimate {
    /// `mean_x (u(x,t2) - u(x,t1)) / (t2 - t1)`.
    pub slope: f64,
    /// Max minus min of the pointwise slopes.
    pub spread: f64,
    pub trajectory: Trajectory,
}

pub fn long_time_constant(
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    u0: &GridField,
    t1: f64,
    t2: f64,
    cfg: &EvolutionConfig,
) -> Result<SlopeEstimate> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(invalid("t1, t2", "need 0 < t1 < t2"));
    }
    let mut cfg = cfg.clone();
    cfg.t_end = t2;
    cfg.snapshot_times.retain(|t| *t < t2);
    cfg.snapshot_times.push(t1);
    let tr = evolve(u0, ham, op, &cfg)?;
    let a = tr.at(t1).ok_or(Error::NonFinite("missing snapshot"))?;
    let b = tr.at(t2).ok_or(Error::NonFinite("missing snapshot"))?;
    let slopes: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| (y - x) / (t2 - t1)).collect();
    let slope = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let mx = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mn = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(SlopeEstimate { slope, spread: mx - mn, trajectory: tr })
}

/// `gap(t) = max_x |u(x,t) - ĉt - w(x) - κ̄|` at every snapshot, with
/// `κ̄ = mean_x (u(x,T) - ĉT - w(x))` fitted at the final snapshot `T`.
pub fn large_time_gap(traj: &Trajectory, c_hat: f64, w: &GridField) -> Result<Vec<(f64, f64)>> {
    let last = traj.fields.last().ok_or(Error::NonFinite("empty trajectory"))?;
    if last.grid() != w.grid() {
        return Err(invalid("w", "grid differs from the trajectory grid"));
    }
    let t_end = *traj.times.last().unwrap_or(&0.0);
    let kappa =
        last.values().iter().zip(w.values()).map(|(u, w)| u - c_hat * t_end - w).sum::<f64>() / w.values().len() as f64;
    Ok(traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(t, u)| {
            let gap =
                u.values().iter().zip(w.values()).map(|(u, w)| (u - c_hat * t - w - kappa).abs()).fold(0.0, f64::max);
            (*t, gap)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use crate::levy::{discretize_default, LevyMeasureSpec};
    use crate::math;
    use crate::nonlocal::InvariantOperator;

    fn setup(n: usize, f: impl Fn(f64) -> f64) -> (PeriodicGrid, HamiltonianSpec, InvariantOperator) {
        let g = PeriodicGrid::new(1, n).unwrap();
        let m = discretize_default(&LevyMeasureSpec::fractional(0.5), &g).unwrap();
        let op = InvariantOperator::new(&g, &m).unwrap();
        let ham = HamiltonianSpec::power(2.0, GridField::from_fn(g, |p| f(p[0])).unwrap()).unwrap();
        (g, ham, op)
    }

    #[test]
    fn constant_case_is_exact() {
        let (g, ham, op) = setup(32, |_| 1.0);
        let r = vanishing_discount(&ham, &op, &DEFAULT_LAMBDAS, &StationaryConfig::default(), 0).unwrap();
        assert!((r.c - 1.0).abs() < 1e-8);
        assert!(r.c_estimates.iter().all(|c| (c - 1.0).abs() < 1e-8));
        assert!(r.w.sup_norm() < 1e-8);
        assert_eq!(r.w.get(0), 0.0);
        let s =
            long_time_constant(&ham, &op, &GridField::constant(g, 0.0), 1.0, 2.0, &EvolutionConfig::default()).unwrap();
        assert!((s.slope - 1.0).abs() < 1e-10);
        let gap = large_time_gap(&s.trajectory, evolution_slope(r.c), &r.w).unwrap();
        assert!(gap.iter().all(|(_, g)| *g < 1e-7));
    }

    #[test]
    fn rejects_bad_sequences() {
        let (_, ham, op) = setup(16, |_| 0.0);
        let cfg = StationaryConfig::default();
        assert!(vanishing_discount(&ham, &op, &[0.1, 0.2], &cfg, 0).is_err());
        assert!(vanishing_discount(&ham, &op, &[], &cfg, 0).is_err());
        assert!(vanishing_discount(&ham, &op, &[0.1], &cfg, 99).is_err());
    }

    #[test]
    fn cosine_gauge_and_reference_point() {
        let (g, ham, op) = setup(64, |x| math::cos(2.0 * math::PI * x));
        let cfg = StationaryConfig::default();
        let a = vanishing_discount(&ham, &op, &[0.1, 0.05], &cfg, 0).unwrap();
        let b = vanishing_discount(&ham, &op, &[0.1, 0.05], &cfg, 17).unwrap();
        let d: Vec<f64> = a.w.values().iter().zip(b.w.values()).map(|(x, y)| x - y).collect();
        let spread =
            d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - d.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 1e-6);
        // shifting f by a constant shifts c and leaves w unchanged
        let shifted = ham.with_f(GridField::from_fn(g, |p| math::cos(2.0 * math::PI * p[0]) + 0.5).unwrap()).unwrap();
        let s = vanishing_discount(&shifted, &op, &[0.1, 0.05], &cfg, 0).unwrap();
        assert!((s.c - a.c - 0.5).abs() < 1e-6);
        let dw = s.w.values().iter().zip(a.w.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(dw < 1e-6);
    }
}
