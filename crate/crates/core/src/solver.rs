//! Explicit monotone time marching for `u_t - I[u] + H(x, Du) = 0` and the
//! discounted problem `λu - I[u] + H(x, Du) = 0`.
//!
//! Each step uses `dt = cfl / (λ + D_I + L_H / h)`, where `D_I` is the
//! operator's diagonal weight and `L_H` bounds the flux derivatives over the
//! current slopes. With this `dt` every update is a nondecreasing function of
//! the previous values, which gives discrete comparison.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{one_sided_raw, GridField, PeriodicGrid};
use crate::hamiltonian::HamiltonianSpec;
use crate::nonlocal::NonlocalOperator;
use crate::par;

pub const DT_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub cfl_factor: f64,
    pub t_end: f64,
    /// Times in `(0, t_end]` at which fields are stored; `t_end` is always added.
    pub snapshot_times: Vec<f64>,
    pub residual_tol: f64,
    pub max_steps: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { cfl_factor: 0.9, t_end: 1.0, snapshot_times: Vec::new(), residual_tol: 1e-8, max_steps: 10_000_000 }
    }
}

impl EvolutionConfig {
    pub fn until(t_end: f64) -> Self {
        Self { t_end, ..Self::default() }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    fn validate(&self) -> Result<Vec<f64>> {
        if !(self.cfl_factor > 0.0 && self.cfl_factor <= 1.0) {
            return Err(invalid("cfl_factor", "must lie in (0, 1]"));
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", "must be positive"));
        }
        if !(self.residual_tol > 0.0) {
            return Err(invalid("residual_tol", "must be positive"));
        }
        let mut times: Vec<f64> = self.snapshot_times.clone();
        if times.iter().any(|t| !(*t > 0.0 && *t <= self.t_end)) {
            return Err(invalid("snapshot_times", "must lie in (0, t_end]"));
        }
        times.push(self.t_end);
        times.sort_by(f64::total_cmp);
        times.dedup();
        Ok(times)
    }
}

/// Snapshots of one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Snapshot times, starting at 0.
    pub times: Vec<f64>,
    pub fields: Vec<GridField>,
    pub dt_history: Vec<f64>,
    /// `(t, sup u, inf u)` after every step, starting at 0.
    pub norm_history: Vec<(f64, f64, f64)>,
}

impl Trajectory {
    pub fn final_field(&self) -> &GridField {
        self.fields.last().expect("trajectory holds the initial field")
    }

    /// Snapshot stored at exactly time `t`, if any.
    pub fn at(&self, t: f64) -> Option<&GridField> {
        self.times.iter().position(|s| *s == t).map(|i| &self.fields[i])
    }
}

/// Largest one-sided slope magnitude of a buffer.
fn max_slope(grid: &PeriodicGrid, u: &[f64]) -> f64 {
    let inv_h = grid.n() as f64;
    let mut s: f64 = 0.0;
    for i in 0..grid.len() {
        for k in 0..grid.dim() {
            let mut e = [0i64; 2];
            e[k] = 1;
            s = s.max((u[grid.shift(i, e)] - u[i]).abs() * inv_h);
        }
    }
    s
}

fn stable_dt(
    grid: &PeriodicGrid,
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    lambda: f64,
    cfl: f64,
    fields: &[Vec<f64>],
) -> Result<f64> {
    let p = fields.iter().map(|u| max_slope(grid, u)).fold(0.0, f64::max);
    let lh = ham.lipschitz_bound(p)?;
    let denom = lambda + op.diagonal_weight() + lh * grid.n() as f64;
    Ok(if denom > 0.0 { cfl / denom } else { f64::INFINITY })
}

/// `out = I[u] - H_num(u)`.
fn rhs(
    grid: &PeriodicGrid,
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    u: &[f64],
    iu: &mut [f64],
    out: &mut [f64],
) {
    op.apply(u, iu);
    let iu = &*iu;
    par::fill(out, |i| {
        let s = one_sided_raw(grid, u, i);
        iu[i] - ham.numerical_h(i, &s.minus, &s.plus)
    });
}

/// `I[u] - H_num(u)` at every grid point.
pub fn evolution_rhs(ham: &HamiltonianSpec, op: &dyn NonlocalOperator, u: &GridField) -> Vec<f64> {
    let grid = *op.grid();
    let mut iu = vec![0.0; grid.len()];
    let mut r = vec![0.0; grid.len()];
    rhs(&grid, ham, op, u.values(), &mut iu, &mut r);
    r
}

fn check_inputs(ham: &HamiltonianSpec, op: &dyn NonlocalOperator, fields: &[GridField]) -> Result<PeriodicGrid> {
    let grid = *op.grid();
    if ham.grid() != &grid {
        return Err(invalid("hamiltonian", "grid differs from the operator grid"));
    }
    if let Some(f) = fields.iter().find(|f| f.grid() != &grid) {
        return Err(Error::ShapeMismatch { expected: grid.len(), found: f.values().len() });
    }
    Ok(grid)
}

/// Forward-Euler evolution of one initial field.
pub fn evolve(
    u0: &GridField,
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    cfg: &EvolutionConfig,
) -> Result<Trajectory> {
    Ok(evolve_lockstep(core::slice::from_ref(u0), ham, op, cfg, |_, _| {})?.remove(0))
}

/// Evolves several initial fields with a common time step, calling
/// `observer(t, fields)` after every step.
pub fn evolve_lockstep(
    u0s: &[GridField],
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    cfg: &EvolutionConfig,
    mut observer: impl FnMut(f64, &[Vec<f64>]),
) -> Result<Vec<Trajectory>> {
    let grid = check_inputs(ham, op, u0s)?;
    let snaps = cfg.validate()?;
    let len = grid.len();
    let mut fields: Vec<Vec<f64>> = u0s.iter().map(|u| u.values().to_vec()).collect();
    let mut trajs: Vec<Trajectory> = u0s
        .iter()
        .map(|u| Trajectory {
            times: vec![0.0],
            fields: vec![u.clone()],
            dt_history: Vec::new(),
            norm_history: vec![(0.0, u.max(), u.min())],
        })
        .collect();
    let mut iu = vec![0.0; len];
    let mut r = vec![0.0; len];
    let mut t = 0.0;
    let mut next = 0;
    let mut steps = 0;
    while next < snaps.len() {
        if steps >= cfg.max_steps {
            return Err(Error::NotConverged { steps, residual: f64::NAN, lambda: 0.0 });
        }
        let target = snaps[next];
        let mut dt = stable_dt(&grid, ham, op, 0.0, cfg.cfl_factor, &fields)?;
        let hit = t + dt >= target;
        if hit {
            dt = target - t;
        } else if dt < DT_FLOOR {
            return Err(Error::TimeStepFloor { t, dt });
        }
        for u in fields.iter_mut() {
            rhs(&grid, ham, op, u, &mut iu, &mut r);
            for (v, d) in u.iter_mut().zip(&r) {
                *v += dt * d;
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("evolved field"));
            }
        }
        t = if hit { target } else { t + dt };
        steps += 1;
        for (tr, u) in trajs.iter_mut().zip(&fields) {
            tr.dt_history.push(dt);
            let (mx, mn) = u.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), v| (a.max(*v), b.min(*v)));
            tr.norm_history.push((t, mx, mn));
            if hit {
                tr.times.push(t);
                tr.fields.push(GridField::new(grid, u.clone())?);
            }
        }
        observer(t, &fields);
        if hit {
            next += 1;
        }
    }
    Ok(trajs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryConfig {
    pub cfl_factor: f64,
    pub residual_tol: f64,
    pub max_steps: usize,
}

impl Default for StationaryConfig {
    fn default() -> Self {
        Self { cfl_factor: 0.9, residual_tol: 1e-8, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub u: GridField,
    pub steps: usize,
    /// `sup |λu - I[u] + H_num(u)|` at exit.
    pub residual: f64,
}

/// Solves `λu - I[u] + H_num(u) = 0` by pseudo-time marching from `start`
/// (zero when `None`). The spatial mean of the residual is removed exactly at
/// each step (`u -= mean(F)/λ`), the rest by an explicit monotone step.
pub fn solve_discounted(
    lambda: f64,
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    cfg: &StationaryConfig,
    start: Option<&GridField>,
) -> Result<StationarySolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", "must be positive"));
    }
    if !(cfg.cfl_factor > 0.0 && cfg.cfl_factor <= 1.0) {
        return Err(invalid("cfl_factor", "must lie in (0, 1]"));
    }
    let grid = check_inputs(ham, op, start.map(core::slice::from_ref).unwrap_or(&[]))?;
    let len = grid.len();
    let mut u = match start {
        Some(s) => s.values().to_vec(),
        None => vec![0.0; len],
    };
    let mut iu = vec![0.0; len];
    let mut r = vec![0.0; len];
    let mut steps = 0;
    loop {
        // r = I[u] - H_num(u), so F = λu - r
        rhs(&grid, ham, op, &u, &mut iu, &mut r);
        let mut res: f64 = 0.0;
        let mut mean = 0.0;
        for (f, v) in r.iter_mut().zip(&u) {
            *f = lambda * v - *f;
            res = res.max(f.abs());
            mean += *f;
        }
        if !res.is_finite() {
            return Err(Error::NonFinite("discounted iterate"));
        }
        if res < cfg.residual_tol {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(Error::NotConverged { steps, residual: res, lambda });
        }
        mean /= len as f64;
        let dt = stable_dt(&grid, ham, op, lambda, cfg.cfl_factor, core::slice::from_ref(&u))?;
        if dt < DT_FLOOR {
            return Err(Error::TimeStepFloor { t: steps as f64, dt });
        }
        let shift = mean / lambda;
        for (v, f) in u.iter_mut().zip(&r) {
            *v -= dt * (f - mean) + shift;
        }
        steps += 1;
    }
    let field = GridField::new(grid, u)?;
    let bound = (ham.h0() + cfg.residual_tol) / lambda;
    let sup = field.sup_norm();
    if sup > bound * (1.0 + 1e-12) {
        return Err(Error::BoundViolated { value: sup, bound });
    }
    let residual = discounted_residual(lambda, ham, op, &field);
    Ok(StationarySolution { u: field, steps, residual })
}

/// `sup |λu - I[u] + H_num(u)|`.
pub fn discounted_residual(lambda: f64, ham: &HamiltonianSpec, op: &dyn NonlocalOperator, u: &GridField) -> f64 {
    let r = evolution_rhs(ham, op, u);
    r.iter().zip(u.values()).map(|(f, v)| (lambda * v - f).abs()).fold(0.0, f64::max)
}

/// Outcome of evolving ordered (or arbitrary) pairs in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub pairs: usize,
    /// `max_t max_x (u - v)` over pairs whose initial data satisfy `u0 ≤ v0`.
    pub max_violation: f64,
    /// Largest single-step increase of `κ(t) = max_x (u - v)` over all pairs.
    pub max_kappa_increase: f64,
    /// Per pair, `κ` after every step (starting at `t = 0`).
    pub kappa_histories: Vec<Vec<(f64, f64)>>,
}

pub fn comparison_harness(
    pairs: &[(GridField, GridField)],
    ham: &HamiltonianSpec,
    op: &dyn NonlocalOperator,
    cfg: &EvolutionConfig,
) -> Result<ComparisonReport> {
    let mut max_violation = f64::NEG_INFINITY;
    let mut max_inc = f64::NEG_INFINITY;
    let mut histories = Vec::with_capacity(pairs.len());
    for (u0, v0) in pairs {
        let ordered = u0.values().iter().zip(v0.values()).all(|(a, b)| a <= b);
        let kappa = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        let mut hist = vec![(0.0, kappa(u0.values(), v0.values()))];
        evolve_lockstep(&[u0.clone(), v0.clone()], ham, op, cfg, |t, f| {
            hist.push((t, kappa(&f[0], &f[1])));
        })?;
        for w in hist.windows(2) {
            max_inc = max_inc.max(w[1].1 - w[0].1);
        }
        if ordered {
            max_violation = max_violation.max(hist.iter().map(|(_, k)| *k).fold(f64::NEG_INFINITY, f64::max));
        }
        histories.push(hist);
    }
    Ok(ComparisonReport {
        pairs: pairs.len(),
        max_violation: max_violation.max(0.0),
        max_kappa_increase: max_inc.max(0.0),
        kappa_histories: histories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{discretize_default, LevyMeasureSpec};
    use crate::math;
    use crate::nonlocal::InvariantOperator;

    fn setup(n: usize, sigma: f64, f: impl Fn(f64) -> f64) -> (PeriodicGrid, HamiltonianSpec, InvariantOperator) {
        let g = PeriodicGrid::new(1, n).unwrap();
        let m = discretize_default(&LevyMeasureSpec::fractional(sigma), &g).unwrap();
        let op = InvariantOperator::new(&g, &m).unwrap();
        let ham = HamiltonianSpec::power(2.0, GridField::from_fn(g, |p| f(p[0])).unwrap()).unwrap();
        (g, ham, op)
    }

    #[test]
    fn constant_forcing_grows_linearly() {
        let (g, ham, op) = setup(64, 1.0, |_| 1.0);
        let cfg = EvolutionConfig::until(2.0).with_snapshots(vec![0.5, 1.0]);
        let tr = evolve(&GridField::constant(g, 0.0), &ham, &op, &cfg).unwrap();
        assert_eq!(tr.times, vec![0.0, 0.5, 1.0, 2.0]);
        for (t, u) in tr.times.iter().zip(&tr.fields) {
            assert!(u.values().iter().all(|v| (v - t).abs() < 1e-8));
            assert!(u.sup_norm() <= ham.h0() * t + 1e-6);
        }
    }

    #[test]
    fn discounted_constant_solution() {
        let (_, ham, op) = setup(64, 1.0, |_| 1.0);
        let s = solve_discounted(0.1, &ham, &op, &StationaryConfig::default(), None).unwrap();
        assert!(s.u.values().iter().all(|v| (v - 10.0).abs() < 1e-8));
        assert!(s.u.sup_norm() <= ham.h0() / 0.1 + 1e-6);
    }

    #[test]
    fn discounted_two_starts_agree() {
        let (g, ham, op) = setup(128, 0.5, |x| math::cos(2.0 * math::PI * x));
        let cfg = StationaryConfig::default();
        let a = solve_discounted(0.05, &ham, &op, &cfg, None).unwrap();
        let start = GridField::from_fn(g, |p| 3.0 * math::sin(2.0 * math::PI * p[0]) - 5.0).unwrap();
        let b = solve_discounted(0.05, &ham, &op, &cfg, Some(&start)).unwrap();
        assert!(a.residual < 1e-8 && b.residual < 1e-8);
        let diff = a.u.values().iter().zip(b.u.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
        assert!(a.u.sup_norm() <= ham.h0() / 0.05 + 1e-6);
    }

    #[test]
    fn sup_norm_decays_without_forcing() {
        let (g, ham, op) = setup(128, 1.0, |_| 0.0);
        let u0 = GridField::from_fn(g, |p| math::cos(2.0 * math::PI * p[0])).unwrap();
        let tr = evolve(&u0, &ham, &op, &EvolutionConfig::until(0.5)).unwrap();
        for w in tr.norm_history.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
        assert!(tr.final_field().max() < 1.0);
    }

    #[test]
    fn constant_shift_and_comparison() {
        let (g, ham, op) = setup(64, 1.0, |x| math::sin(2.0 * math::PI * x));
        let u0 = GridField::from_fn(g, |p| 0.1 * math::cos(2.0 * math::PI * p[0])).unwrap();
        let v0 = u0.offset(1.0);
        let cfg = EvolutionConfig::until(0.3);
        let tr = evolve_lockstep(&[u0.clone(), v0.clone()], &ham, &op, &cfg, |_, _| {}).unwrap();
        for (a, b) in tr[0].final_field().values().iter().zip(tr[1].final_field().values()) {
            assert!((b - a - 1.0).abs() < 1e-12);
        }
        let rep = comparison_harness(&[(u0.clone(), v0), (u0.clone(), u0.clone())], &ham, &op, &cfg).unwrap();
        assert!(rep.max_violation <= 1e-8);
        assert!(rep.max_kappa_increase <= 1e-12);
        // identical initial data give identical trajectories
        assert!(rep.kappa_histories[1].iter().all(|(_, k)| *k == 0.0));
    }

    #[test]
    fn config_validation() {
        let (g, ham, op) = setup(16, 1.0, |_| 0.0);
        let u0 = GridField::constant(g, 0.0);
        let mut cfg = EvolutionConfig::until(1.0);
        cfg.cfl_factor = 1.5;
        assert!(evolve(&u0, &ham, &op, &cfg).is_err());
        let cfg = EvolutionConfig::until(1.0).with_snapshots(vec![2.0]);
        assert!(evolve(&u0, &ham, &op, &cfg).is_err());
        assert!(solve_discounted(0.0, &ham, &op, &StationaryConfig::default(), None).is_err());
    }
}
