//! Power-profile barriers `w = w1 + w2` around a ball `B_r(x0)` and their
//! numerical certification as strict supersolutions of
//! `-sup_ξ I_ξ(w, x) + b0 |Dw(x)|^m ≥ A ϱ(x)^{-θ}`.
//!
//! The operator side is evaluated with the folded stencils of
//! [`crate::nonlocal`] on the barrier sampled at grid nodes. The gradient side
//! uses the closed form `|Dw| = C1 γ (d0^{γ-1} + dr^{γ-1})`; a central
//! difference is kept in every row as a diagnostic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{periodic_distance, Domain, GridField, PeriodicGrid, Point, MAX_DIM};
use crate::levy::{censor, h_alpha_sigma, push_forward, JumpFunction, QuadratureMeasure};
use crate::nonlocal::{masked_mean, Stencil};
use crate::{math, par};

/// Doubling budget of [`select_c1`].
pub const MAX_DOUBLINGS: usize = 60;

/// Offset from 1 used when an exponent formula returns exactly 1.
pub const UNIT_EXPONENT_GAP: f64 = 1e-3;

/// `min((m - σ)/m, (m - θ)/m)`: the exponent up to the boundary.
pub fn gamma0_boundary(sigma: f64, m: f64, theta: f64) -> f64 {
    ((m - sigma) / m).min((m - theta) / m)
}

/// `min(γ̃0, (m - θ)/m)` with `γ̃0 = (m - σ)/(m - 1)` for `σ > 1` and `1`
/// for `σ < 1`. At `σ = 1` the formula only asks for some exponent in
/// `(0, 1)`; `1 - UNIT_EXPONENT_GAP` is returned.
pub fn gamma0_interior(sigma: f64, m: f64, theta: f64) -> f64 {
    let tilde = if sigma > 1.0 {
        (m - sigma) / (m - 1.0)
    } else if sigma == 1.0 {
        1.0 - UNIT_EXPONENT_GAP
    } else {
        1.0
    };
    tilde.min((m - theta) / m)
}

/// The exponent actually certified: `γ` itself, or `1 - UNIT_EXPONENT_GAP`
/// when `γ = 1`.
pub fn certification_exponent(gamma: f64) -> f64 {
    gamma.min(1.0 - UNIT_EXPONENT_GAP)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub dim: usize,
    pub x0: Point,
    pub r: f64,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BarrierParams {
    pub fn new(dim: usize, x0: Point, r: f64, gamma: f64, c1: f64, c2: f64) -> Result<Self> {
        let p = Self { dim, x0, r, gamma, c1, c2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        if !(self.r > 0.0 && self.r < 0.5) {
            return Err(invalid("r", "radius must lie in (0, 1/2)"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(invalid("gamma", "exponent must lie in (0, 1]"));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(invalid("c1", "amplitude must be positive"));
        }
        if !(self.c2 >= 0.0 && self.c2.is_finite()) {
            return Err(invalid("c2", "jump amplitude must be nonnegative"));
        }
        Ok(())
    }

    /// Same barrier with another `C1`. Not validated, so `C1 = 0` can be
    /// forced for failure-path experiments.
    pub fn with_c1(&self, c1: f64) -> Self {
        Self { c1, ..*self }
    }

    /// Periodic distance to `x0`.
    pub fn d0(&self, x: &Point) -> f64 {
        periodic_distance(self.dim, x, &self.x0)
    }

    /// `(d0, r - d0, min(d0, r - d0)/4)` on the closed ball.
    pub fn eval_d0_dr_rho(&self, x: &Point) -> Result<(f64, f64, f64)> {
        let d0 = self.d0(x);
        if d0 > self.r {
            return Err(Error::OutsideDomain);
        }
        let dr = self.r - d0;
        Ok((d0, dr, 0.25 * d0.min(dr)))
    }

    pub fn eval_w1(&self, x: &Point) -> f64 {
        let d0 = self.d0(x).min(self.r);
        self.c1 * math::powf(d0, self.gamma)
    }

    pub fn eval_w2(&self, x: &Point) -> f64 {
        let d0 = self.d0(x);
        let rg = math::powf(self.r, self.gamma);
        if d0 <= self.r {
            self.c1 * (rg - math::powf(self.r - d0, self.gamma))
        } else {
            self.c1 * rg + self.c2
        }
    }

    pub fn eval_w(&self, x: &Point) -> f64 {
        self.eval_w1(x) + self.eval_w2(x)
    }

    /// `C1 γ (d0^{γ-1} + dr^{γ-1})`; infinite at `x0` and on `∂B_r` when `γ < 1`.
    pub fn grad_norm(&self, d0: f64, dr: f64) -> f64 {
        let e = self.gamma - 1.0;
        self.c1 * self.gamma * (math::powf(d0, e) + math::powf(dr, e))
    }

    /// The barrier sampled at the grid nodes.
    pub fn field(&self, grid: &PeriodicGrid) -> Result<GridField> {
        if grid.dim() != self.dim {
            return Err(invalid("grid", "dimension differs from the barrier"));
        }
        GridField::from_fn(*grid, |p| self.eval_w(p))
    }
}

/// Nodes of `B_r(x0)` other than `x0` whose distance to `∂B_r` is at least `2h`.
pub fn test_points(grid: &PeriodicGrid, params: &BarrierParams) -> Vec<usize> {
    let guard = 2.0 * grid.h();
    (0..grid.len())
        .filter(|&i| {
            let d0 = params.d0(&grid.point(i));
            d0 > 0.0 && params.r - d0 >= guard
        })
        .collect()
}

/// Right-hand side data `A ϱ^{-θ}` and the coercivity `b0 |Dw|^m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupersolutionData {
    pub a: f64,
    pub b0: f64,
    pub m: f64,
    pub theta: f64,
}

impl SupersolutionData {
    pub fn new(a: f64, b0: f64, m: f64, theta: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(invalid("A", "must be nonnegative"));
        }
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(invalid("b0", "must be positive"));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid("m", "must be positive"));
        }
        if !(theta >= 0.0 && theta < m) {
            return Err(invalid("theta", "must lie in [0, m)"));
        }
        Ok(Self { a, b0, m, theta })
    }
}

/// Which family `I_ξ` the barrier is tested against.
#[derive(Debug, Clone, Copy)]
pub enum BarrierOperator<'a> {
    /// A single x-independent measure: the sup over `ξ` is one evaluation.
    Full(&'a QuadratureMeasure),
    /// The measure censored to `domain` at each test point.
    Censored { measure: &'a QuadratureMeasure, domain: &'a Domain },
    /// Push-forwards `j(ξ, ·)#ν` over every distinct jump matrix on the grid.
    /// `B_1(x)` covers the unit torus, so every node is an admissible `ξ`.
    LevyIto { measure: &'a QuadratureMeasure, jump: &'a JumpFunction },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierRow {
    pub idx: usize,
    pub x: Point,
    pub d0: f64,
    pub dr: f64,
    /// `ϱ`, or `ϱ̃ = min(d0, dr)/(4 Cj)` in Lévy–Ito mode.
    pub rho: f64,
    /// `sup_ξ I_ξ(w, x)`.
    pub iw: f64,
    pub grad: f64,
    /// Central-difference `|Dw|`, diagnostic only.
    pub grad_fd: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierReport {
    pub rows: Vec<BarrierRow>,
    pub min_margin: f64,
    pub c1: f64,
    /// Number of `ξ` evaluated per test point (maximum over points).
    pub xi_count: usize,
    /// Test points dropped because the operator is undefined there.
    pub skipped: usize,
}

impl BarrierReport {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.min_margin >= 0.0
    }

    pub fn worst(&self) -> Option<&BarrierRow> {
        self.rows.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }
}

/// Stencils for one operator family, prepared once and reused across `C1`.
#[derive(Debug, Clone)]
pub struct Certifier {
    grid: PeriodicGrid,
    points: Vec<usize>,
    stencils: Vec<(Stencil, Option<Vec<bool>>)>,
    /// Stencil indices forming the sup, per test point.
    xi: Vec<Vec<usize>>,
    rho_scale: f64,
    sigma: f64,
    skipped: usize,
}

impl Certifier {
    pub fn new(grid: &PeriodicGrid, op: BarrierOperator<'_>, points: &[usize]) -> Result<Self> {
        let mut stencils = Vec::new();
        let mut xi = Vec::new();
        let mut kept = Vec::new();
        let mut skipped = 0;
        let mut rho_scale = 1.0;
        let sigma;
        if points.iter().any(|&i| i >= grid.len()) {
            return Err(Error::OutsideDomain);
        }
        match op {
            BarrierOperator::Full(measure) => {
                sigma = measure.sigma;
                stencils.push((Stencil::from_measure(measure, grid)?, measure.far_mask.clone()));
                kept.extend_from_slice(points);
                xi = vec![vec![0]; kept.len()];
            }
            BarrierOperator::Censored { measure, domain } => {
                sigma = measure.sigma;
                if domain.grid() != grid {
                    return Err(invalid("domain", "grid differs"));
                }
                for &i in points {
                    match censor(measure, domain, i) {
                        Ok(c) => {
                            xi.push(vec![stencils.len()]);
                            stencils.push((Stencil::from_measure(&c, grid)?, c.far_mask));
                            kept.push(i);
                        }
                        Err(Error::SingularCell { .. }) | Err(Error::OutsideDomain) => skipped += 1,
                        Err(e) => return Err(e),
                    }
                }
            }
            BarrierOperator::LevyIto { measure, jump } => {
                sigma = measure.sigma;
                let mut seen: Vec<[[f64; 2]; 2]> = Vec::new();
                for i in 0..grid.len() {
                    let mat = jump.matrix_at(i);
                    if !seen.contains(&mat) {
                        seen.push(mat);
                        let pushed = push_forward(measure, jump, i);
                        stencils.push((Stencil::from_measure(&pushed, grid)?, pushed.far_mask));
                    }
                }
                kept.extend_from_slice(points);
                let all: Vec<usize> = (0..stencils.len()).collect();
                xi = vec![all; kept.len()];
                rho_scale = 1.0 / jump.cj();
            }
        }
        Ok(Self { grid: *grid, points: kept, stencils, xi, rho_scale, sigma, skipped })
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `sup_ξ I_ξ(w, x)` at every test point.
    pub fn sup_iw(&self, w: &GridField) -> Result<Vec<f64>> {
        if w.grid() != &self.grid {
            return Err(invalid("w", "grid differs"));
        }
        let u = w.values();
        let means: Vec<f64> = self.stencils.iter().map(|(_, mask)| masked_mean(u, mask.as_deref())).collect();
        let mut out = vec![0.0; self.points.len()];
        par::fill(&mut out, |k| {
            let idx = self.points[k];
            self.xi[k]
                .iter()
                .map(|&s| self.stencils[s].0.eval(&self.grid, u, idx, means[s]))
                .fold(f64::NEG_INFINITY, f64::max)
        });
        Ok(out)
    }

    pub fn verify(&self, params: &BarrierParams, data: &SupersolutionData) -> Result<BarrierReport> {
        let w = params.field(&self.grid)?;
        let iw = self.sup_iw(&w)?;
        let u = w.values();
        let h = self.grid.h();
        let mut rows = Vec::with_capacity(self.points.len());
        for (k, &idx) in self.points.iter().enumerate() {
            let x = self.grid.point(idx);
            let d0 = params.d0(&x);
            let dr = params.r - d0;
            let rho = 0.25 * d0.min(dr) * self.rho_scale;
            let grad = params.grad_norm(d0, dr);
            let mut g2 = 0.0;
            for a in 0..self.grid.dim() {
                let mut e = [0i64; MAX_DIM];
                e[a] = 1;
                let f = u[self.grid.shift(idx, e)];
                e[a] = -1;
                let b = u[self.grid.shift(idx, e)];
                let d = (f - b) / (2.0 * h);
                g2 += d * d;
            }
            let lhs = -iw[k] + data.b0 * math::powf(grad, data.m);
            let rhs = data.a * math::powf(rho, -data.theta);
            rows.push(BarrierRow {
                idx,
                x,
                d0,
                dr,
                rho,
                iw: iw[k],
                grad,
                grad_fd: math::sqrt(g2),
                lhs,
                rhs,
                margin: lhs - rhs,
            });
        }
        let min_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        let xi_count = self.xi.iter().map(Vec::len).max().unwrap_or(0);
        Ok(BarrierReport { rows, min_margin, c1: params.c1, xi_count, skipped: self.skipped })
    }
}

/// One-shot certification over `test_points`.
pub fn verify_strict_supersolution(
    params: &BarrierParams,
    op: BarrierOperator<'_>,
    data: &SupersolutionData,
    test_points: &[usize],
    grid: &PeriodicGrid,
) -> Result<BarrierReport> {
    Certifier::new(grid, op, test_points)?.verify(params, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct C1Selection {
    pub c1: f64,
    pub doublings: usize,
    /// `C1 / (A^{1/m} + C2^{1/m} + 1)`.
    pub constant: f64,
    pub report: BarrierReport,
}

/// Doubling search from `C1 = A^{1/m} + C2^{1/m} + 1` until `verify` passes.
pub fn select_c1(a: f64, c2: f64, m: f64, mut verify: impl FnMut(f64) -> Result<BarrierReport>) -> Result<C1Selection> {
    if !(a >= 0.0 && c2 >= 0.0 && m > 0.0) {
        return Err(invalid("A, C2, m", "need A ≥ 0, C2 ≥ 0, m > 0"));
    }
    let base = math::powf(a, 1.0 / m) + math::powf(c2, 1.0 / m) + 1.0;
    let mut c1 = base;
    let mut last = f64::NEG_INFINITY;
    for doublings in 0..=MAX_DOUBLINGS {
        let report = verify(c1)?;
        if report.passed() {
            return Ok(C1Selection { c1, doublings, constant: c1 / base, report });
        }
        last = report.min_margin;
        if doublings < MAX_DOUBLINGS {
            c1 *= 2.0;
        }
    }
    Err(Error::SelectionFailed { doublings: MAX_DOUBLINGS, last_c1: c1, min_margin: last })
}

/// Measured `sup_ξ I_ξ(w, x)` against the profile of the applicable branch.
#[derive(Debug, Clone, PartialEq)]
pub struct IwBound {
    /// `(idx, ϱ, measured, profile)`.
    pub rows: Vec<(usize, f64, f64, f64)>,
    /// Max of `measured / profile`.
    pub fitted_c: f64,
}

/// Profile of the bound on `I(w)`: `(C1 + C2) ϱ^{-σ}` when `C2 > 0`,
/// `C1 ϱ^{γ-1} h_{1,σ}(ϱ)` when `C2 = 0` and `σ ≥ 1`, `C1 h_{γ,σ}(ϱ)` otherwise.
pub fn iw_profile(params: &BarrierParams, sigma: f64, rho: f64) -> Result<f64> {
    Ok(if params.c2 > 0.0 {
        (params.c1 + params.c2) * math::powf(rho, -sigma)
    } else if sigma >= 1.0 {
        params.c1 * math::powf(rho, params.gamma - 1.0) * h_alpha_sigma(1.0, sigma, rho)?
    } else {
        params.c1 * h_alpha_sigma(params.gamma, sigma, rho)?
    })
}

pub fn bound_iw(params: &BarrierParams, certifier: &Certifier) -> Result<IwBound> {
    let w = params.field(&certifier.grid)?;
    let iw = certifier.sup_iw(&w)?;
    let mut rows = Vec::with_capacity(iw.len());
    let mut fitted: f64 = 0.0;
    for (&idx, &measured) in certifier.points.iter().zip(&iw) {
        let (_, _, rho) = params.eval_d0_dr_rho(&certifier.grid.point(idx))?;
        if rho <= 0.0 {
            continue;
        }
        let profile = iw_profile(params, certifier.sigma, rho)?;
        fitted = fitted.max(measured.max(0.0) / profile);
        rows.push((idx, rho, measured, profile));
    }
    Ok(IwBound { rows, fitted_c: fitted })
}
