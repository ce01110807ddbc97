//! Discrete nonlocal operators.
//!
//! A [`QuadratureMeasure`] is folded onto the periodic lattice as a
//! [`Stencil`]: nonnegative weights on shifted nodes, a second-difference
//! term carrying the near-origin mass, an upwinded drift and a far-field
//! relaxation toward the mean. Every coefficient multiplying a neighbour is
//! nonnegative, so the operator is monotone.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::grid::{Domain, GridField, PeriodicGrid, Point, MAX_DIM};
use crate::levy::{censor, push_forward, JumpFunction, QuadratureMeasure};
use crate::{math, par};

/// A measure folded onto lattice shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    /// Nonzero lattice shifts with aggregated weights.
    pub shifts: Vec<([i64; MAX_DIM], f64)>,
    /// Coefficient of the centered second difference per axis.
    pub second: Point,
    /// Drift coefficient per axis, applied with an upwind difference.
    pub drift: Point,
    /// Mass relaxed toward the field mean.
    pub far_mass: f64,
    /// Largest distance between an atom offset and its lattice node.
    pub snap_error: f64,
}

impl Stencil {
    pub fn from_measure(measure: &QuadratureMeasure, grid: &PeriodicGrid) -> Result<Self> {
        if measure.dim != grid.dim() {
            return Err(invalid("measure", "dimension differs from the grid"));
        }
        let dim = grid.dim();
        let h = grid.h();
        let n = grid.n() as i64;
        let mut folded: BTreeMap<[i64; MAX_DIM], f64> = BTreeMap::new();
        let mut snap_error: f64 = 0.0;
        let mut compensator = [0.0; MAX_DIM];
        for atom in &measure.atoms {
            let mut key = [0i64; MAX_DIM];
            let mut err2 = 0.0;
            for k in 0..dim {
                let t = atom.offset[k] / h;
                let r = math::round(t);
                err2 += (t - r) * (t - r);
                key[k] = (r as i64).rem_euclid(n);
            }
            snap_error = snap_error.max(math::sqrt(err2) * h);
            if key != [0; MAX_DIM] {
                *folded.entry(key).or_insert(0.0) += atom.weight;
            }
            if measure.compensation_order == 2 && !measure.symmetric {
                let r = crate::levy::norm(dim, &atom.offset);
                if r <= 1.0 {
                    for k in 0..dim {
                        compensator[k] += atom.weight * atom.offset[k];
                    }
                }
            }
        }
        let mut drift = [0.0; MAX_DIM];
        let mut second = [0.0; MAX_DIM];
        for k in 0..dim {
            drift[k] = if measure.compensation_order == 2 { -compensator[k] } else { measure.near_drift[k] };
            second[k] = 0.5 * (measure.near_axis_second[k] + measure.second_moment_defect[k]).max(0.0);
        }
        Ok(Self {
            shifts: folded.into_iter().filter(|(_, w)| *w != 0.0).collect(),
            second,
            drift,
            far_mass: measure.far_mass,
            snap_error,
        })
    }

    /// Coefficient of `-u(x)`: the sum of all neighbour weights.
    pub fn diagonal_weight(&self, grid: &PeriodicGrid) -> f64 {
        let inv_h = grid.n() as f64;
        let mut d: f64 = self.shifts.iter().map(|(_, w)| *w).sum();
        for k in 0..grid.dim() {
            d += 2.0 * self.second[k] * inv_h * inv_h + self.drift[k].abs() * inv_h;
        }
        d + self.far_mass
    }

    /// Evaluates the stencil at `idx`; `far_mean` is the mean of `u` over the
    /// far-field support.
    #[inline]
    pub fn eval(&self, grid: &PeriodicGrid, u: &[f64], idx: usize, far_mean: f64) -> f64 {
        let u0 = u[idx];
        let mut s = 0.0;
        for (shift, w) in &self.shifts {
            s += w * (u[grid.shift(idx, *shift)] - u0);
        }
        s + self.eval_local(grid, u, idx, far_mean)
    }

    /// Second-difference, drift and far-field terms only.
    #[inline]
    fn eval_local(&self, grid: &PeriodicGrid, u: &[f64], idx: usize, far_mean: f64) -> f64 {
        let u0 = u[idx];
        let mut s = 0.0;
        let inv_h = grid.n() as f64;
        for k in 0..grid.dim() {
            let mut e = [0i64; MAX_DIM];
            e[k] = 1;
            let fwd = u[grid.shift(idx, e)];
            e[k] = -1;
            let bwd = u[grid.shift(idx, e)];
            s += self.second[k] * (fwd - 2.0 * u0 + bwd) * inv_h * inv_h;
            let d = self.drift[k];
            if d > 0.0 {
                s += d * (fwd - u0) * inv_h;
            } else if d < 0.0 {
                s += d * (u0 - bwd) * inv_h;
            }
        }
        s + self.far_mass * (far_mean - u0)
    }
}

pub(crate) fn masked_mean(u: &[f64], mask: Option<&[bool]>) -> f64 {
    match mask {
        None => u.iter().sum::<f64>() / u.len() as f64,
        Some(m) => {
            let (s, c) = u.iter().zip(m).filter(|(_, b)| **b).fold((0.0, 0usize), |(s, c), (v, _)| (s + v, c + 1));
            if c == 0 {
                0.0
            } else {
                s / c as f64
            }
        }
    }
}

/// `I[u](x)` for the discretized measure.
pub fn eval_operator(field: &GridField, x: usize, measure: &QuadratureMeasure) -> Result<f64> {
    let grid = field.grid();
    let st = Stencil::from_measure(measure, grid)?;
    let mean = masked_mean(field.values(), measure.far_mask.as_deref());
    Ok(st.eval(grid, field.values(), x, mean))
}

/// Censored operator `I_Ω[u](x)`.
pub fn eval_censored(field: &GridField, x: usize, measure: &QuadratureMeasure, domain: &Domain) -> Result<f64> {
    eval_operator(field, x, &censor(measure, domain, x)?)
}

/// Lévy–Ito operator `I^j[u](x)`.
pub fn eval_levy_ito(field: &GridField, x: usize, measure: &QuadratureMeasure, jump: &JumpFunction) -> Result<f64> {
    eval_operator(field, x, &push_forward(measure, jump, x))
}

/// `-(-Δ)^{σ/2} u` through the Fourier multiplier `-(2π|k|)^σ` (1D only).
/// Direct DFT, quadratic in `n`.
pub fn spectral_fractional(field: &GridField, sigma: f64) -> Result<GridField> {
    let grid = *field.grid();
    if grid.dim() != 1 {
        return Err(invalid("grid", "spectral oracle is one-dimensional"));
    }
    if !(sigma > 0.0 && sigma <= 2.0) {
        return Err(invalid("sigma", "order must lie in (0, 2]"));
    }
    let n = grid.n();
    let u = field.values();
    let cos_t: Vec<f64> = (0..n).map(|j| math::cos(2.0 * math::PI * j as f64 / n as f64)).collect();
    let sin_t: Vec<f64> = (0..n).map(|j| math::sin(2.0 * math::PI * j as f64 / n as f64)).collect();
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for k in 1..n {
        let (mut a, mut b) = (0.0, 0.0);
        for (j, v) in u.iter().enumerate() {
            let p = (k * j) % n;
            a += v * cos_t[p];
            b -= v * sin_t[p];
        }
        let freq = if k <= n / 2 { k } else { n - k } as f64;
        let mult = -math::powf(2.0 * math::PI * freq, sigma);
        re[k] = mult * a;
        im[k] = mult * b;
    }
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for k in 1..n {
            let p = (k * j) % n;
            s += re[k] * cos_t[p] - im[k] * sin_t[p];
        }
        *o = s / n as f64;
    }
    GridField::new(grid, out)
}

/// A linear monotone nonlocal operator acting on whole grid buffers.
pub trait NonlocalOperator: Sync {
    fn grid(&self) -> &PeriodicGrid;
    /// `out[x] = I[u](x)` for every grid point.
    fn apply(&self, u: &[f64], out: &mut [f64]);
    /// Largest coefficient of `-u(x)` over the grid (the operator's share of
    /// the monotone time-step budget).
    fn diagonal_weight(&self) -> f64;
}

/// Translation-invariant operator from an `x`-independent measure.
#[derive(Debug, Clone)]
pub struct InvariantOperator {
    grid: PeriodicGrid,
    stencil: Stencil,
    far_mask: Option<Vec<bool>>,
}

impl InvariantOperator {
    pub fn new(grid: &PeriodicGrid, measure: &QuadratureMeasure) -> Result<Self> {
        Ok(Self { grid: *grid, stencil: Stencil::from_measure(measure, grid)?, far_mask: measure.far_mask.clone() })
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }
}

impl NonlocalOperator for InvariantOperator {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Local terms pointwise, then each lattice shift as a circular pass over
    /// contiguous rows.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let mean = masked_mean(u, self.far_mask.as_deref());
        let (g, st) = (&self.grid, &self.stencil);
        par::fill(out, |i| st.eval_local(g, u, i, mean));
        let n = g.n();
        let rows = if g.dim() == 2 { n } else { 1 };
        for (shift, w) in &st.shifts {
            let a = shift[0].rem_euclid(n as i64) as usize;
            let b = if g.dim() == 2 { shift[1].rem_euclid(n as i64) as usize } else { 0 };
            for j in 0..rows {
                let dst = j * n;
                let src = ((j + b) % n) * n;
                let (o, here, there) = (&mut out[dst..dst + n], &u[dst..dst + n], &u[src..src + n]);
                let k = n - a;
                for ((oi, hi), ti) in o[..k].iter_mut().zip(&here[..k]).zip(&there[a..]) {
                    *oi += w * (ti - hi);
                }
                for ((oi, hi), ti) in o[k..].iter_mut().zip(&here[k..]).zip(&there[..a]) {
                    *oi += w * (ti - hi);
                }
            }
        }
    }

    fn diagonal_weight(&self) -> f64 {
        self.stencil.diagonal_weight(&self.grid)
    }
}

/// Operator with one stencil per grid point (Lévy–Ito or censored).
#[derive(Debug, Clone)]
pub struct PointwiseOperator {
    grid: PeriodicGrid,
    stencils: Vec<Stencil>,
    far_mask: Option<Vec<bool>>,
}

impl PointwiseOperator {
    /// Stencils of the push-forward measures `ν_x^j`.
    pub fn levy_ito(grid: &PeriodicGrid, measure: &QuadratureMeasure, jump: &JumpFunction) -> Result<Self> {
        let stencils = (0..grid.len())
            .map(|x| Stencil::from_measure(&push_forward(measure, jump, x), grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid: *grid, stencils, far_mask: measure.far_mask.clone() })
    }

    /// Censored stencils inside `domain`. Points outside the domain, or within
    /// `r_cut` of its boundary, get the zero stencil.
    pub fn censored(measure: &QuadratureMeasure, domain: &Domain) -> Result<Self> {
        let grid = *domain.grid();
        let empty = Stencil {
            shifts: Vec::new(),
            second: [0.0; MAX_DIM],
            drift: [0.0; MAX_DIM],
            far_mass: 0.0,
            snap_error: 0.0,
        };
        let mut stencils = Vec::with_capacity(grid.len());
        for x in 0..grid.len() {
            match censor(measure, domain, x) {
                Ok(m) => stencils.push(Stencil::from_measure(&m, &grid)?),
                Err(_) => stencils.push(empty.clone()),
            }
        }
        let mask = if domain.is_whole() { None } else { Some(domain.inside().to_vec()) };
        Ok(Self { grid, stencils, far_mask: mask })
    }

    pub fn stencil(&self, idx: usize) -> &Stencil {
        &self.stencils[idx]
    }

    /// Largest snapping distance over all points.
    pub fn snap_error(&self) -> f64 {
        self.stencils.iter().map(|s| s.snap_error).fold(0.0, f64::max)
    }
}

impl NonlocalOperator for PointwiseOperator {
    fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        let mean = masked_mean(u, self.far_mask.as_deref());
        let (g, st) = (&self.grid, &self.stencils);
        par::fill(out, |i| st[i].eval(g, u, i, mean));
    }

    fn diagonal_weight(&self) -> f64 {
        self.stencils.iter().map(|s| s.diagonal_weight(&self.grid)).fold(0.0, f64::max)
    }
}

/// Applies `op` to a field.
pub fn apply_operator(op: &dyn NonlocalOperator, field: &GridField) -> Result<GridField> {
    if op.grid() != field.grid() {
        return Err(invalid("field", "grid differs from the operator grid"));
    }
    let mut out = vec![0.0; field.values().len()];
    op.apply(field.values(), &mut out);
    GridField::new(*field.grid(), out)
}
