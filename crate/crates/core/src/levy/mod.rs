//! Lévy measures: the kernel catalog, their quadrature on a periodic grid,
//! censoring against a domain, push-forwards through jump functions, moment
//! bounds and the covering-property reachability check.

mod covering;
mod jump;
mod moments;

pub use covering::{covering_check, CoveringReport};
pub use jump::{JumpFunction, JumpKind};
pub use moments::{check_moment_bounds, h_alpha_sigma, MomentEntry, MomentReport};

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::grid::{Domain, PeriodicGrid, Point, MAX_DIM};
use crate::math;

/// Default truncation radius for the far field, in torus periods.
pub const DEFAULT_R_MAX: f64 = 4.0;

/// Normalizing constant in front of the power kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `C = 1`.
    #[default]
    Plain,
    /// The fractional Laplacian constant `C_{N,σ}`, so that the operator has
    /// Fourier symbol `-|2πk|^σ`.
    Exact,
}

/// A Lévy measure declared by kind and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasureSpec {
    /// `C |z|^{-(N+σ)} dz`.
    Fractional { sigma: f64, normalization: Normalization },
    /// `C 1_{⟨z, e⟩ > 0} |z|^{-(N+σ)} dz` for a coordinate direction `e = ±e_axis`.
    HalfspaceFractional { sigma: f64, axis: usize, positive: bool, normalization: Normalization },
    /// Sum of one-dimensional fractional kernels on the two coordinate axes (2D only).
    Crossed { sigma1: f64, sigma2: f64, normalization: Normalization },
    /// Finitely many atoms; `sigma` is the declared order used for compensation.
    Finite { atoms: Vec<(Point, f64)>, sigma: f64 },
}

impl LevyMeasureSpec {
    pub fn fractional(sigma: f64) -> Self {
        Self::Fractional { sigma, normalization: Normalization::Plain }
    }

    pub fn fractional_exact(sigma: f64) -> Self {
        Self::Fractional { sigma, normalization: Normalization::Exact }
    }

    /// Declared order σ used for (M1)/(M2) and the compensation order.
    pub fn sigma(&self) -> f64 {
        match self {
            Self::Fractional { sigma, .. } | Self::HalfspaceFractional { sigma, .. } => *sigma,
            Self::Crossed { sigma1, sigma2, .. } => sigma1.max(*sigma2),
            Self::Finite { sigma, .. } => *sigma,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check_sigma = |s: f64| {
            if s > 0.0 && s < 2.0 {
                Ok(())
            } else {
                Err(invalid("sigma", "order must lie in (0, 2)"))
            }
        };
        match self {
            Self::Fractional { sigma, .. } => check_sigma(*sigma),
            Self::HalfspaceFractional { sigma, axis, .. } => {
                check_sigma(*sigma)?;
                if *axis >= dim {
                    return Err(invalid("axis", "half-space direction exceeds grid dimension"));
                }
                Ok(())
            }
            Self::Crossed { sigma1, sigma2, .. } => {
                check_sigma(*sigma1)?;
                check_sigma(*sigma2)?;
                if dim != 2 {
                    return Err(invalid("measure", "crossed measure requires a 2D grid"));
                }
                Ok(())
            }
            Self::Finite { atoms, sigma } => {
                check_sigma(*sigma)?;
                if atoms.iter().any(|(_, m)| !(*m >= 0.0) || !m.is_finite()) {
                    return Err(invalid("mass", "finite-measure masses must be finite and >= 0"));
                }
                Ok(())
            }
        }
    }

    /// Membership of an offset in the closed support `supp ν`.
    pub fn in_support(&self, z: &Point, dim: usize) -> bool {
        match self {
            Self::Fractional { .. } => true,
            Self::HalfspaceFractional { axis, positive, .. } => {
                if *positive {
                    z[*axis] >= 0.0
                } else {
                    z[*axis] <= 0.0
                }
            }
            Self::Crossed { .. } => z[0] == 0.0 || z[1] == 0.0,
            Self::Finite { atoms, .. } => {
                atoms.iter().any(|(a, m)| *m > 0.0 && (0..dim).all(|k| (a[k] - z[k]).abs() <= 1e-12))
            }
        }
    }

    /// Support offsets on the grid lattice within one period (continuous
    /// kinds), or the atom offsets themselves (finite kind).
    pub fn support_offsets(&self, grid: &PeriodicGrid) -> Vec<Point> {
        if let Self::Finite { atoms, .. } = self {
            return atoms.iter().filter(|(_, m)| *m > 0.0).map(|(a, _)| *a).collect();
        }
        let n = grid.n() as i64;
        let h = grid.h();
        let lo = -(n / 2) + 1 - (n % 2);
        let hi = n / 2;
        let mut out = Vec::new();
        let range1 = lo..=hi;
        if grid.dim() == 1 {
            for i in range1 {
                let z = [i as f64 * h, 0.0];
                if self.in_support(&z, 1) {
                    out.push(z);
                }
            }
        } else {
            for j in lo..=hi {
                for i in lo..=hi {
                    let z = [i as f64 * h, j as f64 * h];
                    if self.in_support(&z, 2) {
                        out.push(z);
                    }
                }
            }
        }
        out
    }
}

/// `C_{N,σ} = σ 2^{σ-1} Γ((N+σ)/2) / (π^{N/2} Γ(1 - σ/2))`.
pub fn fractional_constant(dim: usize, sigma: f64) -> f64 {
    let n = dim as f64;
    sigma * math::powf(2.0, sigma - 1.0) * math::gamma((n + sigma) / 2.0)
        / (math::powf(math::PI, n / 2.0) * math::gamma(1.0 - sigma / 2.0))
}

fn constant_for(norm: Normalization, dim: usize, sigma: f64) -> f64 {
    match norm {
        Normalization::Plain => 1.0,
        Normalization::Exact => fractional_constant(dim, sigma),
    }
}

/// Analytic radial power kernel `c |z|^{-(d+s)}` restricted to a cone of
/// solid angle `angle` in dimension `d`, used for near-origin moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPiece {
    pub c: f64,
    pub s: f64,
    /// Surface measure of the directions carried (2 for a full line, π for a
    /// half-plane in 2D, ...).
    pub angle: f64,
}

impl PowerPiece {
    /// `∫_{a ≤ |z| < b} |z|^α ν(dz)`.
    pub fn annulus(&self, alpha: f64, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let e = alpha - self.s;
        if e.abs() < 1e-14 {
            self.c * self.angle * (math::ln(b) - math::ln(a))
        } else if a == 0.0 {
            if e > 0.0 {
                self.c * self.angle * math::powf(b, e) / e
            } else {
                f64::INFINITY
            }
        } else {
            self.c * self.angle * (math::powf(b, e) - math::powf(a, e)) / e
        }
    }
}

/// One quadrature atom: jump offset and its weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub offset: Point,
    pub weight: f64,
}

/// Discretized Lévy measure: far-field atoms on the lattice plus near-origin
/// moments consumed by the second-difference correction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMeasure {
    pub dim: usize,
    pub sigma: f64,
    /// Atoms at lattice offsets covering `r_cut ≤ |z| ≤ r_max`, stored in `±z`
    /// pairs for symmetric kinds.
    pub atoms: Vec<Atom>,
    /// `∫_{|z|<r_cut} |z|² ν(dz)`.
    pub near_second_moment: f64,
    /// `∫_{|z|<r_cut} |z| ν(dz)`; `None` when divergent (σ ≥ 1).
    pub near_first_moment: Option<f64>,
    /// Per-axis split of the near second moment, `∫_{|z|<r_cut} z_k² ν(dz)`.
    pub near_axis_second: Point,
    /// Signed near first moment `∫_{|z|<r_cut} z ν(dz)` (used when σ < 1).
    pub near_drift: Point,
    /// Per-axis `Σ (∫_cell z_k² ν - μ_k z_k²)` over atoms with `|z| ≤ 1`:
    /// the second-moment defect of nodal quadrature.
    pub second_moment_defect: Point,
    /// 2 if σ ≥ 1, else 1.
    pub compensation_order: u8,
    pub r_cut: f64,
    pub r_max: f64,
    /// Mass beyond `r_max`, spread uniformly over the torus.
    pub far_mass: f64,
    /// Restriction of the far mass to a set of grid points (after censoring).
    pub far_mask: Option<Vec<bool>>,
    /// Analytic near-origin kernel pieces, when the kind is a power kernel.
    pub near_kernel: Vec<PowerPiece>,
    pub symmetric: bool,
}

impl QuadratureMeasure {
    pub fn total_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `∫_{|z|<r} |z|^α ν(dz)` over the near region, for `r ≤ r_cut`.
    pub fn near_moment(&self, alpha: f64, r: f64) -> f64 {
        self.near_kernel.iter().map(|p| p.annulus(alpha, 0.0, r.min(self.r_cut))).sum()
    }

    /// `∫_{a ≤ |z| < b} |z|^α ν(dz)` inside the near region.
    fn near_annulus(&self, alpha: f64, a: f64, b: f64) -> f64 {
        let b = b.min(self.r_cut);
        self.near_kernel.iter().map(|p| p.annulus(alpha, a, b)).sum()
    }

    /// `Σ μ_k z_k`, summed in storage order.
    pub fn first_moment_sum(&self) -> Point {
        let mut s = [0.0; MAX_DIM];
        for a in &self.atoms {
            for k in 0..self.dim {
                s[k] += a.weight * a.offset[k];
            }
        }
        s
    }

    /// Checks that atoms pair up as `(z, μ), (-z, μ)` in adjacent slots.
    pub fn is_pairwise_symmetric(&self) -> bool {
        if self.atoms.len() % 2 != 0 {
            return false;
        }
        self.atoms
            .chunks(2)
            .all(|p| p[0].weight == p[1].weight && (0..MAX_DIM).all(|k| p[0].offset[k] == -p[1].offset[k]))
    }
}

/// Discretizes `spec` on `grid` with near/far split at `r_cut` and truncation
/// at `r_max` periods.
pub fn discretize(spec: &LevyMeasureSpec, grid: &PeriodicGrid, r_cut: f64, r_max: f64) -> Result<QuadratureMeasure> {
    let dim = grid.dim();
    spec.validate(dim)?;
    let h = grid.h();
    if r_cut < 0.5 * h * (1.0 - 1e-12) {
        return Err(Error::SingularCell { dist: r_cut, r_cut: 0.5 * h });
    }
    if !(r_max > r_cut) || r_max > DEFAULT_R_MAX * (1.0 + 1e-12) {
        return Err(invalid("r_max", "must satisfy r_cut < r_max <= 4 periods"));
    }
    let sigma = spec.sigma();
    let order = if sigma >= 1.0 { 2 } else { 1 };
    let mut m = QuadratureMeasure {
        dim,
        sigma,
        atoms: Vec::new(),
        near_second_moment: 0.0,
        near_first_moment: None,
        near_axis_second: [0.0; MAX_DIM],
        near_drift: [0.0; MAX_DIM],
        second_moment_defect: [0.0; MAX_DIM],
        compensation_order: order,
        r_cut,
        r_max,
        far_mass: 0.0,
        far_mask: None,
        near_kernel: Vec::new(),
        symmetric: true,
    };

    match spec {
        LevyMeasureSpec::Fractional { sigma, normalization } => {
            let c = constant_for(*normalization, dim, *sigma);
            if dim == 1 {
                line_atoms(&mut m, h, c, *sigma, 0, Sides::Both);
                m.near_kernel.push(PowerPiece { c, s: *sigma, angle: 2.0 });
                m.far_mass = 2.0 * c * math::powf(r_max, -sigma) / sigma;
            } else {
                plane_atoms(&mut m, grid, c, *sigma, None);
                m.near_kernel.push(PowerPiece { c, s: *sigma, angle: 2.0 * math::PI });
                m.far_mass = 2.0 * math::PI * c * math::powf(r_max, -sigma) / sigma;
            }
            m.near_second_moment = m.near_moment(2.0, r_cut);
            for k in 0..dim {
                m.near_axis_second[k] = m.near_second_moment / dim as f64;
            }
        }
        LevyMeasureSpec::HalfspaceFractional { sigma, axis, positive, normalization } => {
            let c = constant_for(*normalization, dim, *sigma);
            let sign = if *positive { 1.0 } else { -1.0 };
            m.symmetric = false;
            if dim == 1 {
                line_atoms(&mut m, h, c, *sigma, 0, if *positive { Sides::Plus } else { Sides::Minus });
                m.near_kernel.push(PowerPiece { c, s: *sigma, angle: 1.0 });
                m.far_mass = c * math::powf(r_max, -sigma) / sigma;
                if *sigma < 1.0 {
                    m.near_drift[0] = sign * c * math::powf(r_cut, 1.0 - sigma) / (1.0 - sigma);
                }
            } else {
                plane_atoms(&mut m, grid, c, *sigma, Some((*axis, sign)));
                m.near_kernel.push(PowerPiece { c, s: *sigma, angle: math::PI });
                m.far_mass = math::PI * c * math::powf(r_max, -sigma) / sigma;
                if *sigma < 1.0 {
                    m.near_drift[*axis] = sign * 2.0 * c * math::powf(r_cut, 1.0 - sigma) / (1.0 - sigma);
                }
            }
            m.near_second_moment = m.near_moment(2.0, r_cut);
            for k in 0..dim {
                m.near_axis_second[k] = m.near_second_moment / dim as f64;
            }
        }
        LevyMeasureSpec::Crossed { sigma1, sigma2, normalization } => {
            let c1 = constant_for(*normalization, 1, *sigma1);
            let c2 = constant_for(*normalization, 1, *sigma2);
            line_atoms(&mut m, h, c1, *sigma1, 0, Sides::Both);
            line_atoms(&mut m, h, c2, *sigma2, 1, Sides::Both);
            let p1 = PowerPiece { c: c1, s: *sigma1, angle: 2.0 };
            let p2 = PowerPiece { c: c2, s: *sigma2, angle: 2.0 };
            m.near_axis_second = [p1.annulus(2.0, 0.0, r_cut), p2.annulus(2.0, 0.0, r_cut)];
            m.near_kernel.push(p1);
            m.near_kernel.push(p2);
            m.near_second_moment = m.near_axis_second[0] + m.near_axis_second[1];
            m.far_mass =
                2.0 * c1 * math::powf(r_max, -sigma1) / sigma1 + 2.0 * c2 * math::powf(r_max, -sigma2) / sigma2;
        }
        LevyMeasureSpec::Finite { atoms, .. } => {
            m.r_cut = r_cut;
            for (z, w) in atoms {
                if *w > 0.0 {
                    m.atoms.push(Atom { offset: *z, weight: *w });
                }
            }
            m.symmetric = m.is_pairwise_symmetric();
        }
    }
    if sigma < 1.0 {
        m.near_first_moment = Some(m.near_moment(1.0, r_cut));
    }
    Ok(m)
}

/// Discretizes with the default split `r_cut = h/2`, `r_max = 4`.
pub fn discretize_default(spec: &LevyMeasureSpec, grid: &PeriodicGrid) -> Result<QuadratureMeasure> {
    discretize(spec, grid, 0.5 * grid.h(), DEFAULT_R_MAX)
}

#[derive(Clone, Copy, PartialEq)]
enum Sides {
    Both,
    Plus,
    Minus,
}

/// Atoms of `c |t|^{-1-s}` along one axis with analytic cell integrals.
fn line_atoms(m: &mut QuadratureMeasure, h: f64, c: f64, s: f64, axis: usize, sides: Sides) {
    let r_cut = m.r_cut;
    let r_max = m.r_max;
    let jmax = math::ceil(r_max / h - 0.5) as i64 + 1;
    for j in 1..=jmax {
        let a = ((j as f64 - 0.5) * h).max(r_cut);
        let b = ((j as f64 + 0.5) * h).min(r_max);
        if b <= a {
            continue;
        }
        let w = c / s * (math::powf(a, -s) - math::powf(b, -s));
        let z = j as f64 * h;
        if z <= 1.0 {
            let cell2 = c / (2.0 - s) * (math::powf(b, 2.0 - s) - math::powf(a, 2.0 - s));
            let copies = if sides == Sides::Both { 2.0 } else { 1.0 };
            m.second_moment_defect[axis] += copies * (cell2 - w * z * z);
        }
        let mut plus = [0.0; MAX_DIM];
        plus[axis] = z;
        let mut minus = [0.0; MAX_DIM];
        minus[axis] = -z;
        match sides {
            Sides::Both => {
                m.atoms.push(Atom { offset: plus, weight: w });
                m.atoms.push(Atom { offset: minus, weight: w });
            }
            Sides::Plus => m.atoms.push(Atom { offset: plus, weight: w }),
            Sides::Minus => m.atoms.push(Atom { offset: minus, weight: w }),
        }
    }
}

/// Midpoint-rule atoms of `c |z|^{-2-s}` on the 2D lattice, optionally
/// restricted to a half-plane `sign * z_axis > 0` (boundary line included
/// with half weight).
fn plane_atoms(m: &mut QuadratureMeasure, grid: &PeriodicGrid, c: f64, s: f64, half: Option<(usize, f64)>) {
    let h = grid.h();
    let jmax = math::floor(m.r_max / h) as i64;
    let cell = h * h;
    for j in 0..=jmax {
        for i in -jmax..=jmax {
            // canonical representative of each ± pair: j > 0, or j == 0 and i > 0
            if j == 0 && i <= 0 {
                continue;
            }
            let z = [i as f64 * h, j as f64 * h];
            let r = math::sqrt(z[0] * z[0] + z[1] * z[1]);
            if r < m.r_cut || r > m.r_max {
                continue;
            }
            let w = cell * c * math::powf(r, -2.0 - s);
            let neg = [-z[0], -z[1]];
            match half {
                None => {
                    m.atoms.push(Atom { offset: z, weight: w });
                    m.atoms.push(Atom { offset: neg, weight: w });
                }
                Some((axis, sign)) => {
                    let t = sign * z[axis];
                    if t > 0.0 {
                        m.atoms.push(Atom { offset: z, weight: w });
                    } else if t < 0.0 {
                        m.atoms.push(Atom { offset: neg, weight: w });
                    } else {
                        m.atoms.push(Atom { offset: z, weight: 0.5 * w });
                        m.atoms.push(Atom { offset: neg, weight: 0.5 * w });
                    }
                }
            }
        }
    }
}

/// Restricts the measure seen from grid point `x_idx` to jumps landing in `Ω`:
/// `1_{Ω - x}(z) ν(dz)`. Near moments are kept, which requires the near
/// ball to lie inside `Ω` (`d_Ω(x) > r_cut`).
pub fn censor(measure: &QuadratureMeasure, domain: &Domain, x_idx: usize) -> Result<QuadratureMeasure> {
    let grid = domain.grid();
    if !domain.contains_index(x_idx) {
        return Err(Error::OutsideDomain);
    }
    let d = domain.dist()[x_idx];
    if d <= measure.r_cut {
        return Err(Error::SingularCell { dist: d, r_cut: measure.r_cut });
    }
    if domain.is_whole() {
        return Ok(measure.clone());
    }
    let x = grid.point(x_idx);
    let mut out = measure.clone();
    out.atoms = measure
        .atoms
        .iter()
        .filter(|a| {
            let mut y = [0.0; MAX_DIM];
            for k in 0..grid.dim() {
                y[k] = x[k] + a.offset[k];
            }
            domain.contains(&y)
        })
        .copied()
        .collect();
    let inside = domain.inside().iter().filter(|b| **b).count();
    out.far_mass = measure.far_mass * inside as f64 / grid.len() as f64;
    out.far_mask = Some(domain.inside().to_vec());
    out.symmetric = out.is_pairwise_symmetric() && measure.symmetric;
    Ok(out)
}

/// Push-forward `ν_x^j` of the measure through `z ↦ j(x, z)` at grid point `x_idx`.
pub fn push_forward(measure: &QuadratureMeasure, jump: &JumpFunction, x_idx: usize) -> QuadratureMeasure {
    let mat = jump.matrix_at(x_idx);
    if mat == IDENTITY {
        return measure.clone();
    }
    let dim = measure.dim;
    let apply = |z: &Point| -> Point {
        let mut y = [0.0; MAX_DIM];
        for r in 0..dim {
            for c in 0..dim {
                y[r] += mat[r][c] * z[c];
            }
        }
        y
    };
    let drop_below = 0.5 * measure.r_cut;
    let mut out = measure.clone();
    out.atoms = measure
        .atoms
        .iter()
        .map(|a| Atom { offset: apply(&a.offset), weight: a.weight })
        .filter(|a| norm(dim, &a.offset) >= drop_below)
        .collect();
    // diagonal second moments transform as diag(M S Mᵀ) for diagonal S;
    // cross terms are dropped
    let mut axis2 = [0.0; MAX_DIM];
    let mut defect = [0.0; MAX_DIM];
    for r in 0..dim {
        for c in 0..dim {
            axis2[r] += mat[r][c] * mat[r][c] * measure.near_axis_second[c];
            defect[r] += mat[r][c] * mat[r][c] * measure.second_moment_defect[c];
        }
    }
    out.near_axis_second = axis2;
    out.second_moment_defect = defect;
    out.near_second_moment = axis2.iter().sum();
    out.near_drift = apply(&measure.near_drift);
    let scale = jump.scale_at(x_idx);
    out.near_first_moment = measure.near_first_moment.map(|f| f * scale);
    out.r_cut = measure.r_cut * scale;
    if scale == 0.0 {
        out.far_mass = 0.0;
        out.near_kernel.clear();
    } else {
        // |g z|^α ν: moments scale by |g|^α; absorb into the kernel constant
        // by rescaling r (ν_g(|y|<r) = ν(|z|<r/|g|)).
        for p in out.near_kernel.iter_mut() {
            p.c *= math::powf(scale, p.s);
        }
    }
    out.symmetric = measure.symmetric;
    out
}

pub(crate) const IDENTITY: [[f64; MAX_DIM]; MAX_DIM] = [[1.0, 0.0], [0.0, 1.0]];

pub(crate) fn norm(dim: usize, z: &Point) -> f64 {
    let mut s = 0.0;
    for k in 0..dim {
        s += z[k] * z[k];
    }
    math::sqrt(s)
}

#[cfg(test)]
mod tests;
