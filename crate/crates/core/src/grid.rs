//! Uniform cell-centered grids on the unit torus, scalar fields and ball domains.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math;

/// Maximum supported dimension. Vectors are stored as `[f64; MAX_DIM]` with
/// unused trailing components equal to zero.
pub const MAX_DIM: usize = 2;

/// A point or offset on the torus. In 1D only the first component is used.
pub type Point = [f64; MAX_DIM];

/// Uniform grid on the unit torus with `n` cell-centered points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicGrid {
    dim: usize,
    n: usize,
}

impl PeriodicGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n < 8 {
            return Err(Error::GridTooCoarse(n));
        }
        if (1.0 / n as f64) * n as f64 != 1.0 {
            return Err(Error::InexactSpacing(n));
        }
        Ok(Self { dim, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Total number of points, `n^dim`.
    #[inline]
    pub fn len(&self) -> usize {
        if self.dim == 1 {
            self.n
        } else {
            self.n * self.n
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis integer coordinates of a flat index.
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; MAX_DIM] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    #[inline]
    pub fn flatten(&self, ij: [usize; MAX_DIM]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] + self.n * ij[1]
        }
    }

    /// Coordinates of grid point `idx`: `x_i = (i + 1/2) h` per axis.
    pub fn point(&self, idx: usize) -> Point {
        let ij = self.unflatten(idx);
        let h = self.h();
        let mut p = [0.0; MAX_DIM];
        for (k, c) in p.iter_mut().enumerate().take(self.dim) {
            *c = (ij[k] as f64 + 0.5) * h;
        }
        p
    }

    /// Index reached from `idx` by an integer shift per axis, wrapping periodically.
    #[inline]
    pub fn shift(&self, idx: usize, by: [i64; MAX_DIM]) -> usize {
        let ij = self.unflatten(idx);
        let n = self.n as i64;
        let mut out = [0usize; MAX_DIM];
        for k in 0..self.dim {
            out[k] = (ij[k] as i64 + by[k]).rem_euclid(n) as usize;
        }
        self.flatten(out)
    }

    /// Nearest grid index to an arbitrary point (periodic wrap).
    pub fn nearest(&self, p: &Point) -> usize {
        let n = self.n as i64;
        let mut ij = [0usize; MAX_DIM];
        for k in 0..self.dim {
            let i = math::floor(p[k] * self.n as f64) as i64;
            ij[k] = i.rem_euclid(n) as usize;
        }
        self.flatten(ij)
    }

    /// Periodic (minimum-image) distance between two points.
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        periodic_distance(self.dim, a, b)
    }
}

/// Minimum over images `m ∈ {-1, 0, 1}` per axis of `|a - b + m|`, combined
/// in the Euclidean norm. Coordinates are expected in `[0, 1)`; other values
/// are reduced modulo 1 first.
pub fn periodic_distance(dim: usize, a: &Point, b: &Point) -> f64 {
    let mut s = 0.0;
    for k in 0..dim {
        let mut d = a[k] - b[k];
        d -= math::floor(d);
        let mut best = f64::INFINITY;
        for m in [-1.0, 0.0, 1.0] {
            let v = (d + m).abs();
            if v < best {
                best = v;
            }
        }
        s += best * best;
    }
    math::sqrt(s)
}

/// Scalar field with one finite value per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid field"));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: PeriodicGrid, mut f: impl FnMut(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Field translated by an integer number of cells: `out(i) = self(i - by)`.
    pub fn shifted(&self, by: [i64; MAX_DIM]) -> Self {
        let mut out = vec![0.0; self.values.len()];
        for (i, v) in self.values.iter().enumerate() {
            out[self.grid.shift(i, by)] = *v;
        }
        Self { grid: self.grid, values: out }
    }

    /// Adds a constant to every value.
    pub fn offset(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v + c).collect() }
    }
}

/// Backward and forward difference quotients per axis at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSided {
    pub minus: Point,
    pub plus: Point,
}

/// `p_minus_k = (u(x) - u(x - h e_k)) / h`, `p_plus_k = (u(x + h e_k) - u(x)) / h`.
pub fn one_sided_gradients(field: &GridField, idx: usize) -> OneSided {
    one_sided_raw(field.grid(), field.values(), idx)
}

#[inline]
pub(crate) fn one_sided_raw(grid: &PeriodicGrid, u: &[f64], idx: usize) -> OneSided {
    let inv_h = grid.n() as f64;
    let mut out = OneSided { minus: [0.0; MAX_DIM], plus: [0.0; MAX_DIM] };
    let u0 = u[idx];
    for k in 0..grid.dim() {
        let mut e = [0i64; MAX_DIM];
        e[k] = 1;
        let fwd = u[grid.shift(idx, e)];
        e[k] = -1;
        let bwd = u[grid.shift(idx, e)];
        out.minus[k] = (u0 - bwd) * inv_h;
        out.plus[k] = (fwd - u0) * inv_h;
    }
    out
}

/// Bounded sub-domain of the torus given by a membership mask and the
/// distance to its boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    grid: PeriodicGrid,
    inside: Vec<bool>,
    dist: Vec<f64>,
    shape: DomainShape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DomainShape {
    Ball { center: Point, radius: f64 },
    Torus,
}

impl Domain {
    /// The open ball `B_radius(center)` with `d(x) = radius - |x - center|`.
    pub fn ball(grid: &PeriodicGrid, center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(invalid("radius", "ball radius must lie in (0, 0.5) to fit one period"));
        }
        let shape = DomainShape::Ball { center, radius };
        let mut inside = Vec::with_capacity(grid.len());
        let mut dist = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let d = shape_dist(grid.dim(), &shape, &grid.point(i));
            inside.push(d > 0.0);
            dist.push(d);
        }
        Ok(Self { grid: *grid, inside, dist, shape })
    }

    /// The whole torus as a domain. Its distance is the torus half-diameter
    /// everywhere, so censoring against it removes nothing.
    pub fn whole(grid: &PeriodicGrid) -> Self {
        let shape = DomainShape::Torus;
        let d = shape_dist(grid.dim(), &shape, &[0.0; MAX_DIM]);
        Self { grid: *grid, inside: vec![true; grid.len()], dist: vec![d; grid.len()], shape }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    /// `d_Ω` at every grid point (0 outside).
    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn contains_index(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    /// Exact membership of an arbitrary point.
    pub fn contains(&self, p: &Point) -> bool {
        self.dist_at(p) > 0.0
    }

    /// `d_Ω` evaluated analytically at an arbitrary point.
    pub fn dist_at(&self, p: &Point) -> f64 {
        shape_dist(self.grid.dim(), &self.shape, p)
    }

    pub fn is_whole(&self) -> bool {
        matches!(self.shape, DomainShape::Torus)
    }
}

fn shape_dist(dim: usize, shape: &DomainShape, p: &Point) -> f64 {
    match shape {
        DomainShape::Ball { center, radius } => (radius - periodic_distance(dim, p, center)).max(0.0),
        DomainShape::Torus => 0.5 * math::sqrt(dim as f64),
    }
}

/// Builds `Ω = B_radius(center)`.
pub fn ball_domain(grid: &PeriodicGrid, center: Point, radius: f64) -> Result<Domain> {
    Domain::ball(grid, center, radius)
}

/// Builds a grid, rejecting `dim ∉ {1, 2}` and `n < 8`.
pub fn make_grid(dim: usize, n: usize) -> Result<PeriodicGrid> {
    PeriodicGrid::new(dim, n)
}
