use alloc::vec::Vec;

use super::{norm, IDENTITY};
use crate::error::{invalid, Error, Result};
use crate::grid::{GridField, PeriodicGrid, Point, MAX_DIM};
use crate::math;

pub type Matrix = [[f64; MAX_DIM]; MAX_DIM];

#[derive(Debug, Clone, PartialEq)]
pub enum JumpKind {
    /// `j(x, z) = z`.
    Identity,
    /// `j(x, z) = g(x) z`.
    Scaled(GridField),
    /// `j(x, z) = M(x) z` with one matrix per grid point.
    Table(Vec<Matrix>),
}

/// Jump function of a Lévy–Ito operator, linear in `z` at each grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpFunction {
    kind: JumpKind,
    cj: f64,
    dim: usize,
}

impl JumpFunction {
    pub fn identity(grid: &PeriodicGrid) -> Self {
        Self { kind: JumpKind::Identity, cj: 1.0, dim: grid.dim() }
    }

    /// `j(x, z) = g(x) z`; `C_j = sup |g|`.
    pub fn scaled(g: GridField) -> Result<Self> {
        let cj = g.sup_norm();
        let dim = g.grid().dim();
        Ok(Self { kind: JumpKind::Scaled(g), cj, dim })
    }

    /// Constant dilation `j(x, z) = c z`.
    pub fn dilation(grid: &PeriodicGrid, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFinite("dilation"));
        }
        Self::scaled(GridField::constant(*grid, c))
    }

    pub fn table(grid: &PeriodicGrid, matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.len() != grid.len() {
            return Err(Error::ShapeMismatch { expected: grid.len(), found: matrices.len() });
        }
        if matrices.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("jump table"));
        }
        let dim = grid.dim();
        let mut cj: f64 = 0.0;
        for m in &matrices {
            cj = cj.max(spectral_norm(dim, m));
        }
        Ok(Self { kind: JumpKind::Table(matrices), cj, dim })
    }

    pub fn kind(&self) -> &JumpKind {
        &self.kind
    }

    /// The constant `C_j` with `|j(x, z)| ≤ C_j |z|`.
    pub fn cj(&self) -> f64 {
        self.cj
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, JumpKind::Identity)
    }

    /// True when `j` does not depend on `x`.
    pub fn is_uniform(&self) -> bool {
        match &self.kind {
            JumpKind::Identity => true,
            JumpKind::Scaled(g) => g.values().iter().all(|v| *v == g.values()[0]),
            JumpKind::Table(t) => t.iter().all(|m| *m == t[0]),
        }
    }

    pub fn matrix_at(&self, idx: usize) -> Matrix {
        match &self.kind {
            JumpKind::Identity => IDENTITY,
            JumpKind::Scaled(g) => {
                let s = g.get(idx);
                [[s, 0.0], [0.0, s]]
            }
            JumpKind::Table(t) => t[idx],
        }
    }

    /// Local Lipschitz factor `|j(x, ·)|` at a grid point.
    pub fn scale_at(&self, idx: usize) -> f64 {
        match &self.kind {
            JumpKind::Identity => 1.0,
            JumpKind::Scaled(g) => g.get(idx).abs(),
            JumpKind::Table(t) => spectral_norm(self.dim, &t[idx]),
        }
    }

    pub fn apply(&self, idx: usize, z: &Point) -> Point {
        let m = self.matrix_at(idx);
        let mut y = [0.0; MAX_DIM];
        for r in 0..self.dim {
            for c in 0..self.dim {
                y[r] += m[r][c] * z[c];
            }
        }
        y
    }

    /// Sampled check of `|j(x, z)| ≤ C_j |z|` over every grid point and the
    /// given offsets. Returns the worst ratio `|j(x,z)| / |z|`.
    pub fn check_growth(&self, grid: &PeriodicGrid, offsets: &[Point]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for idx in 0..grid.len() {
            for z in offsets {
                let nz = norm(self.dim, z);
                if nz == 0.0 {
                    continue;
                }
                worst = worst.max(norm(self.dim, &self.apply(idx, z)) / nz);
            }
        }
        if worst > self.cj * (1.0 + 1e-12) {
            return Err(invalid("jump", "growth bound |j(x,z)| <= C_j |z| violated"));
        }
        Ok(worst)
    }
}

fn spectral_norm(dim: usize, m: &Matrix) -> f64 {
    if dim == 1 {
        return m[0][0].abs();
    }
    // largest singular value of a 2x2 matrix
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = math::sqrt((s1 * s1 - 4.0 * det * det).max(0.0));
    math::sqrt(0.5 * (s1 + disc))
}
