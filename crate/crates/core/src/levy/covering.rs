use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{JumpFunction, LevyMeasureSpec};
use crate::error::{invalid, Result};
use crate::grid::{PeriodicGrid, Point, MAX_DIM};
use crate::math;

/// Outcome of the iterated reachability computation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringReport {
    /// Smallest `n` with `X_0 ∪ … ∪ X_n` equal to the whole grid for every
    /// tested start, or `None` when `max_iter` was exhausted.
    pub n_star: Option<usize>,
    /// Size of the accumulated reachable set after each iteration, for the
    /// slowest tested start.
    pub history: Vec<usize>,
    pub tested_points: usize,
    /// Largest distance between an image point and the node it was snapped to.
    pub max_snap_error: f64,
    /// Covering failed while some support offsets were not lattice vectors,
    /// so the failure may be an artifact of the grid.
    pub grid_resolution_limited: bool,
}

impl CoveringReport {
    pub fn covered(&self) -> bool {
        self.n_star.is_some()
    }
}

/// Start points: every node for `n ≤ 64`, otherwise the origin plus 16
/// seeded random nodes.
fn start_points(grid: &PeriodicGrid, seed: u64) -> Vec<usize> {
    if grid.n() <= 64 {
        return (0..grid.len()).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![0usize];
    while pts.len() < 17 {
        let p = rng.gen_range(0..grid.len());
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

fn snap(grid: &PeriodicGrid, y: &Point) -> (usize, f64) {
    let h = grid.h();
    let n = grid.n() as i64;
    let mut ij = [0usize; MAX_DIM];
    let mut err2 = 0.0;
    for k in 0..grid.dim() {
        let t = y[k] / h - 0.5;
        let r = math::round(t);
        err2 += (t - r) * (t - r) * h * h;
        ij[k] = (r as i64).rem_euclid(n) as usize;
    }
    (grid.flatten(ij), math::sqrt(err2))
}

/// Iterates `X_{n+1} = ∪_{ξ ∈ X_n} (ξ + j(ξ, supp ν))` on the grid, snapping
/// images to the nearest node, until the accumulated set covers every node.
pub fn covering_check(
    spec: &LevyMeasureSpec,
    jump: &JumpFunction,
    grid: &PeriodicGrid,
    max_iter: usize,
    seed: u64,
) -> Result<CoveringReport> {
    if max_iter == 0 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    spec.validate(grid.dim())?;
    let offsets = spec.support_offsets(grid);
    let h = grid.h();
    let aligned = offsets.iter().all(|z| {
        (0..grid.dim()).all(|k| {
            let t = z[k] / h;
            (t - math::round(t)).abs() < 1e-9
        })
    });
    // translation invariance: one start suffices for x-independent jumps
    let starts = if jump.is_uniform() { vec![0] } else { start_points(grid, seed) };
    let total = grid.len();
    let mut worst: Option<usize> = Some(0);
    let mut history = Vec::new();
    let mut max_snap: f64 = 0.0;
    for &x in &starts {
        let mut reached = vec![false; total];
        reached[x] = true;
        let mut count = 1;
        let mut current: BTreeSet<usize> = BTreeSet::new();
        current.insert(x);
        let mut local_history = vec![count];
        let mut n_star = if count == total { Some(0) } else { None };
        let mut iter = 0;
        while n_star.is_none() && iter < max_iter {
            iter += 1;
            let mut next = BTreeSet::new();
            for &xi in &current {
                let p = grid.point(xi);
                for z in &offsets {
                    let jz = jump.apply(xi, z);
                    let mut y = [0.0; MAX_DIM];
                    for k in 0..grid.dim() {
                        y[k] = p[k] + jz[k];
                    }
                    let (node, err) = snap(grid, &y);
                    max_snap = max_snap.max(err);
                    next.insert(node);
                }
            }
            for &node in &next {
                if !reached[node] {
                    reached[node] = true;
                    count += 1;
                }
            }
            local_history.push(count);
            if count == total {
                n_star = Some(iter);
            }
            if next == current {
                // X_n is periodic with period 1 from here on
                break;
            }
            current = next;
        }
        match (n_star, worst) {
            (Some(k), Some(w)) => {
                if k >= w {
                    worst = Some(k);
                    history = local_history;
                }
            }
            (None, Some(_)) => {
                worst = None;
                history = local_history;
            }
            (_, None) => {}
        }
    }
    Ok(CoveringReport {
        n_star: worst,
        history,
        tested_points: starts.len(),
        max_snap_error: max_snap,
        grid_resolution_limited: worst.is_none() && !aligned,
    })
}
