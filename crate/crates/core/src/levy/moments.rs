use alloc::vec::Vec;

use super::{norm, QuadratureMeasure};
use crate::error::{invalid, Result};
use crate::math;

/// `h_{α,σ}(δ)`: `δ^{α-σ}` if `α < σ`, `|ln δ| + 1` if `α = σ`, `1` otherwise.
pub fn h_alpha_sigma(alpha: f64, sigma: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(invalid("delta", "must be positive"));
    }
    if !(0.0..=2.0).contains(&alpha) {
        return Err(invalid("alpha", "must lie in [0, 2]"));
    }
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(invalid("sigma", "order must lie in (0, 2)"));
    }
    Ok(if alpha < sigma {
        math::powf(delta, alpha - sigma)
    } else if alpha == sigma {
        math::ln(delta).abs() + 1.0
    } else {
        1.0
    })
}

/// One `(α, δ)` entry of a moment report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEntry {
    pub alpha: f64,
    pub delta: f64,
    pub measured: f64,
    /// `h_{α,σ}(δ)` for tail entries, `δ^{α-σ}` for small-ball entries.
    pub profile: f64,
    /// `C_R × profile`.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    /// Tail integrals `∫_{|z|≥δ} min{1,|z|^α} ν(dz)`.
    pub tail: Vec<MomentEntry>,
    /// Small-ball integrals `∫_{|z|<δ} |z|^α ν(dz)`, for `α > σ` and `δ < 1`.
    pub small_ball: Vec<MomentEntry>,
    /// Smallest constant making every entry pass.
    pub fitted_c: f64,
    /// Constant the entries were judged against.
    pub c_used: f64,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.tail.iter().chain(&self.small_ball).all(|e| e.pass)
    }
}

fn min1_pow(r: f64, alpha: f64) -> f64 {
    if alpha == 0.0 || r >= 1.0 {
        1.0
    } else {
        math::powf(r, alpha)
    }
}

/// `Σ_{|z_k| ≥ δ} μ_k min{1,|z_k|^α}` plus the analytic near and far parts.
fn tail_sum(m: &QuadratureMeasure, alpha: f64, delta: f64) -> f64 {
    // sum in sorted order so the result does not depend on atom labelling
    let mut terms: Vec<f64> = m
        .atoms
        .iter()
        .filter_map(|a| {
            let r = norm(m.dim, &a.offset);
            (r >= delta && r > 0.0).then(|| a.weight * min1_pow(r, alpha))
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    let mut s: f64 = terms.iter().sum();
    if delta < m.r_cut {
        let hi = m.r_cut.min(1.0);
        s += m.near_annulus(alpha, delta, hi);
    }
    s + m.far_mass
}

fn small_ball_sum(m: &QuadratureMeasure, alpha: f64, delta: f64) -> f64 {
    let mut terms: Vec<f64> = m
        .atoms
        .iter()
        .filter_map(|a| {
            let r = norm(m.dim, &a.offset);
            (r < delta).then(|| a.weight * math::powf(r, alpha))
        })
        .collect();
    terms.sort_by(f64::total_cmp);
    let s: f64 = terms.iter().sum();
    s + m.near_annulus(alpha, 0.0, delta)
}

/// Evaluates (M1) tail sums for every `(α, δ)` and (M2) small-ball sums for
/// `α > σ`, `δ < 1`. When `c_r` is `None` the fitted constant is used, so the
/// report passes by construction unless a sum is infinite.
pub fn check_moment_bounds(
    measure: &QuadratureMeasure,
    sigma: f64,
    alphas: &[f64],
    deltas: &[f64],
    c_r: Option<f64>,
) -> Result<MomentReport> {
    let mut tail = Vec::new();
    let mut small = Vec::new();
    let mut fitted: f64 = 0.0;
    for &alpha in alphas {
        for &delta in deltas {
            let profile = h_alpha_sigma(alpha, sigma, delta)?;
            let measured = tail_sum(measure, alpha, delta);
            fitted = fitted.max(measured / profile);
            tail.push(MomentEntry { alpha, delta, measured, profile, bound: 0.0, pass: false });
            if alpha > sigma && delta < 1.0 {
                let profile = math::powf(delta, alpha - sigma);
                let measured = small_ball_sum(measure, alpha, delta);
                fitted = fitted.max(measured / profile);
                small.push(MomentEntry { alpha, delta, measured, profile, bound: 0.0, pass: false });
            }
        }
    }
    let c_used = c_r.unwrap_or(fitted);
    for e in tail.iter_mut().chain(small.iter_mut()) {
        e.bound = c_used * e.profile;
        e.pass = e.measured <= e.bound * (1.0 + 1e-12);
    }
    Ok(MomentReport { tail, small_ball: small, fitted_c: fitted, c_used })
}
