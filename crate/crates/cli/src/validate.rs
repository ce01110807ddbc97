//! Hypothesis and consistency checks on a config, with derived quantities.

use std::fmt;

use nonlocal_hj_core::barrier::{gamma0_boundary, gamma0_interior};
use serde::Serialize;

use crate::config::Config;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Derived {
    pub sigma: f64,
    pub m: f64,
    pub theta: f64,
    pub gamma0_boundary: f64,
    pub gamma0_interior: f64,
    pub h0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub derived: Derived,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.derived;
        writeln!(f, "sigma = {}, m = {}, theta = {}", d.sigma, d.m, d.theta)?;
        writeln!(f, "gamma0 (boundary) = {}", d.gamma0_boundary)?;
        writeln!(f, "gamma0 (interior) = {}", d.gamma0_interior)?;
        match d.h0 {
            Some(h0) => writeln!(f, "H0 = {h0}")?,
            None => writeln!(f, "H0 = (Hamiltonian did not build)")?,
        }
        if self.diagnostics.is_empty() {
            writeln!(f, "config OK")
        } else {
            for diag in &self.diagnostics {
                writeln!(f, "error: {}: {}", diag.field, diag.message)?;
            }
            Ok(())
        }
    }
}

pub fn validate(cfg: &Config) -> ValidationReport {
    let mut diags = Vec::new();
    let mut push = |field: &str, message: String| diags.push(Diagnostic { field: field.into(), message });
    let sigma = cfg.measure.sigma();
    let m = cfg.hamiltonian.m;
    let theta = cfg.hamiltonian.theta;

    let grid = match cfg.grid() {
        Ok(g) => Some(g),
        Err(e) => {
            push("grid", e.to_string());
            None
        }
    };
    match cfg.measure.spec() {
        Ok(spec) => {
            if let Err(e) = spec.validate(cfg.grid.dim) {
                push("measure", e.to_string());
            }
        }
        Err(e) => push("measure", e.to_string()),
    }
    if !(m > 1.0_f64.max(sigma)) {
        push("hamiltonian.m", format!("need m > max(1, sigma) = {}, got {m}", 1.0_f64.max(sigma)));
    }
    if !(theta >= 0.0 && theta < m) {
        push("hamiltonian.theta", format!("need theta in [0, m), got {theta}"));
    }
    let mut h0 = None;
    if let Some(g) = &grid {
        match cfg.hamiltonian.build(g) {
            Ok(h) => h0 = Some(h.h0()),
            Err(e) => push("hamiltonian", e.to_string()),
        }
        if let Err(e) = cfg.jump.build(g) {
            push("jump", e.to_string());
        }
    }

    let b = &cfg.experiment.barrier;
    if let Err(e) = cfg.x0() {
        push("experiment.barrier.x0", e.to_string());
    }
    if !(b.r > 0.0 && b.r < 0.5) {
        push("experiment.barrier.r", format!("need r in (0, 1/2), got {}", b.r));
    }
    if b.c2 < 0.0 {
        push("experiment.barrier.c2", "must be nonnegative".into());
    }
    if let Some(gamma) = b.gamma {
        let g0 = b.gamma0(sigma, m, theta);
        if !(gamma > 0.0 && gamma <= g0) {
            push("experiment.barrier.gamma", format!("need gamma in (0, gamma0 = {g0}], got {gamma}"));
        }
    }
    let l = &cfg.experiment.ergodic.lambdas;
    if l.is_empty() || l.iter().any(|v| !(*v > 0.0)) || l.windows(2).any(|w| w[1] >= w[0]) {
        push("experiment.ergodic.lambdas", "must be positive and strictly decreasing".into());
    }
    if let Some(g) = &grid {
        if cfg.experiment.ergodic.x_ref >= g.len() {
            push("experiment.ergodic.x_ref", format!("must be below {}", g.len()));
        }
    }
    let e = &cfg.experiment.ergodic;
    if !(e.t1 > 0.0 && e.t2 > e.t1) {
        push("experiment.ergodic", "need 0 < t1 < t2".into());
    }
    let ltb = &cfg.experiment.ltb;
    if !(ltb.t_end > 0.0 && ltb.snapshot_dt > 0.0) {
        push("experiment.ltb", "t_end and snapshot_dt must be positive".into());
    }

    ValidationReport {
        diagnostics: diags,
        derived: Derived {
            sigma,
            m,
            theta,
            gamma0_boundary: gamma0_boundary(sigma, m, theta),
            gamma0_interior: gamma0_interior(sigma, m, theta),
            h0,
        },
    }
}
