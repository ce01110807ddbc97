//! Experiment runner for the nonlocal Hamilton–Jacobi lab: JSON configs,
//! named experiments, CSV artifacts and a pass/fail `summary.json`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::Config;
pub use error::{CliError, Result};
pub use experiments::{run, Experiment};
pub use output::{Check, Summary};

/// Environment variable capping the rayon thread count.
pub const THREADS_ENV: &str = "NONLOCAL_HJ_THREADS";

/// Configures the global rayon pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(CliError::Invalid(format!("{THREADS_ENV} must be positive")));
        }
        // a pool may already exist when embedded in tests; keep it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
