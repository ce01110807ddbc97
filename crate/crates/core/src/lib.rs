//! Numerical laboratory for nonlocal Hamilton–Jacobi equations with coercive
//! gradient terms on the periodic torus.
//!
//! The crate is `no_std` with `alloc`. Enable the `std` feature for
//! `std::error::Error` integration, and `parallel` to evaluate per-point
//! updates with rayon.
//!
//! Module map:
//!
//! * [`grid`]: periodic grids, scalar fields, ball domains and one-sided slopes.
//! * [`levy`]: Lévy measure catalog, quadrature, censoring, jump functions,
//!   push-forwards, moment bounds and the covering-property reachability check.
//! * [`nonlocal`]: evaluation of the discrete nonlocal operators, the folded
//!   stencils used by the solver and the spectral oracle.
//! * [`hamiltonian`]: coercive Hamiltonians and the monotone upwind flux.
//! * [`barrier`]: the power-profile barrier and its strict-supersolution
//!   certification.
//! * [`solver`]: explicit monotone time marching and the discounted problem.
//! * [`ergodic`]: vanishing discount, long-time slope and large-time gap.
//! * [`analysis`]: modulus of continuity, Hölder fits and oscillation.
#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
pub(crate) mod math;
mod par;

pub mod analysis;
pub mod barrier;
pub mod ergodic;
pub mod grid;
pub mod hamiltonian;
pub mod levy;
pub mod nonlocal;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Domain, GridField, PeriodicGrid, Point};
