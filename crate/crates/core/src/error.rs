use alloc::string::String;
use core::fmt;

/// Errors raised by grid construction, quadrature, and the solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid dimension outside {1, 2}.
    UnsupportedDimension(usize),
    /// Fewer than 8 points per axis.
    GridTooCoarse(usize),
    /// `1/n * n` does not round to exactly 1.
    InexactSpacing(usize),
    /// Field length or grid mismatch.
    ShapeMismatch { expected: usize, found: usize },
    /// A field or parameter contains NaN or an infinity.
    NonFinite(&'static str),
    /// A parameter is outside its admissible range.
    InvalidParameter { name: &'static str, reason: String },
    /// The near-origin cell of the quadrature straddles a domain boundary.
    SingularCell { dist: f64, r_cut: f64 },
    /// A query point lies outside the region where it is defined.
    OutsideDomain,
    /// The explicit time step fell below its floor.
    TimeStepFloor { t: f64, dt: f64 },
    /// Pseudo-time iteration did not reach the residual tolerance.
    NotConverged { steps: usize, residual: f64, lambda: f64 },
    /// A computed fixed point violates its a-priori bound.
    BoundViolated { value: f64, bound: f64 },
    /// Doubling search for the barrier amplitude gave up.
    SelectionFailed { doublings: usize, last_c1: f64, min_margin: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDimension(d) => write!(f, "unsupported grid dimension {d} (expected 1 or 2)"),
            Error::GridTooCoarse(n) => write!(f, "grid too coarse: n = {n} < 8"),
            Error::InexactSpacing(n) => write!(f, "spacing 1/{n} is not exact in f64 arithmetic"),
            Error::ShapeMismatch { expected, found } => {
                write!(f, "shape mismatch: expected {expected} values, found {found}")
            }
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::SingularCell { dist, r_cut } => write!(
                f,
                "singular cell straddles the boundary: d = {dist:.3e} <= r_cut = {r_cut:.3e}"
            ),
            Error::OutsideDomain => write!(f, "point lies outside the domain"),
            Error::TimeStepFloor { t, dt } => write!(f, "time step floor reached at t = {t}: dt = {dt:.3e}"),
            Error::NotConverged { steps, residual, lambda } => write!(
                f,
                "lambda = {lambda}: no convergence after {steps} steps (residual {residual:.3e})"
            ),
            Error::BoundViolated { value, bound } => {
                write!(f, "a-priori bound violated: {value} > {bound}")
            }
            Error::SelectionFailed { doublings, last_c1, min_margin } => write!(
                f,
                "C1 selection aborted after {doublings} doublings (C1 = {last_c1:.3e}, min margin {min_margin:.3e}); quadrature likely mis-scaled"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
