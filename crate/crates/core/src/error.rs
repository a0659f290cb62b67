//! Crate-wide error type.

use crate::maps::BranchId;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Quadrature refinement hit the level cap without the level-to-level
    /// difference shrinking; the integral is divergent or too hard.
    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),

    /// The integrand denominator vanishes somewhere the chosen exponent
    /// cannot absorb (interior zero, or an endpoint zero with p > 1/2).
    #[error("non-integrable singularity: {0}")]
    NonIntegrableSingularity(String),

    /// The integrand produced a NaN at a node whose weight matters.
    #[error("integrand returned NaN at x = {0}")]
    IntegrandNan(f64),

    /// A branch-minimum search found no derivative sign change.
    #[error("branch {0} is monotone on its domain: no interior minimum")]
    MonotoneBranch(BranchId),

    /// The adaptive integrator drove the step size below resolution.
    #[error("integrator step size underflow at t = {0}")]
    Stiffness(f64),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
