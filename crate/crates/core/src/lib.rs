//! Time maps and bifurcation structure of the nonlinear pendulum
//! `x'' + sin 2x = 0` on `[-L, L]` with the mixed boundary conditions
//! `x(-L) = -φ`, `x'(L) = φ* := √(1 − cos 2φ)`.
//!
//! The crate is organised around four layers:
//!
//! * [`quad`] — tanh-sinh quadrature for the endpoint-singular integrals and
//!   AGM/Carlson elliptic functions; every time map reduces to these.
//! * [`maps`] — the time maps T, T₁ in both the α and z parameterisations,
//!   the branch families (I, A, B, C, B′ and their k-winding and
//!   cylinder-winding relatives D_k, D_k′), their existence windows, and the
//!   analytic z-derivatives of the B and D branch times.
//! * [`analysis`] — the convexity functional Φ and its grid scan, branch
//!   minima/unimodality, inversion of time maps at a given box half-width,
//!   and assembly of the full bifurcation diagram.
//! * [`shooting`] — an independent adaptive Runge-Kutta oracle that verifies
//!   every branch point by direct integration of the phase flow with
//!   first-integral monitoring.
//!
//! ```
//! use timemap::maps::{branch_time, make_config, BranchId, Family};
//! use timemap::shooting::verify_branch_point;
//!
//! let cfg = make_config(std::f64::consts::FRAC_PI_4)?;
//! let branch = BranchId::new(Family::B, 0);
//! let two_l = branch_time(branch, 0.5, &cfg)?;
//! assert!(two_l < cfg.t_star); // the B branch dips below the bifurcation time
//!
//! let shot = verify_branch_point(branch, 0.5, &cfg, 1e-10)?;
//! assert!(shot.y_residual < 1e-6 && shot.v_drift < 1e-8);
//! # Ok::<(), timemap::Error>(())
//! ```

// Validation guards use the negated forms (`!(x > 0.0)`) on purpose: they
// reject NaN inputs, which the suggested rewrites would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod emit;
pub mod error;
pub mod maps;
pub mod quad;
pub mod shooting;

pub use error::{Error, Result};
pub use maps::{BoundaryConfig, BranchId, Family, ZDomain};
pub use quad::{Power, QuadResult};
