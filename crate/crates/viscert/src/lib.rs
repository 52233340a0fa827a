//! Finite-sample certification of failure probabilities for candidate viable
//! initial sets.
//!
//! Given a black-box simulator, a candidate set of initial conditions `C`,
//! and a nominal distribution over `C`, this crate estimates and
//! upper-bounds the probability that a sampled initial condition violates
//! the control specification. Rare failures are targeted with defensive
//! importance sampling: a GP classifier discovers the failure-prone region,
//! a convex polytope fitted to its level set carries a uniform surrogate
//! density, and an empirical Bernstein bound for bounded weighted losses
//! turns the weighted samples into a PAC certificate. A plain Monte Carlo
//! path with binomial tail inversion serves as the baseline estimator.
//!
//! Start with the runnable programs in `examples/`; each one exercises a
//! single capability end to end. The `viscert` binary wraps the same library
//! calls behind `explore`, `certify`, `convergence`, and `simulate`
//! subcommands driven by a JSON config.

// Indexed loops in the numeric kernels mirror the underlying recurrences.
#![allow(clippy::needless_range_loop)]

pub mod artifacts;
pub mod bounds;
pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod gp;
mod linalg;
pub mod pipeline;
pub mod rng;
pub mod special;
pub mod systems;

pub use error::{Error, Result};
