//! Smooth-at-origin nonconvex regularization.
//!
//! The Gaussian penalty `P(β) = 1 − exp(−κβ²)` behaves like Ridge near zero and
//! saturates at 1 for large coefficients. This crate evaluates it next to the
//! classical penalty families, fits penalized least squares by gradient
//! descent, analyzes the one-dimensional orthonormal-design objective, runs
//! Monte Carlo checks of the estimator's consistency and √n bias, and trains a
//! small multilayer perceptron with a penalized cross-entropy loss.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line runner live in the `gausspen` crate.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod datasets;
pub mod grid;
pub mod linalg;
mod math;
pub mod neural;
pub mod ols;
pub mod penalty;
pub mod stats;

pub use penalty::{penalty_bounds, penalty_grad, penalty_value, penalty_vector, Family, KinkRule, Penalty, PenaltyBounds, PenaltyError, PenaltySpec};
