//! Entropy solutions of the one-dimensional pressureless Euler system with
//! linear damping `-ρu/τ`, its undamped counterpart, and the slow-time-scaled
//! relaxation system, for initial densities made of atoms and uniform blocks.
//!
//! The solution at `(x, t)` comes from minimizing a generalized potential
//! over Lagrangian labels ([`potential`]); [`solution`] turns the selected
//! minimizers into mass, momentum and velocity. [`sticky`] is an independent
//! event-driven sticky-particle simulator used as an oracle, [`limits`]
//! measures the `τ → 0` and `τ → ∞` limits, and [`verify`] checks the
//! weak-form and entropy conditions numerically.

// `!(a < b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod distance;
pub mod error;
pub mod golden;
pub mod limits;
pub mod measure;
pub mod output;
pub mod potential;
pub mod solution;
pub mod sticky;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{Endpoints, InitialData, Piece, Side, Weight};
pub use potential::{SpreadMode, Tolerances};
pub use solution::{Regime, SolutionSample, Solver};
