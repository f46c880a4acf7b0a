//! Pseudospectral tools for the two-dimensional Kuramoto-Sivashinsky
//! equation with background shear advection: a dealiased ETDRK4 solver for
//! the nonlinear dynamics, an operator toolkit for pseudospectral bounds
//! and semigroup decay rates of the mode operators `nu Delta_k^2 + i k u(y)`,
//! audits of the shear lower-bound property behind those estimates, and
//! trajectory diagnostics for the bootstrap inequalities that drive the
//! global-existence picture.
//!
//! Start from the `examples/` directory: each runnable example exercises
//! one capability end to end. The `kse-shear` binary wraps the same
//! library functions behind `simulate`, `psi-sweep`, `decay-fit`,
//! `assumption-check` and `report` subcommands.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod manifest;
pub mod modeop;
pub mod rng;
pub mod shear;
pub mod solver;
pub mod spectral;
pub mod sweep;

pub use error::{KseError, Result};
