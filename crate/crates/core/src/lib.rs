//! Pseudo-spectral solvers for Born–Infeld and Maxwell electrodynamics, their
//! stochastic Lie-transport versions, stochastic Euler vorticity and the
//! high-field MHD limit, together with the diagnostics that check the
//! conservation laws and Hamiltonian identities of these systems.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below name the double-precision instantiations used by the CLI.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dynamics;
pub mod em;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod init;
pub mod integrators;
pub mod noise;
pub mod real;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec, ScalarField, VectorField};
pub use real::Real;

pub type Grid64 = Grid<f64>;
pub type ScalarField64 = ScalarField<f64>;
pub type VectorField64 = VectorField<f64>;
pub type Grid32 = Grid<f32>;
pub type VectorField32 = VectorField<f32>;
