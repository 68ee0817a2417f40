//! Library side of the `sabi` binary: configuration, run orchestration and
//! the verification suites.

// `!(x < tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod run;
pub mod system;
pub mod verify;
