//! Symplectic spinor fields on truncated Hermite bases.
//!
//! Clifford action, spinor-valued forms, Fedosov charts and Killing spinor
//! certificates for flat space and the round sphere.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fedosov;
pub mod fock;
pub mod forms;
pub mod killing;
pub mod linalg;
pub mod symalg;
