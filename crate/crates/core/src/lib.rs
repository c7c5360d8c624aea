//! Finite-dimensional quantum information numerics for Holevo-type bounds.
//!
//! The crate evaluates Holevo information, group asymmetries and ensemble
//! volumes, and uses them to check entropic Heisenberg limits for phase and
//! rotation estimation together with strong entropic uncertainty relations.
//!
//! Modules:
//! - [`qstate`]: density operators, distributions, entropies, volumes.
//! - [`holevo`]: signal ensembles, mutual information, the Holevo quantity.
//! - [`symmetry`]: U(1) and SO(3) twirls and the G-asymmetry.
//! - [`observables`]: POVM constructions and uncertainty-relation evaluators.
//! - [`metrology`]: estimation simulators and Heisenberg-limit calculators.
//! - `cli` (feature `cli`): the experiment runner behind the binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod error;
pub mod holevo;
pub mod linalg;
pub mod metrology;
pub mod qstate;
pub mod observables;
mod par;
pub mod symmetry;

pub use error::{Error, Result};
pub use qstate::{DensityOperator, Distribution};
