//! Renormalization operators acting on potentials.
//!
//! The operators are built from the Manneville-Pomeau family `f_t`, its symbolic
//! models on the one- and two-sided shift, a Baker extension on the square, and a
//! family of generalized continued fraction maps `f_beta`. Each operator has an
//! explicit fixed point, and iterates of nearby potentials converge to it.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baker;
pub mod cf;
pub mod error;
pub mod fbeta;
pub mod interval;
pub mod mp;
pub mod numeric;
pub mod shift;
pub mod uniqueness;
pub mod word;

pub use cf::{CFParams, Enclosed};
pub use error::{Error, Result};
pub use interval::Potential1D;
pub use mp::{Branch, LaminarParams, MPPoint};
pub use shift::{BiCylinderPotential, CylinderPotential};
pub use word::{Block, RunLengthWord, Tail};
