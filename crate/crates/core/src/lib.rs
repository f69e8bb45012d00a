//! Assouad-type dimensions and spectra of Kleinian limit sets, parabolic
//! Julia sets, Patterson–Sullivan measures and conformal measures.
//!
//! The crate has two halves that are meant to be played against each other:
//!
//! * [`formulas`] evaluates the closed-form dimension and spectrum values
//!   from the group/map parameters (δ, ranks; h, petal numbers).
//! * [`estimators`] measures the same quantities empirically, either on
//!   point clouds produced by [`generators`] or on measure oracles that
//!   evaluate the global measure formulae directly.
//!
//! [`geometry`] holds the hyperbolic and Möbius primitives the generators
//! are built on, and [`harness`] is the CLI/persistence layer.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod formulas;
mod fsutil;
pub mod generators;
pub mod geometry;
pub mod harness;

pub use error::{Error, Result};
