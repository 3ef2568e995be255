//! Projection maps onto matrix-group orbits, linear-prior Bayes estimators,
//! and regression of rotations from paired spherical data.

// `!(a > b)` is used to reject NaN along with the failing comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimator;
pub mod geom;
pub mod matdecomp;
pub mod matio;
pub mod orbits;
pub mod parallel;
pub mod posterior;
pub mod regression;
pub mod rotation;
pub mod simlab;

pub use error::{Error, Result};
pub use rotation::Rotation;
