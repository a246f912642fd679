//! Exact solution counts for multihomogeneous diagonal equations and the
//! local-density predictions they are measured against.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arith;
mod error;
pub mod experiments;
pub mod forms;
pub mod hyperbola;
pub mod local;
pub mod weyl;

pub use error::{Error, Result};
