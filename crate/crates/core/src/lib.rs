//! Numerical toolkit for boundary Liouville conformal field theory:
//! special functions, structure constants, Virasoro blocks and the
//! annulus bootstrap.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
pub mod numerics;
pub mod specialfn;
pub mod structure_constants;
pub mod virasoro;

pub use error::{LiouvilleError, Result};
pub use numerics::ComplexValue;
