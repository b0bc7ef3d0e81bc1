//! Weighted Bergman spaces `A^2_alpha` of the right half-plane and
//! composition operators acting on them.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod interp;
pub mod kernels;
pub mod laplace;
pub mod linalg;
pub mod numeric;
pub mod opnorm;
pub mod space;
pub mod suite;
pub mod symbols;

pub use error::{BergError, Result};
pub use kernels::Weight;
pub use symbols::{HalfPlanePoint, SampleGrid, SelfMap, Symbol};
