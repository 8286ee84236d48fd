//! Numerical (theta,u)-hyperholomorphic function theory on quaternion domains.
//!
//! The crate is `no_std` with `alloc`. Float functions come from `libm`
//! through `num-traits`, so results do not depend on the platform libm.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod bergman;
pub mod diffops;
mod error;
pub mod fields;
pub mod geometry;
pub mod integral_ops;
mod linalg;
pub mod moebius;
pub mod probes;
pub mod quadrature;
pub mod quaternion;
pub mod reduce;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use quaternion::{Quaternion, ThetaFrame, ThetaPoint};
