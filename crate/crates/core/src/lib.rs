//! Eichler cohomology for Jacobi forms of index m on SL(2, Z), made executable.
//!
//! The crate builds truncated Jacobi forms, splits them into vector-valued
//! modular forms through the theta decomposition, attaches the Weil-type
//! representation, and computes Eichler integrals, period cocycles, partial
//! L-values and Poincaré series together with numerical checks of the
//! transformation laws they satisfy.

pub mod error;
pub mod rational;
pub mod series;
pub mod group;
pub mod weil;
pub mod jacobi;
pub mod theta;
pub mod special;
pub mod quad;
pub mod growth;
pub mod periods;
pub mod lfunc;
pub mod poincare;
pub mod cohomology;
pub mod suites;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
