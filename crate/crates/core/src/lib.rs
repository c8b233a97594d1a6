//! Bitangential Nevanlinna-Pick interpolation on the right half plane.
//!
//! Given interpolation data in operator-argument form, this crate builds the
//! Pick matrix, the J-unitary coefficient matrix `Θ` and the associated
//! linear fractional parametrization of interpolants, and certifies results
//! numerically with residual, kernel and winding number checks.

pub mod datasets;
pub mod error;
pub mod fixtures;
pub mod json;
pub mod lft;
pub mod numkit;
pub mod pick;
pub mod realization;
pub mod verify;
pub mod winding;

pub use error::{Error, Result};
pub use numkit::CMatrix;
