//! Spectral zeta functions of Laplacians on self-similar fractals with
//! polynomial spectral decimation.

pub mod error;
pub mod oracle;
pub mod poincare;
pub mod poly;
pub mod precision;
pub mod quad;
pub mod spectrum;
pub mod zeta;

pub use error::{Error, Result};
pub use precision::Precision;
