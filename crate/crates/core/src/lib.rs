pub mod conformal;
pub mod corners;
pub mod coulomb;
pub mod error;
pub mod experiment;
pub mod fekete;
pub mod fft;
pub mod fredholm;
pub mod geometry;
pub mod grunsky;
pub mod quadrature;

pub use error::{Error, Result};
