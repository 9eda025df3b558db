//! Floating-point and modular-arithmetic building blocks.

mod compensated;
pub mod gamma;
pub(crate) mod ntt;
pub mod quadrature;

pub use compensated::{compensated_sum, CompensatedSum};
