//! Multivariate RLWE somewhat-homomorphic encryption for signal processing.
//!
//! Ciphertexts live in `Z_q[x_1..x_m] / (x_i^{n_i} + 1)`, so one
//! homomorphic product convolves whole multidimensional signals.

pub mod arith;
pub mod codec;
mod error;
pub mod pack;
pub mod params;
pub mod relin;
pub mod ring;
pub mod she;
pub mod tensor;

pub use error::{Error, Result};

/// Security estimate in double precision.
pub type SecurityEstimateF64 = params::SecurityEstimate<f64>;

/// Exact rational used by the fixed-point codec.
pub type Rational = num_rational::BigRational;
