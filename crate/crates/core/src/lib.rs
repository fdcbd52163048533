//! Real quadratic fields: zeta coefficients, class numbers, genus checks,
//! bubble separability search and class-number classifiers.

pub mod arithmetic;
pub mod bubble;
pub mod classify;
pub mod dataset;
pub mod error;
pub mod genus;
pub mod invariants;
pub mod pca;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact bubble-cost ratios.
pub type Rational = num_rational::Ratio<u64>;
pub type PcaModelF64 = pca::PcaModel<f64>;
pub type PcaModelF32 = pca::PcaModel<f32>;
pub type CorrelationMatrixF64 = classify::CorrelationMatrix<f64>;
pub type CorrelationMatrixF32 = classify::CorrelationMatrix<f32>;
