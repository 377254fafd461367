//! Reproducing kernels and rational Schur functions of finitely atomic
//! weighted Dirichlet spaces, defect operators of the shift, and allowable
//! tuples of circle distributions.

// Comparisons are often negated on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod defect;
pub mod error;
pub mod hardy;
pub mod kernel;
pub mod linalg;
pub mod poly;
pub mod scalar;
pub mod suite;
pub mod tuples;

pub use error::{Error, Result};
pub use scalar::{Real, C};

/// Double-precision instantiations.
pub type Complex64 = C<f64>;
pub type Poly = poly::ComplexPoly<f64>;
pub type Measure = hardy::AtomicMeasure<f64>;
pub type Model = kernel::KernelModel<f64>;
pub type Rational = hardy::StableRational<f64>;
pub type Matrix = linalg::CMatrix<f64>;
pub type Distribution = tuples::CircleDistribution<f64>;
pub type Tuple = tuples::TupleSpec<f64>;
pub type Point = tuples::CirclePoint<f64>;
