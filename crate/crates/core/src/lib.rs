//! Numerical toolkit for the fractional logarithmic p-Laplacian.
//!
//! The crate covers the normalization constants, the kernel
//! K(r) = C (B − p ln r) / r^{N+sp}, pointwise principal-value evaluation on
//! analytic test functions, discrete energy forms on uniform grids with zero
//! exterior extension, and the first Dirichlet eigenvalue.

// tabulated constants keep their published digits; negated float comparisons reject NaN
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod quadrature;
pub mod specfun;
pub mod kernel;
pub mod testfn;
pub mod operator;
pub mod grid;
pub mod report;
pub mod forms;
pub mod eigen;
pub mod suites;
pub mod cli;

pub use error::{Error, Result};
pub use kernel::{KernelPart, KernelSpec, RadialMode};
pub use specfun::Params;
