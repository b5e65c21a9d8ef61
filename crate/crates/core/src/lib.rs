//! Half-space stochastic six-vertex model and half-space ASEP: exact
//! enumeration, Monte Carlo, Hall–Littlewood and free-boundary Schur laws,
//! Fredholm Pfaffian cdf formulas and their Tracy–Widom type limits.

pub mod asep;
pub mod error;
pub mod lattice;
pub mod limits;
pub mod measures;
pub mod params;
pub mod pfaffian;
pub mod scalar;
pub mod special;
pub mod study;
pub mod symfunc;
pub mod verify;

pub use error::{Error, Result};
pub use measures::SignedPmf;
pub use params::ModelParams;
pub use pfaffian::kernel::{ModelTag, Regime, SkewBlockKernel};
pub use scalar::{Ring, Scalar};
pub use symfunc::exact_poly::ExactPoly;
pub use symfunc::partition::Partition;

pub use num_complex::Complex64;
pub use num_rational::BigRational;

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
