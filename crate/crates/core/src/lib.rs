//! Numerical lab for the principal Rayleigh quotient of `-Δ - μV` with Hardy
//! weight on planar cones and cones with angular bulges.

pub mod analytic;
pub mod eig;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod lab;
pub mod linalg;
pub mod parallel;

pub use error::{Error, Result};
pub use parallel::Parallelism;
