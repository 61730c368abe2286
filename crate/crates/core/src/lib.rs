//! Eigenvectors and common eigenvectors of matrices and matrix semigroups
//! over three scalar domains: the complex field, the nonnegative reals, and
//! the max-times semifield.

pub mod classical;
pub mod cli;
pub mod commuting;
pub mod cone;
pub mod eigen;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod semigroup;
pub mod tropical;

pub use cone::{MaxCone, SliceSample};
pub use eigen::{EigenPair, Method};
pub use error::{Error, Result};
pub use linalg::{AnyMatrix, Matrix, Vector};
pub use num_complex::Complex64;
pub use scalar::{DomainTag, MaxTimes, NonNeg, Scalar, Semiring, DEFAULT_TOL};
pub use semigroup::{Classification, CommonEigenReport, SemigroupClosure, SemigroupSpec};
