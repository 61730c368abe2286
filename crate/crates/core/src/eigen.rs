use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, Matrix, Vector};
use crate::scalar::Semiring;

/// Which solver path produced an eigenpair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    KleeneStar,
    Induced,
    Shpiz,
    Power,
    Classical,
    Lifted,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::KleeneStar => "kleene-star",
            Method::Induced => "induced",
            Method::Shpiz => "shpiz",
            Method::Power => "power",
            Method::Classical => "classical",
            Method::Lifted => "lifted",
        }
    }
}

/// Eigenvalue, nonzero eigenvector and the relative residual
/// `|A v - l v|_inf / |v|_inf` measured when the pair was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<S> {
    pub lambda: S,
    pub vector: Vector<S>,
    pub residual: f64,
    pub method: Method,
}

impl<S: Semiring> EigenPair<S> {
    /// Build a pair after checking it against `a`.
    pub fn verified(a: &Matrix<S>, lambda: S, vector: Vector<S>, method: Method, tol: f64) -> Result<Self> {
        if vector.is_zero() {
            return Err(Error::InvariantViolation("eigenvector is zero".into()));
        }
        let residual = eigen_residual(a, lambda, &vector)?;
        if residual > tol {
            return Err(Error::InvariantViolation(format!(
                "eigenpair residual {residual:.3e} exceeds tolerance {tol:.1e}"
            )));
        }
        Ok(EigenPair { lambda, vector, residual, method })
    }

    /// Recompute the residual against `a`.
    pub fn check(&self, a: &Matrix<S>) -> Result<f64> {
        eigen_residual(a, self.lambda, &self.vector)
    }
}
