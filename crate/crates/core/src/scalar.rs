//! Scalar domains: the complex field, the nonnegative reals with ordinary
//! arithmetic, and the max-times semifield (max as addition, ordinary
//! product as multiplication).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for all equality checks.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainTag {
    #[serde(rename = "complex")]
    Complex,
    #[serde(rename = "nonneg")]
    NonnegReal,
    #[serde(rename = "max-times")]
    MaxTimes,
}

impl DomainTag {
    pub const ALL: [DomainTag; 3] = [DomainTag::Complex, DomainTag::NonnegReal, DomainTag::MaxTimes];

    pub fn name(self) -> &'static str {
        match self {
            DomainTag::Complex => "complex",
            DomainTag::NonnegReal => "nonneg",
            DomainTag::MaxTimes => "max-times",
        }
    }

    pub fn zero(self) -> Scalar {
        match self {
            DomainTag::Complex => Scalar::Complex(Complex64::new(0.0, 0.0)),
            DomainTag::NonnegReal => Scalar::NonnegReal(0.0),
            DomainTag::MaxTimes => Scalar::MaxTimes(0.0),
        }
    }

    pub fn one(self) -> Scalar {
        match self {
            DomainTag::Complex => Scalar::Complex(Complex64::new(1.0, 0.0)),
            DomainTag::NonnegReal => Scalar::NonnegReal(1.0),
            DomainTag::MaxTimes => Scalar::MaxTimes(1.0),
        }
    }
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complex" => Ok(DomainTag::Complex),
            "nonneg" => Ok(DomainTag::NonnegReal),
            "max-times" => Ok(DomainTag::MaxTimes),
            other => Err(Error::InvalidInput(format!("unknown domain {other:?}"))),
        }
    }
}

/// A scalar tagged with the domain it belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Complex(Complex64),
    NonnegReal(f64),
    MaxTimes(f64),
}

impl Scalar {
    pub fn domain(self) -> DomainTag {
        match self {
            Scalar::Complex(_) => DomainTag::Complex,
            Scalar::NonnegReal(_) => DomainTag::NonnegReal,
            Scalar::MaxTimes(_) => DomainTag::MaxTimes,
        }
    }

    pub fn is_valid(self) -> bool {
        match self {
            Scalar::Complex(z) => z.re.is_finite() && z.im.is_finite(),
            Scalar::NonnegReal(x) | Scalar::MaxTimes(x) => x.is_finite() && x >= 0.0,
        }
    }

    /// The value as a complex number (real domains embed with zero imaginary part).
    pub fn to_complex(self) -> Complex64 {
        match self {
            Scalar::Complex(z) => z,
            Scalar::NonnegReal(x) | Scalar::MaxTimes(x) => Complex64::new(x, 0.0),
        }
    }

    pub fn modulus(self) -> f64 {
        self.to_complex().norm()
    }
}

fn check_operand(domain: DomainTag, a: Scalar) -> Result<()> {
    if a.domain() != domain {
        return Err(Error::DomainMismatch { left: domain, right: a.domain() });
    }
    if !a.is_valid() {
        return Err(Error::InvalidInput(format!("{a:?} is not a valid {domain} scalar")));
    }
    Ok(())
}

/// Domain addition: ordinary sum for the complex and nonnegative domains,
/// maximum for max-times.
pub fn scalar_add(domain: DomainTag, a: Scalar, b: Scalar) -> Result<Scalar> {
    check_operand(domain, a)?;
    check_operand(domain, b)?;
    Ok(match (a, b) {
        (Scalar::Complex(x), Scalar::Complex(y)) => Scalar::Complex(x + y),
        (Scalar::NonnegReal(x), Scalar::NonnegReal(y)) => Scalar::NonnegReal(x + y),
        (Scalar::MaxTimes(x), Scalar::MaxTimes(y)) => Scalar::MaxTimes(x.max(y)),
        _ => unreachable!("operands checked against domain"),
    })
}

/// Domain multiplication: the ordinary product in all three domains.
pub fn scalar_mul(domain: DomainTag, a: Scalar, b: Scalar) -> Result<Scalar> {
    check_operand(domain, a)?;
    check_operand(domain, b)?;
    Ok(match (a, b) {
        (Scalar::Complex(x), Scalar::Complex(y)) => Scalar::Complex(x * y),
        (Scalar::NonnegReal(x), Scalar::NonnegReal(y)) => Scalar::NonnegReal(x * y),
        (Scalar::MaxTimes(x), Scalar::MaxTimes(y)) => Scalar::MaxTimes(x * y),
        _ => unreachable!("operands checked against domain"),
    })
}

/// Relative closeness: `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

/// Arithmetic contract shared by the three scalar domains.
///
/// All three are semifields (the complex numbers are even a field), so
/// division by a nonzero element is always available.
pub trait Semiring: Copy + fmt::Debug + PartialEq + Send + Sync + 'static {
    const DOMAIN: DomainTag;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(self, rhs: Self) -> Self;
    fn mul(self, rhs: Self) -> Self;
    /// Division by a nonzero element.
    fn div(self, rhs: Self) -> Self;
    /// Embedding of a nonnegative real.
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    /// `|a - b|` in the ambient metric.
    fn dist(self, other: Self) -> f64;
    fn is_valid(self) -> bool;
    fn to_scalar(self) -> Scalar;
    fn try_from_scalar(s: Scalar) -> Result<Self>;

    fn is_zero(self) -> bool {
        self == Self::zero()
    }
}

/// Domains carrying the componentwise order of the nonnegative orthant.
pub trait Ordered: Semiring + PartialOrd {
    fn value(self) -> f64;
    fn from_value(x: f64) -> Self;
}

/// Nonnegative real with ordinary arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct NonNeg(pub f64);

/// Max-times scalar: `a + b = max(a, b)`, `a * b = a b`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct MaxTimes(pub f64);

impl Semiring for Complex64 {
    const DOMAIN: DomainTag = DomainTag::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(self, rhs: Self) -> Self {
        self + rhs
    }
    fn mul(self, rhs: Self) -> Self {
        self * rhs
    }
    fn div(self, rhs: Self) -> Self {
        self / rhs
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }
    fn is_valid(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn to_scalar(self) -> Scalar {
        Scalar::Complex(self)
    }
    fn try_from_scalar(s: Scalar) -> Result<Self> {
        match s {
            Scalar::Complex(z) => Ok(z),
            other => Err(Error::DomainMismatch { left: DomainTag::Complex, right: other.domain() }),
        }
    }
}

macro_rules! real_domain {
    ($ty:ident, $tag:ident, $add:expr) => {
        impl Semiring for $ty {
            const DOMAIN: DomainTag = DomainTag::$tag;

            fn zero() -> Self {
                $ty(0.0)
            }
            fn one() -> Self {
                $ty(1.0)
            }
            fn add(self, rhs: Self) -> Self {
                $ty($add(self.0, rhs.0))
            }
            fn mul(self, rhs: Self) -> Self {
                $ty(self.0 * rhs.0)
            }
            fn div(self, rhs: Self) -> Self {
                $ty(self.0 / rhs.0)
            }
            fn from_f64(x: f64) -> Self {
                $ty(x)
            }
            fn modulus(self) -> f64 {
                self.0.abs()
            }
            fn dist(self, other: Self) -> f64 {
                (self.0 - other.0).abs()
            }
            fn is_valid(self) -> bool {
                self.0.is_finite() && self.0 >= 0.0
            }
            fn to_scalar(self) -> Scalar {
                Scalar::$tag(self.0)
            }
            fn try_from_scalar(s: Scalar) -> Result<Self> {
                match s {
                    Scalar::$tag(x) => Ok($ty(x)),
                    other => Err(Error::DomainMismatch { left: DomainTag::$tag, right: other.domain() }),
                }
            }
        }

        impl Ordered for $ty {
            fn value(self) -> f64 {
                self.0
            }
            fn from_value(x: f64) -> Self {
                $ty(x)
            }
        }
    };
}

real_domain!(NonNeg, NonnegReal, |a: f64, b: f64| a + b);
real_domain!(MaxTimes, MaxTimes, |a: f64, b: f64| a.max(b));

#[cfg(test)]
mod tests {
    use super::*;

    fn mt(x: f64) -> Scalar {
        Scalar::MaxTimes(x)
    }

    #[test]
    fn max_times_add_is_max() {
        assert_eq!(scalar_add(DomainTag::MaxTimes, mt(2.0), mt(3.0)).unwrap(), mt(3.0));
        for a in [0.0, 0.5, 1.0, 7.25] {
            assert_eq!(scalar_add(DomainTag::MaxTimes, mt(a), mt(a)).unwrap(), mt(a));
        }
    }

    #[test]
    fn nonneg_add_is_sum() {
        let r = scalar_add(DomainTag::NonnegReal, Scalar::NonnegReal(2.0), Scalar::NonnegReal(3.0));
        assert_eq!(r.unwrap(), Scalar::NonnegReal(5.0));
    }

    #[test]
    fn products() {
        assert_eq!(scalar_mul(DomainTag::MaxTimes, mt(2.0), mt(0.5)).unwrap(), mt(1.0));
        let i = Scalar::Complex(Complex64::new(0.0, 1.0));
        assert_eq!(
            scalar_mul(DomainTag::Complex, i, i).unwrap(),
            Scalar::Complex(Complex64::new(-1.0, 0.0))
        );
        for d in DomainTag::ALL {
            let a = match d {
                DomainTag::Complex => Scalar::Complex(Complex64::new(1.5, -2.0)),
                DomainTag::NonnegReal => Scalar::NonnegReal(1.5),
                DomainTag::MaxTimes => mt(1.5),
            };
            assert_eq!(scalar_mul(d, a, d.one()).unwrap(), a);
            assert_eq!(scalar_add(d, a, d.zero()).unwrap(), a);
        }
    }

    #[test]
    fn mismatched_operands_are_rejected() {
        let err = scalar_add(DomainTag::MaxTimes, mt(1.0), Scalar::NonnegReal(1.0)).unwrap_err();
        assert!(matches!(err, Error::DomainMismatch { .. }));
        assert!(scalar_mul(DomainTag::NonnegReal, Scalar::NonnegReal(-1.0), Scalar::NonnegReal(1.0)).is_err());
    }

    #[test]
    fn domain_names_round_trip() {
        for d in DomainTag::ALL {
            assert_eq!(d.name().parse::<DomainTag>().unwrap(), d);
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(json, format!("\"{}\"", d.name()));
        }
        assert!("tropical".parse::<DomainTag>().is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        // dyadic rationals keep max and multiply exact
        fn dyadic() -> impl Strategy<Value = f64> {
            (0u32..64, -4i32..4).prop_map(|(m, e)| m as f64 * 2f64.powi(e))
        }

        proptest! {
            #[test]
            fn max_times_distributes(a in dyadic(), b in dyadic(), c in dyadic()) {
                let (a, b, c) = (MaxTimes(a), MaxTimes(b), MaxTimes(c));
                prop_assert_eq!(a.mul(b.add(c)), a.mul(b).add(a.mul(c)));
                prop_assert_eq!(a.add(b), b.add(a));
                prop_assert!(a.add(b).is_valid() && a.mul(b).is_valid());
            }

            #[test]
            fn nonneg_distributes(a in dyadic(), b in dyadic(), c in dyadic()) {
                let (a, b, c) = (NonNeg(a), NonNeg(b), NonNeg(c));
                prop_assert_eq!(a.mul(b.add(c)), a.mul(b).add(a.mul(c)));
                prop_assert_eq!(a.add(NonNeg::zero()), a);
            }
        }
    }
}
