//! Exact scalars: rational numbers with an optional Gaussian (imaginary) part.
//!
//! The coefficient field of the whole crate is either ℚ or ℚ(i), fixed per
//! document by [`FieldMode`]. A [`Scalar`] always carries both components;
//! rational mode forbids nonzero imaginary parts at the API boundary.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient field of a document: ℚ or the Gaussian rationals ℚ(i).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    Rational,
    Gaussian,
}

/// An element of ℚ(i), kept reduced by `BigRational`'s invariants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub re: BigRational,
    pub im: BigRational,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::zero(),
        }
    }

    pub fn one() -> Self {
        Scalar {
            re: BigRational::one(),
            im: BigRational::zero(),
        }
    }

    pub fn i() -> Self {
        Scalar {
            re: BigRational::zero(),
            im: BigRational::one(),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Scalar {
            re: BigRational::from_integer(BigInt::from(v)),
            im: BigRational::zero(),
        }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar {
            re: BigRational::new(BigInt::from(num), BigInt::from(den)),
            im: BigRational::zero(),
        }
    }

    pub fn from_rational(re: BigRational) -> Self {
        Scalar {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Scalar {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Multiplicative inverse. Errors on zero.
    pub fn inv(&self) -> Result<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scalar {
            re: &self.re / &norm,
            im: -&self.im / &norm,
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Self> {
        Ok(self * &other.inv()?)
    }

    /// Sign convention used for frame normalization: positive when the real
    /// part is positive, or the real part is zero and the imaginary part is
    /// positive.
    pub fn is_sign_positive(&self) -> bool {
        if !self.re.is_zero() {
            self.re.is_positive()
        } else {
            self.im.is_positive()
        }
    }

    pub fn check_mode(&self, mode: FieldMode) -> Result<()> {
        if mode == FieldMode::Rational && !self.im.is_zero() {
            return Err(Error::RationalModeViolation);
        }
        Ok(())
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

fn fmt_rational(q: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if q.denom().is_one() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            fmt_rational(&self.re, f)
        } else if self.re.is_zero() {
            fmt_rational(&self.im, f)?;
            write!(f, "*i")
        } else {
            write!(f, "(")?;
            fmt_rational(&self.re, f)?;
            if self.im.is_positive() {
                write!(f, "+")?;
            }
            fmt_rational(&self.im, f)?;
            write!(f, "*i)")
        }
    }
}
