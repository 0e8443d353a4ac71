use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Gaussian rational `re + i·im` with arbitrary-precision parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalComplex {
    pub re: BigRational,
    pub im: BigRational,
}

impl RationalComplex {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        RationalComplex { re, im }
    }

    pub fn int(re: i64, im: i64) -> Self {
        Self::new(BigRational::from_integer(re.into()), BigRational::from_integer(im.into()))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::new(BigRational::new(num.into(), den.into()), BigRational::zero())
    }

    /// Exact binary value of a double; `None` for non-finite input.
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(Self::new(BigRational::from_float(re)?, BigRational::from_float(im)?))
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

fn show(q: &BigRational) -> String {
    if q.denom() == &BigInt::one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for RationalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", show(&self.re)),
            (true, false) => write!(f, "{}i", show(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "{}{}{}i", show(&self.re), sign, show(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for RationalComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for RationalComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for RationalComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for RationalComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::new(self.re * o.re, BigRational::zero());
        }
        Self::new(
            &self.re * &o.re - &self.im * &o.im,
            &self.re * &o.im + &self.im * &o.re,
        )
    }
}

impl Div for RationalComplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        assert!(!o.is_zero(), "division by exact zero");
        if o.im.is_zero() {
            return Self::new(self.re / &o.re, self.im / &o.re);
        }
        let d = o.norm_sqr();
        Self::new(
            (&self.re * &o.re + &self.im * &o.im) / &d,
            (&self.im * &o.re - &self.re * &o.im) / &d,
        )
    }
}

impl Neg for RationalComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Scalar for RationalComplex {
    fn zero() -> Self {
        Self::int(0, 0)
    }
    fn one() -> Self {
        Self::int(1, 0)
    }
    fn from_i64(v: i64) -> Self {
        Self::int(v, 0)
    }
    fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_exact() {
        let a = RationalComplex::ratio(1, 3);
        let b = RationalComplex::int(1, 1);
        let q = a.clone() / b.clone();
        assert_eq!(q * b, a);
        assert_eq!(RationalComplex::ratio(2, 4), RationalComplex::ratio(1, 2));
    }

    #[test]
    fn display_forms() {
        assert_eq!(RationalComplex::ratio(-3, 6).to_string(), "-1/2");
        assert_eq!(RationalComplex::int(1, -2).to_string(), "1-2i");
        assert_eq!(RationalComplex::int(0, 5).to_string(), "5i");
    }

    #[test]
    fn binary_fractions_convert_exactly() {
        let q = RationalComplex::from_f64(0.25, -1.5).unwrap();
        assert_eq!(q, RationalComplex::ratio(1, 4) - RationalComplex::int(0, 1) * RationalComplex::ratio(3, 2));
    }
}
