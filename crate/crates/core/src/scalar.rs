//! Field abstraction shared by the floating and exact code paths.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Magnitude used for pivot selection and reporting.
    fn magnitude(&self) -> f64;
    fn to_c64(&self) -> Complex64;
    /// Rescale a vector to unit length where the field allows it.
    fn normalize(_v: &mut [Self]) {}
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn normalize(v: &mut [Self]) {
        let s = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
        }
    }
}

/// Hermitian pairing `Σ conj(a_j) b_j`.
pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero(), |acc, (x, y)| acc + x.conj() * y.clone())
}

pub fn sum<F: Scalar>(v: &[F]) -> F {
    v.iter().cloned().fold(F::zero(), |a, b| a + b)
}

pub fn pow<F: Scalar>(x: &F, k: usize) -> F {
    let mut r = F::one();
    for _ in 0..k {
        r = r * x.clone();
    }
    r
}

pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_c64_vec<F: Scalar>(v: &[F]) -> Vec<Complex64> {
    v.iter().map(Scalar::to_c64).collect()
}
