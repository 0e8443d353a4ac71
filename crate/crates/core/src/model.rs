//! The matrix family `S^{t+1}(I + h(S)) + δJ` and its zero-eigenvalue
//! combinatorics.
//!
//! `S` is the upshift (ones on the superdiagonal), `J` the all-ones matrix and
//! `h(s) = Σ_j b_j s^j`. Every block-size and multiplicity formula here is
//! closed form in `(n, t)`.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F = Complex64> {
    pub n: usize,
    pub t: usize,
    /// `b_1, b_2, …`; an empty list means `h = 0`.
    pub b_coeffs: Vec<F>,
    pub delta: F,
}

impl<F: Scalar> ModelParams<F> {
    pub fn new(n: usize, t: usize, b_coeffs: Vec<F>, delta: F) -> Result<Self> {
        let p = ModelParams { n, t, b_coeffs, delta };
        p.validate()?;
        Ok(p)
    }

    /// The single-coefficient family `h(s) = b s`.
    pub fn with_b(n: usize, t: usize, b: F, delta: F) -> Result<Self> {
        Self::new(n, t, vec![b], delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {}", self.n)));
        }
        if self.t > self.n - 2 {
            return Err(Error::InvalidParams(format!(
                "t must lie in [0, n-2] = [0, {}], got {}",
                self.n - 2,
                self.t
            )));
        }
        if self.b_coeffs.len() > self.n - 1 {
            return Err(Error::InvalidParams(format!(
                "at most n-1 = {} coefficients of h allowed, got {}",
                self.n - 1,
                self.b_coeffs.len()
            )));
        }
        Ok(())
    }

    /// Coefficients of `s^{t+1}(1 + h(s))` keyed by offset above the diagonal.
    pub fn band(&self) -> Vec<(usize, F)> {
        let mut out = vec![(self.t + 1, F::one())];
        for (j, b) in self.b_coeffs.iter().enumerate() {
            let off = self.t + 2 + j;
            if off < self.n && !b.is_zero() {
                out.push((off, b.clone()));
            }
        }
        out
    }

    /// `b_1` when `h` is linear (or zero), `None` otherwise.
    pub fn linear_b(&self) -> Option<F> {
        match self.b_coeffs.split_first() {
            None => Some(F::zero()),
            Some((b, rest)) if rest.iter().all(Scalar::is_zero) => Some(b.clone()),
            _ => None,
        }
    }

    pub fn h_is_zero(&self) -> bool {
        self.b_coeffs.iter().all(Scalar::is_zero)
    }

    pub fn multiplicities(&self) -> Multiplicities {
        multiplicities(self.n, self.t).expect("validated parameters")
    }

    /// `N v` with `N = S^{t+1}(I + h(S))`.
    pub fn apply_shift_part(&self, v: &[F]) -> Vec<F> {
        let n = self.n;
        let band = self.band();
        (0..n)
            .map(|i| {
                band.iter()
                    .filter(|(off, _)| i + off < n)
                    .fold(F::zero(), |acc, (off, c)| acc + c.clone() * v[i + off].clone())
            })
            .collect()
    }

    /// `M v` without forming `M`.
    pub fn apply(&self, v: &[F]) -> Vec<F> {
        let s = self.delta.clone() * crate::scalar::sum(v);
        self.apply_shift_part(v).into_iter().map(|x| x + s.clone()).collect()
    }

    /// `N = S^{t+1}(I + h(S))`, strictly upper triangular.
    pub fn shift_part(&self) -> Matrix<F> {
        let mut m = Matrix::zeros(self.n, self.n);
        for (off, c) in self.band() {
            for i in 0..self.n - off {
                m[(i, i + off)] = c.clone();
            }
        }
        m
    }
}

/// `S^{t+1}(I + h(S)) + δJ`.
pub fn build_matrix<F: Scalar>(params: &ModelParams<F>) -> Result<Matrix<F>> {
    params.validate()?;
    let mut m = params.shift_part();
    for i in 0..params.n {
        for j in 0..params.n {
            m[(i, j)] = m[(i, j)].clone() + params.delta.clone();
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Multiplicities {
    pub p1: usize,
    pub p2: usize,
    /// Algebraic multiplicity of the zero eigenvalue.
    pub a0: usize,
    /// Geometric multiplicity (number of Jordan blocks).
    pub g0: usize,
    /// Index: size of the largest block, 0 when zero is not an eigenvalue.
    pub k0: usize,
    /// Non-increasing Jordan block sizes.
    pub block_sizes: Vec<usize>,
}

/// Multiplicities of the zero eigenvalue at time `t`.
///
/// With `ξ = n mod (t+1)` and `F = ⌊n/(t+1)⌋` there are `t` blocks: when
/// `ξ = 0` all have size `F`, otherwise the first `ξ-1` have size `F+1` and the
/// rest size `F`. The index is the largest block.
pub fn multiplicities(n: usize, t: usize) -> Result<Multiplicities> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
    }
    if t > n - 2 {
        return Err(Error::InvalidParams(format!("t must lie in [0, {}], got {t}", n - 2)));
    }
    let p1 = (n - 1) / (t + 1);
    let p2 = (n - 1) / (t + 2);
    let block_sizes = block_sizes(n, t);
    Ok(Multiplicities {
        p1,
        p2,
        a0: n - p1 - 1,
        g0: t,
        k0: block_sizes.first().copied().unwrap_or(0),
        block_sizes,
    })
}

fn block_sizes(n: usize, t: usize) -> Vec<usize> {
    let f = n / (t + 1);
    let xi = n % (t + 1);
    (1..=t).map(|l| if xi > 0 && l < xi { f + 1 } else { f }).collect()
}

/// Row lengths of the Young diagram of the zero-eigenvalue Jordan partition.
pub fn young_diagram(n: usize, t: usize) -> Result<Vec<usize>> {
    Ok(multiplicities(n, t)?.block_sizes)
}
