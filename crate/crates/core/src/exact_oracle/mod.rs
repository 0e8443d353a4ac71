//! Exact Gaussian-rational oracle for small instances: characteristic
//! polynomials by fraction-free elimination over `Q(i)[z]`, rank sequences of
//! matrix powers, and exact checks of Jordan chains.

mod poly;
mod rational;

pub use poly::Poly;
pub use rational::RationalComplex;

use crate::error::{Error, Result};
use crate::jordan::JordanBasis;
use crate::matrix::Matrix;
use crate::model::{build_matrix, ModelParams};
use crate::scalar::{dot, Scalar};

pub type ExactParams = ModelParams<RationalComplex>;

/// Largest size the oracle accepts.
pub const MAX_ORACLE_N: usize = 12;

/// `det(zI - M)`, monic of degree `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCharPoly {
    /// Ascending coefficients.
    pub coeffs: Vec<RationalComplex>,
}

impl ExactCharPoly {
    /// Multiplicity of the root `z = 0`.
    pub fn zero_root_count(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.coeffs.len() - 1)
    }

    /// The factor left after dividing out `z^{zero_root_count}`.
    pub fn nonzero_factor(&self) -> Vec<RationalComplex> {
        self.coeffs[self.zero_root_count()..].to_vec()
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_ORACLE_N {
        return Err(Error::InvalidParams(format!("exact oracle is limited to n <= {MAX_ORACLE_N}, got {n}")));
    }
    Ok(())
}

/// Bareiss elimination on `zI - M` with polynomial entries. The leading
/// principal minors are monic characteristic polynomials, so no pivoting is
/// needed.
pub fn exact_charpoly(params: &ExactParams) -> Result<ExactCharPoly> {
    check_size(params.n)?;
    let m = build_matrix(params)?;
    let n = params.n;
    let mut a: Vec<Vec<Poly<RationalComplex>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Poly::linear(m[(i, j)].clone())
                    } else {
                        Poly::constant(-m[(i, j)].clone())
                    }
                })
                .collect()
        })
        .collect();
    let mut prev = Poly::constant(RationalComplex::one());
    for k in 0..n - 1 {
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&a[i][j] * &a[k][k]) - &(&a[i][k] * &a[k][j]);
                a[i][j] = num.div_exact(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let mut coeffs = a[n - 1][n - 1].clone().into_coeffs();
    coeffs.resize(n + 1, RationalComplex::zero());
    Ok(ExactCharPoly { coeffs })
}

/// Cofactor expansion of `det(zI - M)`; exponential cost, a cross-check for
/// tiny matrices only.
pub fn cofactor_charpoly(params: &ExactParams) -> Result<ExactCharPoly> {
    if params.n > 7 {
        return Err(Error::InvalidParams("cofactor expansion is limited to n <= 7".into()));
    }
    let m = build_matrix(params)?;
    let n = params.n;
    let entry = |i: usize, j: usize| {
        if i == j {
            Poly::linear(m[(i, j)].clone())
        } else {
            Poly::constant(-m[(i, j)].clone())
        }
    };
    fn det(rows: &[usize], cols: &[usize], entry: &dyn Fn(usize, usize) -> Poly<RationalComplex>) -> Poly<RationalComplex> {
        if rows.is_empty() {
            return Poly::constant(RationalComplex::one());
        }
        let mut acc = Poly::zero();
        for (k, &c) in cols.iter().enumerate() {
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = &entry(rows[0], c) * &det(&rows[1..], &rest, entry);
            acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }
    let idx: Vec<usize> = (0..n).collect();
    let mut coeffs = det(&idx, &idx, &entry).into_coeffs();
    coeffs.resize(n + 1, RationalComplex::zero());
    Ok(ExactCharPoly { coeffs })
}

/// Exact `rank(M^k)` for `k = 0..=kmax`.
pub fn rank_sequence(params: &ExactParams, kmax: usize) -> Result<Vec<usize>> {
    check_size(params.n)?;
    let m = build_matrix(params)?;
    let mut power = Matrix::identity(params.n);
    let mut ranks = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        if k > 0 {
            power = power.mul(&m);
        }
        ranks.push(power.rank());
    }
    Ok(ranks)
}

/// Jordan block sizes of the zero eigenvalue from the ranks of `M^k`: the
/// number of blocks of size at least `q` is `rank(M^{q-1}) - rank(M^q)`.
pub fn blocks_from_ranks(ranks: &[usize]) -> Vec<usize> {
    let at_least: Vec<usize> = ranks.windows(2).map(|w| w[0] - w[1]).collect();
    let mut sizes = Vec::new();
    for (q, &c) in at_least.iter().enumerate() {
        let bigger = at_least.get(q + 1).copied().unwrap_or(0);
        sizes.extend(std::iter::repeat(q + 1).take(c - bigger));
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Smallest `q` with `rank(M^q) = rank(M^{q+1})`.
pub fn index_from_ranks(ranks: &[usize]) -> Option<usize> {
    ranks.windows(2).position(|w| w[0] == w[1])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `M v^(ℓ,q) ≠ v^(ℓ,q-1)` (or `≠ 0` for `q = 1`).
    RightChain { block: usize, rank: usize },
    /// `w^(ℓ,q)† M ≠ w^(ℓ,q+1)†` (or `≠ 0` at the top).
    LeftChain { block: usize, rank: usize },
    RightZeroSum { block: usize, rank: usize },
    LeftZeroSum { block: usize, rank: usize },
    /// `⟨w^(ℓ,p), v^(r,q)⟩ ≠ δ_{ℓr}δ_{pq}`.
    Gram { left: (usize, usize), right: (usize, usize) },
    Shape(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChainReport {
    pub violations: Vec<Violation>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact verification of the chain relations, zero sums and
/// bi-orthonormality. Indices in the report are 1-based.
pub fn exact_chain_check(params: &ExactParams, basis: &JordanBasis<RationalComplex>) -> Result<ChainReport> {
    if params.n > 10 {
        return Err(Error::InvalidParams(format!("exact chain check is limited to n <= 10, got {}", params.n)));
    }
    let mut report = ChainReport::default();
    let m = build_matrix(params)?;
    let madj = m.adjoint();
    if basis.right_chains.len() != basis.left_chains.len() {
        report.violations.push(Violation::Shape("left and right chain counts differ".into()));
        return Ok(report);
    }
    for (l, (rc, lc)) in basis.right_chains.iter().zip(&basis.left_chains).enumerate() {
        if rc.len() != lc.len() {
            report.violations.push(Violation::Shape(format!("block {} chain lengths differ", l + 1)));
            continue;
        }
        for q in 0..rc.len() {
            let mv = m.mul_vec(&rc[q]);
            let ok = match q {
                0 => mv.iter().all(Scalar::is_zero),
                _ => mv == rc[q - 1],
            };
            if !ok {
                report.violations.push(Violation::RightChain { block: l + 1, rank: q + 1 });
            }
            let mw = madj.mul_vec(&lc[q]);
            let ok = match lc.get(q + 1) {
                Some(next) => &mw == next,
                None => mw.iter().all(Scalar::is_zero),
            };
            if !ok {
                report.violations.push(Violation::LeftChain { block: l + 1, rank: q + 1 });
            }
            if !crate::scalar::sum(&rc[q]).is_zero() {
                report.violations.push(Violation::RightZeroSum { block: l + 1, rank: q + 1 });
            }
            if !crate::scalar::sum(&lc[q]).is_zero() {
                report.violations.push(Violation::LeftZeroSum { block: l + 1, rank: q + 1 });
            }
        }
    }
    for (l, lc) in basis.left_chains.iter().enumerate() {
        for (p, w) in lc.iter().enumerate() {
            for (r, rc) in basis.right_chains.iter().enumerate() {
                for (q, v) in rc.iter().enumerate() {
                    let g = dot(w, v);
                    let expect = if (l, p) == (r, q) { RationalComplex::one() } else { RationalComplex::zero() };
                    if g != expect {
                        report.violations.push(Violation::Gram { left: (l + 1, p + 1), right: (r + 1, q + 1) });
                    }
                }
            }
        }
    }
    Ok(report)
}
