//! Jordan chains of the zero eigenvalue.
//!
//! Right chains start at `e_1 - e_{ℓ+1}` and are extended by the chain step
//! `w = u - α(u) e_1`, `u = S^{-(t+1)} (I + h(S))^{-1} v`, which solves
//! `M w = v` with `Σ w_j = 0`. Left chains are the rows of the inverse of
//! `[V_0 | K]`, where `K` spans the Krylov space `span{N^k 1}` of the non-zero
//! eigenvalues; this pins them down uniquely by bi-orthonormality.

use crate::error::{Error, Result};
use crate::exact_oracle::RationalComplex;
use crate::matrix::{DenseMatrix, Matrix};
use crate::model::{build_matrix, ModelParams};
use crate::scalar::{dot, norm2, sum, to_c64_vec, Scalar};
use crate::spectrum::{nonzero_eigenvector, SpectrumReport};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Right chains only, one per Jordan block.
#[derive(Debug, Clone, PartialEq)]
pub struct RightChains<F = Complex64> {
    pub n: usize,
    pub t: usize,
    pub block_sizes: Vec<usize>,
    /// `chains[ℓ][q]` is the generalized eigenvector of rank `q+1` in block `ℓ+1`.
    pub chains: Vec<Vec<Vec<F>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanBasis<F = Complex64> {
    pub n: usize,
    pub t: usize,
    pub block_sizes: Vec<usize>,
    pub right_chains: Vec<Vec<Vec<F>>>,
    /// Same layout; `left_chains[ℓ][q]` pairs with `right_chains[ℓ][q]`.
    pub left_chains: Vec<Vec<Vec<F>>>,
}

/// `e_1 - e_{ℓ+1}` for `ℓ = 1..t`.
pub fn right_eigenvectors<F: Scalar>(n: usize, t: usize) -> Vec<Vec<F>> {
    (1..=t.min(n.saturating_sub(1)))
        .map(|l| {
            let mut v = vec![F::zero(); n];
            v[0] = F::one();
            v[l] = -F::one();
            v
        })
        .collect()
}

/// Coefficients `ĥ_1..ĥ_{n-1}` with `(1 + h(s))(1 + ĥ(s)) = 1 mod s^n`.
pub fn series_inverse<F: Scalar>(b_coeffs: &[F], n: usize) -> Vec<F> {
    let mut g = vec![F::zero(); n];
    g[0] = F::one();
    for k in 1..n {
        let mut s = F::zero();
        for (j, b) in b_coeffs.iter().enumerate().take(k) {
            s = s + b.clone() * g[k - j - 1].clone();
        }
        g[k] = -s;
    }
    g.remove(0);
    g
}

/// One step up a Jordan chain: a zero-sum `w` with `M w = v`.
pub fn chain_step<F: Scalar>(params: &ModelParams<F>, v: &[F]) -> Result<Vec<F>> {
    let n = params.n;
    let shift = params.t + 1;
    if v.len() != n {
        return Err(Error::InvalidParams(format!("vector length {} differs from n = {n}", v.len())));
    }
    if let Some(j) = (n - shift..n).rev().find(|&j| !v[j].is_zero()) {
        return Err(Error::ChainExhausted { coordinate: j + 1, n });
    }
    // (I + h(S)) y = v by back substitution.
    let mut y = vec![F::zero(); n];
    for i in (0..n).rev() {
        let mut s = v[i].clone();
        for (j, b) in params.b_coeffs.iter().enumerate() {
            if i + j + 1 < n && !b.is_zero() {
                s = s - b.clone() * y[i + j + 1].clone();
            }
        }
        y[i] = s;
    }
    let mut w = vec![F::zero(); n];
    for i in 0..n - shift {
        w[i + shift] = y[i].clone();
    }
    w[0] = -sum(&w);
    Ok(w)
}

pub fn build_right_chains<F: Scalar>(params: &ModelParams<F>) -> Result<RightChains<F>> {
    params.validate()?;
    let mult = params.multiplicities();
    let mut chains = Vec::with_capacity(params.t);
    for (v1, &d) in right_eigenvectors(params.n, params.t).into_iter().zip(&mult.block_sizes) {
        let mut chain = vec![v1];
        for _ in 1..d {
            let next = chain_step(params, chain.last().expect("non-empty chain"))?;
            chain.push(next);
        }
        chains.push(chain);
    }
    Ok(RightChains { n: params.n, t: params.t, block_sizes: mult.block_sizes, chains })
}

/// Basis of the invariant subspace of the non-zero eigenvalues,
/// `span{N^k 1 : k = 0..p1}`, orthogonalized (and normalized in floating
/// point).
pub fn krylov_complement<F: Scalar>(params: &ModelParams<F>) -> Matrix<F> {
    let dim = params.multiplicities().p1 + 1;
    let mut basis: Vec<Vec<F>> = Vec::with_capacity(dim);
    let mut v = vec![F::one(); params.n];
    for k in 0..dim {
        if k > 0 {
            v = params.apply_shift_part(basis.last().expect("previous vector"));
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &v) / dot(q, q);
                for (x, y) in v.iter_mut().zip(q) {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        F::normalize(&mut v);
        basis.push(v.clone());
    }
    Matrix::from_columns(params.n, &basis)
}

/// Left chains dual to `right`, from `W_0^† [V_0 | K] = [I | 0]`.
pub fn build_left_chains<F: Scalar>(params: &ModelParams<F>, right: RightChains<F>) -> Result<JordanBasis<F>> {
    let n = params.n;
    let mut cols: Vec<Vec<F>> = right.chains.iter().flatten().cloned().collect();
    let a0 = cols.len();
    let k = krylov_complement(params);
    if a0 + k.ncols() != n {
        return Err(Error::Singular(format!(
            "chain count {a0} plus complement {} differs from n = {n}",
            k.ncols()
        )));
    }
    cols.extend((0..k.ncols()).map(|j| k.column(j)));
    let a = Matrix::from_columns(n, &cols);
    let rhs = Matrix::from_fn(n, a0, |i, j| if i == j { F::one() } else { F::zero() });
    let x = a.adjoint().solve(&rhs).map_err(|e| {
        Error::Singular(format!("left-chain system for n = {n}, t = {}: {e}", params.t))
    })?;
    let mut idx = 0;
    let left_chains = right
        .chains
        .iter()
        .map(|c| {
            c.iter()
                .map(|_| {
                    idx += 1;
                    x.column(idx - 1)
                })
                .collect()
        })
        .collect();
    Ok(JordanBasis {
        n,
        t: params.t,
        block_sizes: right.block_sizes,
        right_chains: right.chains,
        left_chains,
    })
}

pub fn jordan_basis<F: Scalar>(params: &ModelParams<F>) -> Result<JordanBasis<F>> {
    build_left_chains(params, build_right_chains(params)?)
}

/// Closed-form chains for `h = 0`.
pub fn closed_form_b0<F: Scalar>(n: usize, t: usize) -> Result<JordanBasis<F>> {
    let mult = crate::model::multiplicities(n, t)?;
    if t == 0 {
        return Ok(JordanBasis { n, t, block_sizes: vec![], right_chains: vec![], left_chains: vec![] });
    }
    let m = t + 1;
    let xi = n % m;
    let int = |v: i64| F::from_i64(v);
    let mut right_chains = Vec::with_capacity(t);
    let mut left_chains = Vec::with_capacity(t);
    for (l, &d) in (1..=t).zip(&mult.block_sizes) {
        right_chains.push(
            (1..=d)
                .map(|q| {
                    let mut v = vec![F::zero(); n];
                    v[m * (q - 1)] = F::one();
                    v[m * (q - 1) + l] = -F::one();
                    v
                })
                .collect::<Vec<_>>(),
        );
        let mut chain = vec![Vec::new(); d];
        for q in 0..d {
            let mut w = vec![F::zero(); n];
            if xi == 0 {
                let s = n - (q + 1) * m;
                for j in 0..m {
                    w[s + j] = if j == l { int(-(t as i64)) } else { F::one() } / int(m as i64);
                }
            } else {
                let xi_f = int(xi as i64);
                let omega = int(-((t - xi + 1) as i64)) / xi_f.clone();
                let mut vals: Vec<F>;
                let head;
                if q == 0 {
                    if l < xi {
                        head = n - xi;
                        vals = (0..xi).map(|j| if j == l { int(1 - xi as i64) } else { F::one() }).collect();
                    } else {
                        head = n - t - 1 + l - xi;
                        vals = std::iter::once(int(-(xi as i64)))
                            .chain(std::iter::repeat(F::zero()).take(t - l))
                            .chain(std::iter::repeat(F::one()).take(xi))
                            .collect();
                    }
                } else {
                    if l < xi {
                        head = m * (d - q - 1);
                        vals = (0..m).map(|j| if j == l { int(1 - xi as i64) } else { F::one() }).collect();
                    } else {
                        head = m * (d - q - 1) + l;
                        vals = std::iter::once(int(-(xi as i64)))
                            .chain(std::iter::repeat(F::zero()).take(t - l))
                            .chain(std::iter::repeat(F::one()).take(m))
                            .collect();
                    }
                    for k in 1..q {
                        vals.extend(std::iter::repeat(crate::scalar::pow(&omega, k)).take(m));
                    }
                    vals.extend(std::iter::repeat(crate::scalar::pow(&omega, q)).take(xi));
                }
                if head + vals.len() != n {
                    return Err(Error::Singular(format!("closed-form layout mismatch at l = {l}, q = {q}")));
                }
                for (j, x) in vals.into_iter().enumerate() {
                    w[head + j] = x / xi_f.clone();
                }
            }
            chain[d - 1 - q] = w;
        }
        left_chains.push(chain);
    }
    Ok(JordanBasis { n, t, block_sizes: mult.block_sizes, right_chains, left_chains })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConditionNumbers {
    /// `(ℓ, κ^(ℓ))` for every block of maximal size.
    pub per_block: Vec<(usize, f64)>,
    pub kappa0: f64,
}

/// `‖v^(ℓ,1)‖ ‖w^(ℓ,d)‖` over the blocks of maximal size.
pub fn condition_numbers<F: Scalar>(basis: &JordanBasis<F>) -> ConditionNumbers {
    let k0 = basis.block_sizes.iter().copied().max().unwrap_or(0);
    let per_block: Vec<(usize, f64)> = basis
        .block_sizes
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == k0 && d > 0)
        .map(|(l, &d)| {
            let v = to_c64_vec(&basis.right_chains[l][0]);
            let w = to_c64_vec(&basis.left_chains[l][d - 1]);
            (l + 1, norm2(&v) * norm2(&w))
        })
        .collect();
    let kappa0 = per_block.iter().map(|p| p.1).fold(0.0, f64::max);
    ConditionNumbers { per_block, kappa0 }
}

/// [`condition_numbers`] evaluated exactly from the binary values of the
/// parameters.
///
/// The top left vector of each block spans with the others the left kernel of
/// `M`: zero-sum vectors supported on the last `t+1` coordinates. It is fixed
/// by pairing with the top right vectors alone, so only the right chains and
/// a `t × t` solve are needed. In floating point the right chains lose their
/// leading digits to cancellation once `b ≠ 0` and `n` reaches a few dozen.
pub fn condition_numbers_exact(params: &ModelParams) -> Result<ConditionNumbers> {
    let exact_value = |c: &Complex64| {
        RationalComplex::from_f64(c.re, c.im).ok_or_else(|| Error::NonFinite("model parameters".into()))
    };
    let b_coeffs = params.b_coeffs.iter().map(exact_value).collect::<Result<Vec<_>>>()?;
    let exact = ModelParams::new(params.n, params.t, b_coeffs, exact_value(&params.delta)?)?;
    let (n, t) = (params.n, params.t);
    let right = build_right_chains(&exact)?;
    let k0 = right.block_sizes.iter().copied().max().unwrap_or(0);
    if t == 0 || k0 == 0 {
        return Ok(ConditionNumbers { per_block: vec![], kappa0: 0.0 });
    }
    // Kernel basis e_{n-t-1+j} - e_{n-1}; row r pairs it with block r's top vector.
    let pairing = Matrix::from_fn(t, t, |r, j| {
        let top = right.chains[r].last().expect("non-empty chain");
        top[n - t - 1 + j].clone() - top[n - 1].clone()
    });
    let coeffs = pairing
        .solve(&Matrix::identity(t))
        .map_err(|e| Error::Singular(format!("top-vector pairing for n = {n}, t = {t}: {e}")))?;
    let per_block: Vec<(usize, f64)> = right
        .block_sizes
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == k0)
        .map(|(l, _)| {
            let c = coeffs.column(l);
            let tail = c.iter().fold(RationalComplex::zero(), |acc, x| acc + x.clone());
            let w_sq = c.iter().chain(std::iter::once(&tail)).fold(BigRational::zero(), |acc, x| acc + x.norm_sqr());
            let v_sq = right.chains[l][0].iter().fold(BigRational::zero(), |acc, x| acc + x.norm_sqr());
            (l + 1, exact_sqrt(&w_sq) * exact_sqrt(&v_sq))
        })
        .collect();
    let kappa0 = per_block.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(ConditionNumbers { per_block, kappa0 })
}

fn exact_sqrt(q: &BigRational) -> f64 {
    q.to_f64().map_or(f64::INFINITY, f64::sqrt)
}

/// `κ₀` at `b = 0` when `ξ = n mod (t+1) ≥ 2`: `√(2(ξ-1)/ξ)`.
pub fn kappa0_zero_b(n: usize, t: usize) -> Option<f64> {
    let xi = n % (t + 1);
    (xi >= 2).then(|| (2.0 * (xi as f64 - 1.0) / xi as f64).sqrt())
}

/// `√(2(t-1)/t)`, an upper bound for [`kappa0_zero_b`].
pub fn kappa0_bound(t: usize) -> f64 {
    if t == 0 {
        return 0.0;
    }
    (2.0 * (t as f64 - 1.0) / t as f64).sqrt()
}

/// Worst-case deviations of a basis from the defining identities.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ChainDiagnostics {
    /// `max ‖M v^(q) - v^(q-1)‖ / ‖M‖`.
    pub right_residual: f64,
    /// `max ‖w^(q)† M - w^(q+1)†‖ / ‖M‖`.
    pub left_residual: f64,
    pub zero_sum: f64,
    /// `max |⟨w^(ℓ,p), v^(r,q)⟩ - δ_{ℓr}δ_{pq}|`.
    pub gram_deviation: f64,
}

impl<F: Scalar> JordanBasis<F> {
    pub fn diagnostics(&self, params: &ModelParams<F>) -> ChainDiagnostics {
        let mc = build_matrix(params).expect("validated parameters").to_c64();
        let norm = mc.norm2().max(f64::MIN_POSITIVE);
        let madj = mc.adjoint();
        let right: Vec<Vec<Vec<Complex64>>> =
            self.right_chains.iter().map(|c| c.iter().map(|v| to_c64_vec(v)).collect()).collect();
        let left: Vec<Vec<Vec<Complex64>>> =
            self.left_chains.iter().map(|c| c.iter().map(|v| to_c64_vec(v)).collect()).collect();
        let mut d = ChainDiagnostics { right_residual: 0.0, left_residual: 0.0, zero_sum: 0.0, gram_deviation: 0.0 };
        for (rc, lc) in right.iter().zip(&left) {
            for q in 0..rc.len() {
                let mv = mc.mul_vec(&rc[q]);
                let r: Vec<Complex64> = match q {
                    0 => mv,
                    _ => mv.iter().zip(&rc[q - 1]).map(|(a, b)| a - b).collect(),
                };
                d.right_residual = d.right_residual.max(norm2(&r) / norm);
                let mw = madj.mul_vec(&lc[q]);
                let r: Vec<Complex64> = match lc.get(q + 1) {
                    Some(next) => mw.iter().zip(next).map(|(a, b)| a - b).collect(),
                    None => mw,
                };
                d.left_residual = d.left_residual.max(norm2(&r) / norm);
                let s1: Complex64 = rc[q].iter().sum();
                let s2: Complex64 = lc[q].iter().sum();
                d.zero_sum = d.zero_sum.max(s1.norm()).max(s2.norm());
            }
        }
        for (l, lc) in left.iter().enumerate() {
            for (p, w) in lc.iter().enumerate() {
                for (r, rc) in right.iter().enumerate() {
                    for (q, v) in rc.iter().enumerate() {
                        let target = if (l, p) == (r, q) { 1.0 } else { 0.0 };
                        d.gram_deviation = d.gram_deviation.max((dot(w, v) - target).norm());
                    }
                }
            }
        }
        d
    }

    pub fn to_c64(&self) -> JordanBasis<Complex64> {
        let conv = |cs: &Vec<Vec<Vec<F>>>| -> Vec<Vec<Vec<Complex64>>> {
            cs.iter().map(|c| c.iter().map(|v| to_c64_vec(v)).collect()).collect()
        };
        JordanBasis {
            n: self.n,
            t: self.t,
            block_sizes: self.block_sizes.clone(),
            right_chains: conv(&self.right_chains),
            left_chains: conv(&self.left_chains),
        }
    }
}

/// Full similarity `W M V = 𝕁 ⊕ diag(λ)` with `W = V^{-1}`.
#[derive(Debug, Clone)]
pub struct Similarity {
    /// Right chains, then non-zero right eigenvectors, as columns.
    pub v: DenseMatrix,
    /// Left chains, then non-zero left eigenvectors, as conjugated rows.
    pub w: DenseMatrix,
    /// The target canonical form.
    pub canonical: DenseMatrix,
    /// `‖W V - I‖_F`.
    pub inverse_residual: f64,
    /// `‖W M V - (𝕁 ⊕ Λ)‖_F`.
    pub similarity_residual: f64,
    /// 2-norm condition number of `V`.
    pub condition: f64,
    pub warning: Option<String>,
}

pub fn assemble_similarity(
    params: &ModelParams,
    basis: &JordanBasis,
    spectrum: &SpectrumReport,
) -> Result<Similarity> {
    let n = params.n;
    let mut right: Vec<Vec<Complex64>> = basis.right_chains.iter().flatten().cloned().collect();
    let mut left: Vec<Vec<Complex64>> = basis.left_chains.iter().flatten().cloned().collect();
    let a0 = right.len();
    for &lambda in &spectrum.nonzero_eigenvalues {
        let pair = nonzero_eigenvector(params, lambda)?;
        right.push(pair.right);
        left.push(pair.left);
    }
    if right.len() != n {
        return Err(Error::Singular(format!("basis has {} vectors for n = {n}", right.len())));
    }
    let v = DenseMatrix::from_columns(n, &right);
    let w = DenseMatrix::from_fn(n, n, |i, j| left[i][j].conj());
    let mut canonical = DenseMatrix::zeros(n, n);
    let mut start = 0;
    for &d in &basis.block_sizes {
        for q in 1..d {
            canonical[(start + q - 1, start + q)] = Complex64::new(1.0, 0.0);
        }
        start += d;
    }
    for (j, &lambda) in spectrum.nonzero_eigenvalues.iter().enumerate() {
        canonical[(a0 + j, a0 + j)] = lambda;
    }
    let m = build_matrix(params)?;
    let inverse_residual = w.mul(&v).sub(&DenseMatrix::identity(n)).frobenius();
    let similarity_residual = w.mul(&m).mul(&v).sub(&canonical).frobenius();
    let sv = v.singular_values();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let warning = (condition > 1e12).then(|| format!("similarity basis is ill-conditioned (cond = {condition:e})"));
    Ok(Similarity { v, w, canonical, inverse_residual, similarity_residual, condition, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_oracle::RationalComplex as Q;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn eigenvectors_lie_in_kernel() {
        let p = ModelParams::with_b(6, 2, c(0.7), c(0.3)).unwrap();
        for (l, v) in right_eigenvectors::<Complex64>(6, 2).iter().enumerate() {
            assert_eq!(v[0], c(1.0));
            assert_eq!(v[l + 1], c(-1.0));
            assert!(p.apply(v).iter().all(|x| x.norm() < 1e-15));
        }
    }

    #[test]
    fn step_matches_displayed_vector() {
        let b = Q::ratio(3, 7);
        let p = ModelParams::with_b(6, 2, b.clone(), Q::ratio(1, 5)).unwrap();
        let w = chain_step(&p, &right_eigenvectors::<Q>(6, 2)[0]).unwrap();
        let one = Q::one();
        let expect = vec![-b.clone(), Q::zero(), Q::zero(), one.clone() + b, -one, Q::zero()];
        assert_eq!(w, expect);
    }

    #[test]
    fn step_for_zero_b_is_a_pure_shift() {
        let p = ModelParams::with_b(9, 2, c(0.0), c(1.0)).unwrap();
        let v = right_eigenvectors::<Complex64>(9, 2)[1].clone();
        let w = chain_step(&p, &v).unwrap();
        let mut expect = vec![c(0.0); 9];
        expect[3] = c(1.0);
        expect[5] = c(-1.0);
        assert_eq!(w, expect);
    }

    #[test]
    fn general_step_formula() {
        // b(-1 + (-b)^l)/(1+b), 0 x t, 1 - (-b)^l, -(-b)^{l-1}, …, -(-b), -1
        let b = Q::ratio(-2, 5);
        let (n, t, l) = (16, 4, 4usize);
        let p = ModelParams::with_b(n, t, b.clone(), Q::one()).unwrap();
        let w = chain_step(&p, &right_eigenvectors::<Q>(n, t)[l - 1]).unwrap();
        let nb = -b.clone();
        let pw = |k| crate::scalar::pow(&nb, k);
        let mut expect = vec![Q::zero(); n];
        expect[0] = b.clone() * (pw(l) - Q::one()) / (Q::one() + b.clone());
        expect[t + 1] = Q::one() - pw(l);
        for k in 1..=l {
            expect[t + 1 + k] = -pw(l - k);
        }
        assert_eq!(w, expect);
    }

    #[test]
    fn exhausted_chain_is_signalled() {
        let p = ModelParams::with_b(6, 2, c(1.0), c(1.0)).unwrap();
        let r = build_right_chains(&p).unwrap();
        let err = chain_step(&p, &r.chains[0][1]).unwrap_err();
        assert!(matches!(err, Error::ChainExhausted { .. }));
    }

    #[test]
    fn series_inverse_of_linear_h() {
        let g = series_inverse(&[c(0.5)], 6);
        for (k, x) in g.iter().enumerate() {
            assert!((x - c((-0.5f64).powi(k as i32 + 1))).norm() < 1e-15);
        }
    }

    #[test]
    fn chains_satisfy_identities() {
        // Left chains grow like powers of 1/|b| relative to the right ones, so
        // larger b is exercised on small sizes and exactly in the oracle tests.
        for &(n, t, b) in &[(6, 2, 1.0), (30, 1, 0.0), (29, 4, 0.0), (12, 2, 0.5), (11, 1, -0.3), (12, 10, 2.0)] {
            let p = ModelParams::with_b(n, t, c(b), Complex64::new(0.01, 0.002)).unwrap();
            let basis = jordan_basis(&p).unwrap();
            assert_eq!(basis.right_chains.iter().map(Vec::len).collect::<Vec<_>>(), p.multiplicities().block_sizes);
            let d = basis.diagnostics(&p);
            assert!(d.right_residual < 1e-12, "{n} {t}: {d:?}");
            assert!(d.left_residual < 1e-10, "{n} {t}: {d:?}");
            assert!(d.gram_deviation < 1e-10, "{n} {t}: {d:?}");
            assert!(d.zero_sum < 1e-12, "{n} {t}: {d:?}");
        }
    }

    #[test]
    fn right_chain_support_grows_by_blocks() {
        let p = ModelParams::with_b(23, 3, c(0.8), c(0.1)).unwrap();
        let r = build_right_chains(&p).unwrap();
        for (l, chain) in r.chains.iter().enumerate() {
            for (q, v) in chain.iter().enumerate() {
                let limit = q * 4 + l + 2;
                assert!(v[limit..].iter().all(|x| x.norm() == 0.0));
            }
        }
    }

    #[test]
    fn chains_do_not_depend_on_delta() {
        let a = build_right_chains(&ModelParams::with_b(15, 2, c(0.4), c(0.01)).unwrap()).unwrap();
        let b = build_right_chains(&ModelParams::with_b(15, 2, c(0.4), c(3.0)).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn top_left_vector_has_zero_head() {
        let (n, t) = (19, 4);
        let basis = jordan_basis(&ModelParams::with_b(n, t, c(1.0), c(0.1)).unwrap()).unwrap();
        for (chain, &d) in basis.left_chains.iter().zip(&basis.block_sizes) {
            assert!(chain[d - 1][..n - t - 1].iter().all(|x| x.norm() < 1e-12));
        }
    }

    #[test]
    fn omega_value() {
        let (t, xi) = (5i64, 2i64);
        assert_eq!(-(t - xi + 1) as f64 / xi as f64, -2.0);
    }

    #[test]
    fn closed_form_matches_construction_exactly() {
        for &(n, t) in &[(8, 1), (9, 2), (11, 3), (12, 3), (10, 4)] {
            let built = jordan_basis(&ModelParams::with_b(n, t, Q::zero(), Q::ratio(1, 10)).unwrap()).unwrap();
            let closed = closed_form_b0::<Q>(n, t).unwrap();
            assert_eq!(built, closed, "n = {n}, t = {t}");
        }
    }

    #[test]
    fn kappa_zero_b_uses_remainder() {
        let (n, t) = (23, 4); // ξ = 3
        let basis = closed_form_b0::<Complex64>(n, t).unwrap();
        let k = condition_numbers(&basis);
        let expect = (2.0f64).sqrt() * (2.0f64 / 3.0).sqrt();
        assert!((k.kappa0 - expect).abs() < 1e-12);
        assert!((kappa0_zero_b(n, t).unwrap() - expect).abs() < 1e-15);
        assert!(k.kappa0 <= kappa0_bound(t) + 1e-12);
        assert_eq!(kappa0_zero_b(21, 4), None);
    }

    #[test]
    fn rank_one_norm_identity() {
        let basis = jordan_basis(&ModelParams::with_b(14, 3, c(1.0), c(0.1)).unwrap()).unwrap();
        let v = &basis.right_chains[0][0];
        let w = basis.left_chains[0].last().unwrap();
        let outer = DenseMatrix::from_fn(14, 14, |i, j| v[i] * w[j].conj());
        let k = condition_numbers(&basis);
        let direct = outer.norm2();
        assert!(k.per_block.iter().any(|&(_, x)| (x - direct).abs() < 1e-10 * direct));
    }

    #[test]
    fn exact_kappa_matches_exact_basis() {
        for b in [c(0.0), c(1.0), Complex64::new(1.0, 1.0), c(0.375)] {
            for (n, t) in [(7, 1), (9, 2), (11, 3), (12, 5), (10, 8)] {
                let p = ModelParams::with_b(n, t, b, c(0.125)).unwrap();
                let q = ModelParams::with_b(n, t, Q::from_f64(b.re, b.im).unwrap(), Q::ratio(1, 8)).unwrap();
                let want = condition_numbers(&jordan_basis(&q).unwrap());
                let got = condition_numbers_exact(&p).unwrap();
                assert_eq!(got.per_block.len(), want.per_block.len());
                for (g, w) in got.per_block.iter().zip(&want.per_block) {
                    assert_eq!(g.0, w.0);
                    assert!((g.1 - w.1).abs() <= 1e-14 * w.1, "n={n} t={t} b={b}: {} vs {}", g.1, w.1);
                }
            }
        }
        let k = condition_numbers_exact(&ModelParams::with_b(23, 4, c(0.0), c(0.01)).unwrap()).unwrap();
        assert!((k.kappa0 - kappa0_zero_b(23, 4).unwrap()).abs() < 1e-15);
    }
}
