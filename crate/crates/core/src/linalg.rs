//! Dense complex eigenvalues and smallest singular values.
//!
//! Eigenvalues come from balancing, Householder reduction to Hessenberg form
//! and the implicitly shifted complex QR iteration with Wilkinson shifts. The
//! Schur factor is reused for pseudospectra, where `σ_min(zI - T)` is found by
//! Lanczos on `((zI - T)†(zI - T))^{-1}` using two triangular solves per step.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Diagonal similarity by powers of two that equalizes row and column norms.
pub fn balance(a: &DenseMatrix) -> DenseMatrix {
    let n = a.nrows();
    let mut m = a.clone();
    let radix = 2.0f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut cc, mut rr) = (c, r);
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if cc + rr < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    m
}

/// Unitarily similar upper Hessenberg matrix.
pub fn hessenberg(a: &DenseMatrix) -> DenseMatrix {
    let n = a.nrows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { Complex64::new(1.0, 0.0) };
        v[0] += phase * norm;
        let vn = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= vn);
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * h[(k + 1 + i, j)]).sum();
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, j)] -= vi * s * 2.0;
            }
        }
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(j, vj)| h[(i, k + 1 + j)] * vj).sum();
            for (j, vj) in v.iter().enumerate() {
                h[(i, k + 1 + j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// `(c, s)` with real `c` such that `[c s; -s̄ c] [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Eigenvalue of `[a b; c d]` closest to `d`.
fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let (m1, m2) = (mid + disc, mid - disc);
    if (m1 - d).norm() <= (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Reduces an upper Hessenberg matrix to triangular form in place. With
/// `full` the whole Schur factor is maintained, otherwise only the diagonal
/// is meaningful on exit.
fn qr_iterate(h: &mut DenseMatrix, full: bool) -> Result<()> {
    let n = h.nrows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].l1_norm();
            let mut scale = h[(lo, lo)].l1_norm() + h[(lo - 1, lo - 1)].l1_norm();
            if scale == 0.0 {
                scale = (lo.saturating_sub(1)..n.min(hi + 1)).map(|j| h[(lo, j)].l1_norm()).sum();
            }
            if sub <= eps * scale || sub < f64::MIN_POSITIVE {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            return Err(Error::QrStalled { lo, hi, iterations: iter - 1 });
        }
        let shift = match iter {
            10 => h[(lo, lo)] + 0.75 * h[(lo + 1, lo)].re.abs(),
            20 => h[(hi, hi)] + 0.75 * h[(hi, hi - 1)].re.abs(),
            _ => wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]),
        };
        let (col_lo, row_hi) = if full { (0, n) } else { (lo, hi + 1) };
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let start = if k > lo { k - 1 } else { lo };
            for j in start..row_hi {
                let (a, b) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = a * c + s * b;
                h[(k + 1, j)] = -s.conj() * a + b * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            for i in col_lo..(k + 3).min(hi + 1) {
                let (a, b) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = a * c + b * s.conj();
                h[(i, k + 1)] = -s * a + b * c;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// All eigenvalues, in the order they appear on the Schur diagonal.
pub fn eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix has non-finite entries".into()));
    }
    let mut h = hessenberg(&balance(a));
    qr_iterate(&mut h, false)?;
    Ok((0..a.nrows()).map(|i| h[(i, i)]).collect())
}

/// Upper triangular `T` unitarily similar to `a`.
pub fn schur_triangle(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix has non-finite entries".into()));
    }
    let mut h = hessenberg(a);
    qr_iterate(&mut h, true)?;
    let n = h.nrows();
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(h)
}

/// `x = (zI - T)^{-1} b` for upper triangular `T`; `None` if singular.
fn solve_upper(t: &DenseMatrix, z: Complex64, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = t.nrows();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        let row = t.row(i);
        let mut s = x[i];
        for j in i + 1..n {
            s += row[j] * x[j];
        }
        let d = z - row[i];
        if d == ZERO {
            return None;
        }
        x[i] = s / d;
    }
    Some(x)
}

/// `x = ((zI - T)†)^{-1} b`.
fn solve_upper_adjoint(t: &DenseMatrix, z: Complex64, b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = t.nrows();
    let mut x = b.to_vec();
    for i in 0..n {
        let d = (z - t[(i, i)]).conj();
        if d == ZERO {
            return None;
        }
        x[i] /= d;
        let xi = x[i];
        let row = t.row(i);
        for j in i + 1..n {
            x[j] += row[j].conj() * xi;
        }
    }
    Some(x)
}

/// Smallest singular value of `zI - T` and the corresponding right singular
/// vector estimate.
#[derive(Debug, Clone)]
pub struct SigmaMin {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub lanczos_steps: usize,
}

/// Relative tolerance on the Ritz residual of the inverse Lanczos iteration.
pub const SIGMA_TOL: f64 = 1e-10;

/// `σ_min(zI - T)` for upper triangular `T`, by Lanczos on the inverse Gram
/// matrix with full reorthogonalisation, falling back to a full SVD.
pub fn sigma_min_triangular(t: &DenseMatrix, z: Complex64, warm: Option<&[Complex64]>) -> SigmaMin {
    let n = t.nrows();
    if (0..n).any(|i| t[(i, i)] == z) {
        return SigmaMin { value: 0.0, vector: vec![ZERO; n], lanczos_steps: 0 };
    }
    let generic: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0, 0.37 * (i as f64 + 1.0).sqrt())).collect();
    let gn = norm(&generic);
    // A warm start alone may span an invariant subspace that misses the new
    // minimiser, so a small generic component is always mixed in.
    let mut q0: Vec<Complex64> = match warm {
        Some(w) if w.len() == n && norm(w) > 0.0 => {
            let wn = norm(w);
            w.iter().zip(&generic).map(|(a, g)| a / wn + g * (1e-2 / gn)).collect()
        }
        _ => generic,
    };
    let nq = norm(&q0);
    q0.iter_mut().for_each(|x| *x /= nq);
    let max_steps = n.min(40);
    let mut basis: Vec<Vec<Complex64>> = vec![q0];
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    for k in 0..max_steps {
        let apply = solve_upper_adjoint(t, z, &basis[k]).and_then(|y| solve_upper(t, z, &y));
        let Some(mut w) = apply.filter(|w| w.iter().all(|x| x.re.is_finite() && x.im.is_finite())) else {
            return sigma_min_svd(t, z);
        };
        let a = dot(&basis[k], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        if k >= 6 && k % 4 != 3 && k + 1 != max_steps && b > f64::EPSILON * alpha[k].abs() {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            basis.push(w);
            continue;
        }
        let (theta, y) = top_ritz(&alpha, &beta);
        let last = y[k].abs();
        let converged = b * last <= SIGMA_TOL * theta || b <= f64::EPSILON * theta;
        if converged || k + 1 == max_steps {
            if !converged {
                return sigma_min_svd(t, z);
            }
            let mut v = vec![ZERO; n];
            for (q, yk) in basis.iter().zip(&y) {
                v.iter_mut().zip(q).for_each(|(x, qi)| *x += qi * *yk);
            }
            return SigmaMin { value: 1.0 / theta.sqrt(), vector: v, lanczos_steps: k + 1 };
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(w);
    }
    sigma_min_svd(t, z)
}

fn sigma_min_svd(t: &DenseMatrix, z: Complex64) -> SigmaMin {
    let n = t.nrows();
    let shifted = DMatrix::from_fn(n, n, |i, j| if i == j { z - t[(i, j)] } else { -t[(i, j)] });
    let value = shifted.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
    SigmaMin { value, vector: Vec::new(), lanczos_steps: 0 }
}

/// Largest eigenvalue of the Lanczos tridiagonal and its eigenvector.
fn top_ritz(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let tri = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(tri);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty tridiagonal");
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
