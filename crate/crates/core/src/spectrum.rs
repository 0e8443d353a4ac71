//! Non-zero eigenvalues from the closed-form characteristic polynomial.
//!
//! For `h(s) = b s` the non-zero eigenvalues are the `p1 + 1` roots of a monic
//! polynomial whose coefficients are finite sums in `n, t, b, δ`. The roots are
//! found together by Aberth–Ehrlich iteration.

use crate::error::{Error, Result};
use crate::model::{Multiplicities, ModelParams};
use crate::scalar::{pow, Scalar};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyForm {
    /// General `b` with the truncation correction.
    General,
    /// The simplified `b = 0` form.
    ZeroB,
}

/// Monic polynomial `Σ c_k z^k` of degree `p1 + 1` whose roots are the
/// non-zero eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct CharPolynomial<F = Complex64> {
    /// Ascending coefficients, `coeffs[p1 + 1] = 1`.
    pub coeffs: Vec<F>,
    pub form: PolyForm,
}

impl<F: Scalar> CharPolynomial<F> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

/// Closed-form characteristic factor of the non-zero eigenvalues.
pub fn char_poly<F: Scalar>(params: &ModelParams<F>) -> Result<CharPolynomial<F>> {
    let b = checked_b(params)?;
    if b.is_zero() {
        Ok(zero_b_form(params))
    } else {
        Ok(general_form(params, &b))
    }
}

fn checked_b<F: Scalar>(params: &ModelParams<F>) -> Result<F> {
    params.validate()?;
    if params.delta.is_zero() {
        return Err(Error::ZeroDelta);
    }
    params
        .linear_b()
        .ok_or(Error::UnsupportedCoefficients(params.b_coeffs.len()))
}

/// `z^{p1+1} - δ Σ_k (n - (p1-k)(t+1)) z^k`.
pub fn zero_b_form<F: Scalar>(params: &ModelParams<F>) -> CharPolynomial<F> {
    let Multiplicities { p1, .. } = params.multiplicities();
    let (n, m) = (params.n as i64, params.t as i64 + 1);
    let mut coeffs: Vec<F> = (0..=p1)
        .map(|k| -params.delta.clone() * F::from_i64(n - (p1 - k) as i64 * m))
        .collect();
    coeffs.push(F::one());
    CharPolynomial { coeffs, form: PolyForm::ZeroB }
}

/// The general form, cleared of the `(1+b)` denominators:
///
/// `c_k = -δ[(n - e(t+1))(1+b)^e - e b (1+b)^{e-1}] - δ·1_active Σ_q b^q C(e,q)(q - n + (t+1)e)`
/// with `e = p1 - k`, the correction running over `k < p1 - p2` and
/// `q ∈ [n - (t+1)e + 1, e]`, active when `p1 ≥ p2 + 1` and `p1 ≥ (n+1)/(t+2)`.
pub fn general_form<F: Scalar>(params: &ModelParams<F>, b: &F) -> CharPolynomial<F> {
    let Multiplicities { p1, p2, .. } = params.multiplicities();
    let (n, m) = (params.n as i64, params.t as i64 + 1);
    let opb = F::one() + b.clone();
    let delta = params.delta.clone();
    let mut coeffs: Vec<F> = (0..=p1)
        .map(|k| {
            let e = p1 - k;
            let mut term = F::from_i64(n - e as i64 * m) * pow(&opb, e);
            if e >= 1 {
                term = term - F::from_i64(e as i64) * b.clone() * pow(&opb, e - 1);
            }
            -delta.clone() * term
        })
        .collect();
    let active = p1 > p2 && (p1 as i64) * (m + 1) >= n + 1;
    if active {
        for k in 0..p1 - p2 {
            let e = p1 - k;
            let lo = n - m * e as i64 + 1;
            let mut s = F::zero();
            for q in lo.max(0)..=e as i64 {
                let q = q as usize;
                s = s + pow(b, q) * binomial::<F>(e, q) * F::from_i64(q as i64 - n + m * e as i64);
            }
            coeffs[k] = coeffs[k].clone() - delta.clone() * s;
        }
    }
    coeffs.push(F::one());
    CharPolynomial { coeffs, form: PolyForm::General }
}

/// Gaussian integer `re + i·im`.
#[derive(Clone)]
struct GaussInt {
    re: BigInt,
    im: BigInt,
}

impl GaussInt {
    fn mul(&self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

/// `(mantissa, exponent)` with `x = mantissa · 2^exponent`.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    (BigInt::from(sign) * BigInt::from(m), e)
}

fn rounded(num: &BigInt, shift: u64) -> f64 {
    BigRational::new_raw(num.clone(), BigInt::one() << shift).to_f64().unwrap_or(f64::NAN)
}

/// `num / 2^shift` as an unevaluated sum `hi + lo` of two doubles.
fn rounded_dd(num: &BigInt, shift: u64) -> (f64, f64) {
    let hi = rounded(num, shift);
    if hi == 0.0 || !hi.is_finite() {
        return (hi, 0.0);
    }
    let (m, e) = dyadic(hi);
    let k = e + shift as i64;
    let lo = if k >= 0 {
        rounded(&(num - (m << k as u64)), shift)
    } else {
        rounded(&((num << (-k) as u64) - m), shift + (-k) as u64)
    };
    (hi, lo)
}

/// `-δ · v` for a double-double complex `v`.
fn scale_by_delta(delta: Complex64, re: (f64, f64), im: (f64, f64)) -> DdComplex {
    let pr = dd_add(dd_mul(re, -delta.re), dd_mul(im, delta.im));
    let pi = dd_add(dd_mul(re, -delta.im), dd_mul(im, -delta.re));
    DdComplex { re: pr, im: pi }
}

/// [`char_poly`] for floating-point parameters with every coefficient
/// evaluated exactly from the binary values of `b` and `δ` and then rounded.
///
/// Summed in floating point, the general form cancels terms of size
/// `|1+b|^{p1}` and loses all accuracy once `p1` reaches a few dozen. Exactly,
/// `c_k = -δ Σ_q C(e,q) b^q (N - q)` with `N = n - (t+1)e`, the sum running
/// over `q ≤ min(e, N)` where the indicator correction applies and over
/// `q ≤ e` elsewhere.
pub fn char_poly_rounded(params: &ModelParams) -> Result<CharPolynomial> {
    let form = if checked_b(params)? == Complex64::new(0.0, 0.0) { PolyForm::ZeroB } else { PolyForm::General };
    let coeffs = coefficients_dd(params)?.into_iter().map(DdComplex::value).collect();
    Ok(CharPolynomial { coeffs, form })
}

/// Ascending coefficients in double-double, monic.
fn coefficients_dd(params: &ModelParams) -> Result<Vec<DdComplex>> {
    let b = checked_b(params)?;
    let Multiplicities { p1, p2, .. } = params.multiplicities();
    let (n, m) = (params.n as i64, params.t as i64 + 1);
    let mut coeffs: Vec<DdComplex> = if b == Complex64::new(0.0, 0.0) {
        (0..=p1)
            .map(|k| scale_by_delta(params.delta, ((n - m * (p1 - k) as i64) as f64, 0.0), (0.0, 0.0)))
            .collect()
    } else {
        let ((br, er), (bi, ei)) = (dyadic(b.re), dyadic(b.im));
        let s = (-er).max(-ei).max(0);
        let base = GaussInt { re: br << (er + s) as u64, im: bi << (ei + s) as u64 };
        let mut powers = vec![GaussInt { re: BigInt::one(), im: BigInt::zero() }];
        for q in 1..=p1 {
            powers.push(powers[q - 1].mul(&base));
        }
        let active = p1 > p2 && (p1 as i64) * (m + 1) >= n + 1;
        let s = s as u64;
        (0..=p1)
            .map(|k| {
                let e = p1 - k;
                let big_n = n - m * e as i64;
                let q_max = if active && k < p1 - p2 { big_n.min(e as i64) } else { e as i64 };
                let mut sum = GaussInt { re: BigInt::zero(), im: BigInt::zero() };
                let mut binom = BigInt::one();
                for q in 0..=q_max.max(-1) {
                    let q = q as usize;
                    if q > 0 {
                        binom = binom * BigInt::from(e - q + 1) / BigInt::from(q);
                    }
                    let weight = &binom * BigInt::from(big_n - q as i64);
                    let shift = s * (e - q) as u64;
                    sum.re += (&weight * &powers[q].re) << shift;
                    sum.im += (&weight * &powers[q].im) << shift;
                }
                scale_by_delta(params.delta, rounded_dd(&sum.re, s * e as u64), rounded_dd(&sum.im, s * e as u64))
            })
            .collect()
    };
    coeffs.push(DdComplex::new(Complex64::new(1.0, 0.0)));
    Ok(coeffs)
}

fn binomial<F: Scalar>(e: usize, q: usize) -> F {
    let mut c = F::one();
    for i in 0..q.min(e - q) {
        c = c * F::from_i64((e - i) as i64) / F::from_i64(i as i64 + 1);
    }
    c
}

/// Roots of a polynomial with their backward errors.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSolve {
    pub roots: Vec<Complex64>,
    /// `|p(z)| / Σ_k |c_k| |z|^k` per root.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Double-double complex accumulator for Horner steps.
#[derive(Clone, Copy)]
struct DdComplex {
    re: (f64, f64),
    im: (f64, f64),
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn dd_add(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    let (s, e) = two_sum(x.0, y.0);
    let e = e + x.1 + y.1;
    let hi = s + e;
    (hi, e - (hi - s))
}

fn dd_mul(x: (f64, f64), y: f64) -> (f64, f64) {
    let p = x.0 * y;
    let e = x.0.mul_add(y, -p) + x.1 * y;
    let hi = p + e;
    (hi, e - (hi - p))
}

impl DdComplex {
    fn new(c: Complex64) -> Self {
        DdComplex { re: (c.re, 0.0), im: (c.im, 0.0) }
    }

    /// `self * z + c`.
    fn horner(self, z: Complex64, c: DdComplex) -> Self {
        let re = dd_add(dd_mul(self.re, z.re), dd_mul(self.im, -z.im));
        let im = dd_add(dd_mul(self.re, z.im), dd_mul(self.im, z.re));
        DdComplex { re: dd_add(re, c.re), im: dd_add(im, c.im) }
    }

    fn value(self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }

    fn norm(self) -> f64 {
        self.value().norm()
    }
}

/// Horner evaluation of `Σ c[k] x^{k}` (ascending) and its derivative in
/// double-double, with the running bound `Σ |c_k| |x|^k`.
fn horner(c: &[DdComplex], x: Complex64) -> (Complex64, Complex64, f64) {
    let deg = c.len() - 1;
    let ax = x.norm();
    let mut p = c[deg];
    let mut dp = DdComplex::new(Complex64::new(0.0, 0.0));
    let mut scale = c[deg].norm();
    for k in (0..deg).rev() {
        dp = dp.horner(x, p);
        p = p.horner(x, c[k]);
        scale = scale * ax + c[k].norm();
    }
    (p.value(), dp.value(), scale)
}

/// `p(z)/p'(z)` and the backward error at `z`, evaluated in the reversed
/// variable outside the unit disk so high degrees do not overflow.
fn newton_ratio(c: &[DdComplex], rev: &[DdComplex], z: Complex64) -> (Complex64, f64) {
    let deg = c.len() - 1;
    if z.norm() <= 1.0 {
        let (p, dp, scale) = horner(c, z);
        (p / dp, p.norm() / scale)
    } else {
        let y = z.inv();
        let (q, dq, scale) = horner(rev, y);
        let ratio = (y * (deg as f64 - y * dq / q)).inv();
        (ratio, q.norm() / scale)
    }
}

/// All roots of `Σ c_k z^k` by Aberth–Ehrlich iteration started on a circle.
pub fn aberth(coeffs: &[Complex64], radius: f64, tol: f64, max_iter: usize) -> Result<RootSolve> {
    let c: Vec<DdComplex> = coeffs.iter().map(|&c| DdComplex::new(c)).collect();
    aberth_dd(&c, radius, tol, max_iter)
}

/// Aberth iteration on double-double coefficients. Every evaluation runs in
/// double-double: for large `p1` the monomial form cancels so heavily that
/// double evaluation cannot separate nearby roots.
fn aberth_dd(coeffs: &[DdComplex], radius: f64, tol: f64, max_iter: usize) -> Result<RootSolve> {
    let deg = coeffs
        .iter()
        .rposition(|c| c.norm() > 0.0)
        .ok_or_else(|| Error::InvalidParams("zero polynomial has no roots".into()))?;
    let c = &coeffs[..=deg];
    if deg == 0 {
        return Ok(RootSolve { roots: vec![], residuals: vec![], iterations: 0 });
    }
    let rev: Vec<DdComplex> = c.iter().rev().copied().collect();
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect();
    let mut res = vec![f64::INFINITY; deg];
    let mut done = vec![false; deg];
    let mut iterations = 0;
    while iterations < max_iter && !done.iter().all(|&d| d) {
        iterations += 1;
        for k in 0..deg {
            if done[k] {
                continue;
            }
            let (w, r) = newton_ratio(c, &rev, z[k]);
            res[k] = r;
            let s: Complex64 = (0..deg).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let step = w / (Complex64::new(1.0, 0.0) - w * s);
            if !(step.re.is_finite() && step.im.is_finite()) {
                done[k] = r <= tol;
                continue;
            }
            z[k] -= step;
            // Past the tolerance keep polishing until the step reaches roundoff.
            if r <= tol && step.norm() <= 4.0 * f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
    }
    for k in 0..deg {
        res[k] = newton_ratio(c, &rev, z[k]).1;
    }
    let worst = res.iter().copied().fold(0.0, f64::max);
    if !(worst <= tol) {
        return Err(Error::RootsNotConverged { iterations, worst_residual: worst, best: z, residuals: res });
    }
    Ok(RootSolve { roots: z, residuals: res, iterations })
}

/// Descending modulus, then ascending argument.
pub fn sort_roots(roots: &mut [Complex64]) {
    let scale = roots.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    let key = |z: &Complex64| -((z.norm() / scale * 1e12).round() as i64);
    roots.sort_by(|a, b| key(a).cmp(&key(b)).then(a.arg().total_cmp(&b.arg())));
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub multiplicities: Multiplicities,
    pub polynomial: CharPolynomial,
    /// Sorted by descending modulus, then ascending argument.
    pub nonzero_eigenvalues: Vec<Complex64>,
    /// Backward error of each root, aligned with `nonzero_eigenvalues`.
    pub residuals: Vec<f64>,
    /// The largest-modulus root.
    pub outlier: Complex64,
    pub iterations: usize,
    /// `|Σλ - nδ| / |nδ|`.
    pub trace_error: f64,
}

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
pub const MAX_ROOT_ITERATIONS: usize = 200;

pub fn nonzero_eigenvalues(params: &ModelParams, tol: f64) -> Result<SpectrumReport> {
    let exact = coefficients_dd(params)?;
    let form = if checked_b(params)? == Complex64::new(0.0, 0.0) { PolyForm::ZeroB } else { PolyForm::General };
    let polynomial = CharPolynomial { coeffs: exact.iter().map(|c| c.value()).collect(), form };
    let b = params.linear_b().unwrap_or_default();
    let p1 = params.multiplicities().p1;
    let radius = (1.0 + b.norm()).max((params.n as f64 * params.delta.norm()).powf(1.0 / (p1 + 1) as f64));
    let solve = aberth_dd(&exact, radius, tol, MAX_ROOT_ITERATIONS)?;
    let mut order: Vec<usize> = (0..solve.roots.len()).collect();
    let mut sorted = solve.roots.clone();
    sort_roots(&mut sorted);
    for (slot, z) in order.iter_mut().zip(&sorted) {
        *slot = solve.roots.iter().position(|r| r == z).expect("root present");
    }
    let residuals: Vec<f64> = order.iter().map(|&i| solve.residuals[i]).collect();
    let nd = params.delta * params.n as f64;
    let trace_error = (sorted.iter().sum::<Complex64>() - nd).norm() / nd.norm();
    Ok(SpectrumReport {
        multiplicities: params.multiplicities(),
        polynomial,
        outlier: sorted[0],
        nonzero_eigenvalues: sorted,
        residuals,
        iterations: solve.iterations,
        trace_error,
    })
}

/// Catalan number `C_k` as a float.
pub fn catalan(k: usize) -> f64 {
    (0..k).fold(1.0, |c, j| c * 2.0 * (2 * j + 1) as f64 / (j + 2) as f64)
}

/// Large-`nδ` series for the outlier, truncated after `order` correction terms.
pub fn outlier_expansion(params: &ModelParams, order: usize) -> Result<Complex64> {
    let b = params.linear_b().ok_or(Error::UnsupportedCoefficients(params.b_coeffs.len()))?;
    let n = params.n as f64;
    let nd = params.delta * n;
    if nd.norm() <= 1.0 {
        return Err(Error::Precondition(format!("outlier expansion needs |nδ| > 1, got {}", nd.norm())));
    }
    let p1 = params.multiplicities().p1;
    if order > p1.saturating_sub(1) {
        return Err(Error::Precondition(format!("order must be at most p1 - 1 = {}", p1.saturating_sub(1))));
    }
    let opb = 1.0 + b;
    let x = (params.t as f64 + 1.0) / n + b / (opb * n);
    let y = opb / nd;
    let tail: Complex64 = (0..order).map(|k| catalan(k) * x.powu(k as u32 + 1) * y.powu(k as u32)).sum();
    Ok(nd + opb - opb * tail)
}

/// Equidistant limit points `(1+b) e^{2πiℓ/(p1+1)}`, `ℓ = 1..p1`.
///
/// Requires real `b` and `δ`, `δ > 4((1+b)(t+1)+b)/n²`, and `p1 = p2` unless
/// `b = 0` (the truncation correction vanishes identically then).
pub fn circular_limit(params: &ModelParams) -> Result<Vec<Complex64>> {
    let b = params.linear_b().ok_or(Error::UnsupportedCoefficients(params.b_coeffs.len()))?;
    if b.im != 0.0 || params.delta.im != 0.0 {
        return Err(Error::Precondition("circular limit needs real b and δ".into()));
    }
    let m = params.multiplicities();
    let (b, n, t) = (b.re, params.n as f64, params.t as f64);
    if b != 0.0 && m.p1 != m.p2 {
        return Err(Error::Precondition(format!("circular limit needs p1 = p2, got {} and {}", m.p1, m.p2)));
    }
    let bound = 4.0 * ((1.0 + b) * (t + 1.0) + b) / (n * n);
    if !(params.delta.re > bound) {
        return Err(Error::Precondition(format!("circular limit needs δ > {bound:e}, got {}", params.delta.re)));
    }
    let k = (m.p1 + 1) as f64;
    Ok((1..=m.p1).map(|l| Complex64::from_polar(1.0 + b, 2.0 * PI * l as f64 / k)).collect())
}

/// Eigenvector pair of a non-zero eigenvalue with `⟨w, v⟩ = w†v = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda: Complex64,
    /// Unit right eigenvector.
    pub right: Vec<Complex64>,
    pub left: Vec<Complex64>,
}

impl Eigenpair {
    /// `‖v‖ ‖w‖`.
    pub fn condition(&self) -> f64 {
        crate::scalar::norm2(&self.right) * crate::scalar::norm2(&self.left)
    }
}

/// `v ∝ (λI - N)^{-1} 1` and `w† ∝ 1ᵀ(λI - N)^{-1}`.
pub fn nonzero_eigenvector(params: &ModelParams, lambda: Complex64) -> Result<Eigenpair> {
    let n = params.n;
    let band = params.band();
    if lambda.norm() < 1e-12 {
        return Err(Error::NearSingular(format!("eigenvalue {lambda} is too close to zero")));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let s: Complex64 = band.iter().filter(|(o, _)| i + o < n).map(|(o, c)| c * v[i + o]).sum();
        v[i] = (one + s) / lambda;
    }
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        let s: Complex64 = band.iter().filter(|(o, _)| j >= *o).map(|(o, c)| y[j - o] * c).sum();
        y[j] = (one + s) / lambda;
    }
    let nv = crate::scalar::norm2(&v);
    if !nv.is_finite() || !y.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::NonFinite(format!("eigenvector solve at λ = {lambda}")));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let pairing: Complex64 = y.iter().zip(&v).map(|(a, b)| a * b).sum();
    if pairing.norm() == 0.0 {
        return Err(Error::NearSingular(format!("left and right eigenvectors are orthogonal at λ = {lambda}")));
    }
    let left = y.iter().map(|a| (a / pairing).conj()).collect();
    Ok(Eigenpair { lambda, right: v, left })
}
