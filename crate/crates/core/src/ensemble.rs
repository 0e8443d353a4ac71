//! Gaussian-perturbation ensembles, the mean-radius statistic and its fit,
//! symbol curves and the size-reduced curve region.

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::DenseMatrix;
use crate::model::{build_matrix, multiplicities, ModelParams};
use crate::resolvent::{GridGeometry, Region};
use num_complex::Complex64;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Identifies one independent random stream: the master seed of a run and the
/// index of the sample within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StreamSeed {
    pub master: u64,
    pub index: u64,
}

/// Standard normal variates by Box–Muller on 53-bit uniforms.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: StreamSeed) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed.master);
        rng.set_stream(seed.index);
        GaussianStream { rng, spare: None }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// `n × n` matrix with independent entries `X + iY`, `X, Y ~ N(0, 1)`.
pub fn sample_gaussian(n: usize, seed: StreamSeed) -> DenseMatrix {
    let mut g = GaussianStream::new(seed);
    DenseMatrix::from_fn(n, n, |_, _| {
        let re = g.next_normal();
        Complex64::new(re, g.next_normal())
    })
}

/// All eigenvalues of a dense matrix.
pub fn dense_eigensolve(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    linalg::eigenvalues(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudPoint {
    pub sample: usize,
    #[serde(with = "crate::cx")]
    pub value: Complex64,
    /// Attributed to the unperturbed non-zero spectrum.
    pub filtered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleCloud {
    #[serde(skip)]
    pub params: ModelParams,
    #[serde(with = "crate::cx")]
    pub tilde_delta: Complex64,
    pub seed: u64,
    pub samples: usize,
    /// `samples × n` eigenvalues grouped by sample.
    pub points: Vec<CloudPoint>,
    /// Samples whose eigensolve failed, with the reason.
    pub failures: Vec<(usize, String)>,
}

impl EnsembleCloud {
    pub fn sample_points(&self, sample: usize) -> impl Iterator<Item = &CloudPoint> {
        self.points.iter().filter(move |p| p.sample == sample)
    }

    pub fn filtered_count(&self) -> usize {
        self.points.iter().filter(|p| p.filtered).count()
    }
}

/// Eigenvalues of `M + δ̃ Z_i` for `i = 0..samples`, where `Z_i` is drawn
/// from stream `(master_seed, i)`. Output does not depend on scheduling.
pub fn run_ensemble(params: &ModelParams, tilde_delta: Complex64, samples: usize, master_seed: u64) -> Result<EnsembleCloud> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be at least 1".into()));
    }
    let m = build_matrix(params)?;
    let n = params.n;
    let results: Vec<Result<Vec<Complex64>>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut a = m.clone();
            if tilde_delta != Complex64::new(0.0, 0.0) {
                let z = sample_gaussian(n, StreamSeed { master: master_seed, index: i as u64 });
                for r in 0..n {
                    for c in 0..n {
                        a[(r, c)] += tilde_delta * z[(r, c)];
                    }
                }
            }
            dense_eigensolve(&a)
        })
        .collect();
    let mut points = Vec::with_capacity(samples * n);
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(ev) => points.extend(ev.into_iter().map(|value| CloudPoint { sample: i, value, filtered: false })),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    Ok(EnsembleCloud { params: params.clone(), tilde_delta, seed: master_seed, samples, points, failures })
}

/// Relative match tolerance of the outer-eigenvalue filter.
pub const DEFAULT_MATCH_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FilterStats {
    /// Matched cloud points with `|λ̃ - λ_j| / |λ_j|`.
    pub matched: usize,
    pub max_relative_move: f64,
    /// Eigenvalues attributed by the largest-modulus fallback.
    pub fallback: usize,
    /// Cloud points that were the nearest candidate of more than one `λ_j`.
    pub ambiguous: usize,
}

/// Marks, per sample, one cloud point for each unperturbed eigenvalue. Pairs
/// within `match_tol·|λ_j|` are taken greedily by increasing distance; any
/// `λ_j` left unmatched claims the largest-modulus unclaimed point.
pub fn filter_outer(cloud: &mut EnsembleCloud, outer: &[Complex64], match_tol: f64) -> FilterStats {
    let mut stats = FilterStats::default();
    let mut start = 0;
    while start < cloud.points.len() {
        let sample = cloud.points[start].sample;
        let end = start + cloud.points[start..].iter().take_while(|p| p.sample == sample).count();
        let pts: Vec<Complex64> = cloud.points[start..end].iter().map(|p| p.value).collect();
        let mut nearest_claims = vec![0usize; pts.len()];
        let mut pairs = Vec::new();
        for (j, lam) in outer.iter().enumerate() {
            let tol = match_tol * lam.norm();
            let mut best: Option<(f64, usize)> = None;
            for (k, z) in pts.iter().enumerate() {
                let d = (z - lam).norm();
                if d <= tol {
                    pairs.push((d, j, k));
                }
                if best.map_or(true, |b| d < b.0) {
                    best = Some((d, k));
                }
            }
            if let Some((_, k)) = best {
                nearest_claims[k] += 1;
            }
        }
        stats.ambiguous += nearest_claims.iter().filter(|&&c| c > 1).count();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut claimed = vec![false; pts.len()];
        let mut done = vec![false; outer.len()];
        for (d, j, k) in pairs {
            if !done[j] && !claimed[k] {
                done[j] = true;
                claimed[k] = true;
                stats.matched += 1;
                stats.max_relative_move = stats.max_relative_move.max(d / outer[j].norm());
            }
        }
        let mut by_modulus: Vec<usize> = (0..pts.len()).collect();
        by_modulus.sort_by(|&a, &b| pts[b].norm().total_cmp(&pts[a].norm()).then(a.cmp(&b)));
        let unmatched = done.iter().filter(|d| !**d).count();
        let fallback: Vec<usize> = by_modulus.into_iter().filter(|&k| !claimed[k]).take(unmatched).collect();
        for k in fallback {
            claimed[k] = true;
            stats.fallback += 1;
        }
        for (p, c) in cloud.points[start..end].iter_mut().zip(&claimed) {
            p.filtered = *c;
        }
        start = end;
    }
    stats
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRadius {
    pub mean: f64,
    /// Number of cloud points averaged.
    pub count: usize,
    pub filter: FilterStats,
}

/// Mean modulus of the cloud after removing the points attributed to `outer`.
pub fn mean_radius(cloud: &mut EnsembleCloud, outer: &[Complex64], match_tol: f64) -> Result<MeanRadius> {
    if cloud.points.is_empty() {
        return Err(Error::InvalidParams("empty cloud".into()));
    }
    let filter = filter_outer(cloud, outer, match_tol);
    let kept: Vec<f64> = cloud.points.iter().filter(|p| !p.filtered).map(|p| p.value.norm()).collect();
    let mean = if kept.is_empty() { 0.0 } else { kept.iter().sum::<f64>() / kept.len() as f64 };
    Ok(MeanRadius { mean, count: kept.len(), filter })
}

/// `log R̄ = c1 x + c2` with `x = (t+1)/(n+t+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct RadiusFit {
    pub c1: f64,
    pub c2: f64,
    /// Root-mean-square residual in `log R̄`.
    pub residual: f64,
}

pub fn radius_abscissa(n: usize, t: usize) -> f64 {
    (t + 1) as f64 / (n + t + 1) as f64
}

/// Least-squares line through `(t, n, R̄)` points.
pub fn fit_radius_law(points: &[(usize, usize, f64)]) -> Result<RadiusFit> {
    if points.len() < 3 {
        return Err(Error::InvalidParams(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(p) = points.iter().find(|p| !(p.2 > 0.0 && p.2.is_finite())) {
        return Err(Error::InvalidParams(format!("mean radius must be positive, got {p:?}")));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|&(t, n, r)| (radius_abscissa(n, t), r.ln())).collect();
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= 1e-300 || sxx.sqrt() <= 1e-14 * mx.abs() {
        return Err(Error::InvalidParams("all points share the same abscissa".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c1 = sxy / sxx;
    let c2 = my - c1 * mx;
    let residual = (xy.iter().map(|p| (p.1 - c1 * p.0 - c2).powi(2)).sum::<f64>() / k).sqrt();
    Ok(RadiusFit { c1, c2, residual })
}

/// `f(z) = z^{t+1} (1 + Σ b_j z^j)`.
pub fn symbol(t: usize, b_coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut h = Complex64::new(0.0, 0.0);
    for b in b_coeffs.iter().rev() {
        h = (h + b) * z;
    }
    z.powu(t as u32 + 1) * (h + 1.0)
}

/// `(t+1) k₀`, the exponent relating `ε` to the curve radius `r = ε^{1/ϖ}`.
pub fn varpi(n: usize, t: usize) -> Result<usize> {
    Ok((t + 1) * multiplicities(n, t)?.k0)
}

pub fn reduced_radius(n: usize, t: usize, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let w = varpi(n, t)?;
    if w == 0 {
        return Err(Error::InvalidParams("zero is not an eigenvalue at t = 0".into()));
    }
    Ok(epsilon.powf(1.0 / w as f64))
}

pub const DEFAULT_CURVE_SAMPLES: usize = 4096;
/// Bisection tolerance on the crossing angle.
pub const THETA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolCurve {
    pub t: usize,
    #[serde(with = "crate::cx::vec")]
    pub b_coeffs: Vec<Complex64>,
    pub radius: f64,
    /// Uniform angles on `[0, 2π]`, both ends included.
    pub theta: Vec<f64>,
    /// `f(r e^{iθ})`; the first and last points coincide.
    #[serde(with = "crate::cx::vec")]
    pub points: Vec<Complex64>,
    /// First `θ ∈ (0, 2π)` with `Im f(r e^{iθ}) = 0`, if any.
    pub theta0: Option<f64>,
}

pub fn symbol_curve(t: usize, b_coeffs: &[Complex64], radius: f64, samples: usize) -> Result<SymbolCurve> {
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidParams(format!("radius must lie in (0, 1], got {radius}")));
    }
    if samples < 16 {
        return Err(Error::InvalidParams(format!("at least 16 samples needed, got {samples}")));
    }
    let f = |th: f64| symbol(t, b_coeffs, Complex64::from_polar(radius, th));
    let theta: Vec<f64> = (0..=samples).map(|k| 2.0 * PI * k as f64 / samples as f64).collect();
    let mut points: Vec<Complex64> = theta.iter().map(|&th| f(th)).collect();
    points[samples] = points[0];
    let theta0 = first_real_crossing(&f, &theta);
    Ok(SymbolCurve { t, b_coeffs: b_coeffs.to_vec(), radius, theta, points, theta0 })
}

/// Smallest sampled sign change of `Im f` on `(0, 2π)`, refined by bisection.
fn first_real_crossing(f: &impl Fn(f64) -> Complex64, theta: &[f64]) -> Option<f64> {
    let last = theta.len() - 1;
    let im = |th: f64| f(th).im;
    for k in 1..last {
        let (a, b) = (theta[k], theta[k + 1]);
        let (fa, fb) = (im(a), im(b));
        if fa == 0.0 {
            return Some(a);
        }
        if fa.signum() == fb.signum() || (k + 1 == last && fb == 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        while hi - lo > THETA_TOL {
            let mid = 0.5 * (lo + hi);
            if im(mid).signum() == fa.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Some(0.5 * (lo + hi));
    }
    None
}

/// Winding number of a closed polyline around `z`, from the accumulated
/// argument increments.
pub fn winding_number(points: &[Complex64], z: Complex64) -> Result<i64> {
    let scale = points.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1.0);
    let margin = 1e-9 * scale;
    let n = points.len();
    if n < 3 {
        return Err(Error::Curve("a closed curve needs at least three points".into()));
    }
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = (points[k], points[(k + 1) % n]);
        if segment_distance(a, b, z) <= margin {
            return Err(Error::Curve(format!("point {z} lies on the curve")));
        }
        total += ((b - z) / (a - z)).arg();
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn segment_distance(a: Complex64, b: Complex64, z: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    let s = if len2 == 0.0 { 0.0 } else { (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0) };
    (a + d * s - z).norm()
}

/// Winding numbers of a closed polyline at every node of a grid, by signed
/// crossings of each horizontal grid line.
pub fn winding_grid(points: &[Complex64], geometry: &GridGeometry) -> Vec<i64> {
    let n = points.len();
    let mut out = vec![0i64; geometry.nx * geometry.ny];
    for j in 0..geometry.ny {
        let y = geometry.y(j);
        let mut crossings: Vec<(f64, i64)> = Vec::new();
        for k in 0..n {
            let (a, b) = (points[k], points[(k + 1) % n]);
            let upward = a.im <= y && b.im > y;
            let downward = b.im <= y && a.im > y;
            if upward || downward {
                let x = a.re + (y - a.im) / (b.im - a.im) * (b.re - a.re);
                crossings.push((x, if upward { 1 } else { -1 }));
            }
        }
        crossings.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut k = 0;
        let mut right: i64 = crossings.iter().map(|c| c.1).sum();
        for i in 0..geometry.nx {
            let x = geometry.x(i);
            while k < crossings.len() && crossings[k].0 <= x {
                right -= crossings[k].1;
                k += 1;
            }
            out[j * geometry.nx + i] = right;
        }
    }
    out
}

/// The inner arcs `θ ∈ [θ₀, 2π - θ₀]` of a curve, closed by the chord between
/// their end points.
pub fn inner_arcs(curve: &SymbolCurve, samples: usize) -> Result<Vec<Complex64>> {
    let theta0 = curve.theta0.ok_or_else(|| {
        let min_im = curve.points.iter().skip(1).map(|p| p.im.abs()).fold(f64::INFINITY, f64::min);
        Error::Curve(format!(
            "symbol curve of radius {} never meets the real axis on (0, 2π); smallest |Im f| sampled = {min_im:e}",
            curve.radius
        ))
    })?;
    if theta0 >= PI {
        return Err(Error::Curve(format!("first real crossing θ₀ = {theta0} leaves no inner arc")));
    }
    let span = 2.0 * PI - 2.0 * theta0;
    Ok((0..=samples)
        .map(|k| symbol(curve.t, &curve.b_coeffs, Complex64::from_polar(curve.radius, theta0 + span * k as f64 / samples as f64)))
        .collect())
}

/// Membership grid of the size-reduced curve region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRegion {
    pub geometry: GridGeometry,
    pub epsilon: f64,
    pub radius: f64,
    pub varpi: usize,
    pub theta0: f64,
    /// Closed inner-arc polyline.
    #[serde(with = "crate::cx::vec")]
    pub boundary: Vec<Complex64>,
    /// Row-major in `y` like the pseudospectrum grid.
    pub winding: Vec<i64>,
}

impl ConjectureRegion {
    pub fn inside(&self, i: usize, j: usize) -> bool {
        self.winding[j * self.geometry.nx + i] != 0
    }

    /// Whether `z` is within one cell diagonal of a node of the region.
    pub fn contains_inflated(&self, z: Complex64) -> bool {
        let g = &self.geometry;
        let reach = g.cell_diagonal();
        let fi = (z.re - g.region.x_min) / g.dx();
        let fj = (z.im - g.region.y_min) / g.dy();
        if fi < -2.0 || fj < -2.0 || fi > (g.nx + 1) as f64 || fj > (g.ny + 1) as f64 {
            return false;
        }
        let range = |f: f64, len: usize| {
            let lo = (f.floor() - 1.0).max(0.0) as usize;
            let hi = (f.ceil() + 1.0).min((len - 1) as f64) as usize;
            lo..=hi
        };
        range(fi, g.nx)
            .flat_map(|i| range(fj, g.ny).map(move |j| (i, j)))
            .any(|(i, j)| self.inside(i, j) && (g.node(i, j) - z).norm() <= reach)
    }

    pub fn count_inside(&self) -> usize {
        self.winding.iter().filter(|&&w| w != 0).count()
    }
}

/// Grid points enclosed by the inner arcs of the symbol curve shrunk to
/// radius `ε^{1/ϖ}`. Independent of `δ`.
pub fn conjecture_region(params: &ModelParams, epsilon: f64, region: Region, resolution: (usize, usize)) -> Result<ConjectureRegion> {
    let geometry = GridGeometry::new(region, resolution.0, resolution.1)?;
    let (n, t) = (params.n, params.t);
    let radius = reduced_radius(n, t, epsilon)?;
    let curve = symbol_curve(t, &params.b_coeffs, radius, DEFAULT_CURVE_SAMPLES)?;
    let boundary = inner_arcs(&curve, DEFAULT_CURVE_SAMPLES)?;
    let winding = winding_grid(&boundary, &geometry);
    Ok(ConjectureRegion {
        geometry,
        epsilon,
        radius,
        varpi: varpi(n, t)?,
        theta0: curve.theta0.expect("checked by inner_arcs"),
        boundary,
        winding,
    })
}
