//! Resolvent norms, ε-pseudospectra on grids and the enclosure disks around
//! the spectrum.

use crate::error::{Error, Result};
use crate::jordan::{condition_numbers_exact, JordanBasis};
use crate::linalg::{schur_triangle, sigma_min_triangular};
use crate::matrix::DenseMatrix;
use crate::model::ModelParams;
use crate::spectrum::{nonzero_eigenvector, SpectrumReport};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::VecDeque;

/// Dimension above which σ_min of a single shift comes from the Schur factor
/// instead of a full SVD.
pub const SVD_LIMIT: usize = 200;
/// σ_min below this is reported as an infinite resolvent norm.
pub const SIGMA_FLOOR: f64 = 1e-300;
/// Minimum distance to a pole for the Jordan expansion.
pub const POLE_GUARD: f64 = 1e-12;

fn shifted(m: &DenseMatrix, z: Complex64) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { z - m[(i, j)] } else { -m[(i, j)] })
}

/// `σ_min(zI - M)`.
pub fn sigma_min(m: &DenseMatrix, z: Complex64) -> Result<f64> {
    if m.nrows() <= SVD_LIMIT {
        return Ok(shifted(m, z).singular_values().into_iter().fold(f64::INFINITY, f64::min));
    }
    Ok(sigma_min_triangular(&schur_triangle(m)?, z, None).value)
}

/// `‖(zI - M)^{-1}‖₂ = 1/σ_min(zI - M)`, `+∞` when σ_min underflows.
pub fn resolvent_norm_direct(m: &DenseMatrix, z: Complex64) -> Result<f64> {
    let s = sigma_min(m, z)?;
    Ok(if s < SIGMA_FLOOR { f64::INFINITY } else { 1.0 / s })
}

/// `(zI - M)^{-1}` by an LU solve.
pub fn resolvent_direct(m: &DenseMatrix, z: Complex64) -> Result<DenseMatrix> {
    shifted(m, z).inverse()
}

/// `(zI - M)^{-1}` assembled from the Jordan chains of zero and the
/// eigenpairs of the non-zero spectrum.
pub fn resolvent_jordan(
    params: &ModelParams,
    basis: &JordanBasis,
    spectrum: &SpectrumReport,
    z: Complex64,
) -> Result<DenseMatrix> {
    let n = params.n;
    if basis.n != n {
        return Err(Error::Precondition(format!("basis is for n = {}, model has n = {n}", basis.n)));
    }
    if z.norm() < POLE_GUARD {
        return Err(Error::NearSingular(format!("z = {z} is at the zero eigenvalue")));
    }
    if let Some(l) = spectrum.nonzero_eigenvalues.iter().find(|l| (z - *l).norm() < POLE_GUARD) {
        return Err(Error::NearSingular(format!("z = {z} is at the eigenvalue {l}")));
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut add_outer = |c: Complex64, v: &[Complex64], w: &[Complex64]| {
        for i in 0..n {
            let cv = c * v[i];
            for j in 0..n {
                out[(i, j)] += cv * w[j].conj();
            }
        }
    };
    let zinv = z.inv();
    for (right, left) in basis.right_chains.iter().zip(&basis.left_chains) {
        let d = right.len();
        for p in 0..d {
            let mut c = zinv;
            for q in p..d {
                add_outer(c, &right[p], &left[q]);
                c *= zinv;
            }
        }
    }
    for &lambda in &spectrum.nonzero_eigenvalues {
        let pair = nonzero_eigenvector(params, lambda)?;
        add_outer((z - lambda).inv(), &pair.right, &pair.left);
    }
    Ok(out)
}

/// Axis-aligned rectangle `[x_min, x_max] × [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn square(half_width: f64) -> Self {
        Region { x_min: -half_width, x_max: half_width, y_min: -half_width, y_max: half_width }
    }

    /// The square of half width `1.5 (1 + Σ|b_j|)`.
    pub fn default_for(params: &ModelParams) -> Self {
        let b: f64 = params.b_coeffs.iter().map(|c| c.norm()).sum();
        Self::square(1.5 * (1.0 + b))
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("degenerate region {self:?}")))
        }
    }
}

/// Node coordinates of a uniform grid over a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridGeometry {
    pub region: Region,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeometry {
    pub fn new(region: Region, nx: usize, ny: usize) -> Result<Self> {
        region.validate()?;
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParams(format!("resolution must be at least 2x2, got {nx}x{ny}")));
        }
        Ok(GridGeometry { region, nx, ny })
    }

    pub fn dx(&self) -> f64 {
        (self.region.x_max - self.region.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.region.y_max - self.region.y_min) / (self.ny - 1) as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn x(&self, i: usize) -> f64 {
        self.region.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.region.y_min + j as f64 * self.dy()
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x(i), self.y(j))
    }

    /// Grid node closest to `z`, clamped to the region.
    pub fn nearest(&self, z: Complex64) -> (usize, usize) {
        let i = ((z.re - self.region.x_min) / self.dx()).round().clamp(0.0, (self.nx - 1) as f64);
        let j = ((z.im - self.region.y_min) / self.dy()).round().clamp(0.0, (self.ny - 1) as f64);
        (i as usize, j as usize)
    }

    fn neighbours(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(di, dj)| {
            let (a, b) = (i as isize + di, j as isize + dj);
            (a >= 0 && a < nx && b >= 0 && b < ny).then_some((a as usize, b as usize))
        })
    }
}

/// `σ_min(zI - M)` sampled on a grid; membership in `σ_ε(M)` is `value < ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoGrid {
    pub geometry: GridGeometry,
    /// Row-major in `y`: `values[j * nx + i]` belongs to node `(x_i, y_j)`.
    pub values: Vec<f64>,
}

impl PseudoGrid {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.geometry.nx + i]
    }

    pub fn inside(&self, i: usize, j: usize, epsilon: f64) -> bool {
        self.value(i, j) < epsilon
    }

    pub fn count_inside(&self, epsilon: f64) -> usize {
        self.values.iter().filter(|&&v| v < epsilon).count()
    }

    /// Nodes of the 4-connected component of `σ_ε` containing the node
    /// nearest `seed`; empty if that node is outside.
    pub fn component(&self, epsilon: f64, seed: Complex64) -> Vec<(usize, usize)> {
        let g = self.geometry;
        let start = g.nearest(seed);
        if !self.inside(start.0, start.1, epsilon) {
            return Vec::new();
        }
        let mut seen = vec![false; g.nx * g.ny];
        seen[start.1 * g.nx + start.0] = true;
        let mut queue = VecDeque::from([start]);
        let mut out = Vec::new();
        while let Some((i, j)) = queue.pop_front() {
            out.push((i, j));
            for (a, b) in g.neighbours(i, j) {
                if !seen[b * g.nx + a] {
                    seen[b * g.nx + a] = true;
                    if self.inside(a, b, epsilon) {
                        queue.push_back((a, b));
                    }
                }
            }
        }
        out
    }
}

/// Evaluates `σ_min(zI - M)` at arbitrary points from one Schur factorisation.
#[derive(Debug, Clone)]
pub struct SigmaSampler {
    triangle: DenseMatrix,
}

impl SigmaSampler {
    pub fn new(m: &DenseMatrix) -> Result<Self> {
        Ok(SigmaSampler { triangle: schur_triangle(m)? })
    }

    pub fn at(&self, z: Complex64) -> f64 {
        sigma_min_triangular(&self.triangle, z, None).value
    }

    /// One row of the grid, warm-starting each node from its neighbour.
    fn row(&self, g: &GridGeometry, j: usize) -> Vec<f64> {
        let mut warm: Option<Vec<Complex64>> = None;
        (0..g.nx)
            .map(|i| {
                let s = sigma_min_triangular(&self.triangle, g.node(i, j), warm.as_deref());
                if !s.vector.is_empty() {
                    warm = Some(s.vector);
                }
                s.value
            })
            .collect()
    }
}

/// `σ_min(zI - M)` on every node of the grid. Rows are evaluated in parallel;
/// each row is a fixed sequential computation so results do not depend on the
/// thread count.
pub fn pseudospectrum_grid(m: &DenseMatrix, region: Region, resolution: (usize, usize)) -> Result<PseudoGrid> {
    let geometry = GridGeometry::new(region, resolution.0, resolution.1)?;
    let sampler = SigmaSampler::new(m)?;
    let rows: Vec<Vec<f64>> = (0..geometry.ny).into_par_iter().map(|j| sampler.row(&geometry, j)).collect();
    Ok(PseudoGrid { geometry, values: rows.concat() })
}

/// Connected component of `σ_ε` around a seed, sampled lazily: only nodes
/// reached by the flood fill are evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    pub geometry: GridGeometry,
    pub epsilon: f64,
    /// Nodes inside `σ_ε`, in breadth-first order, with their σ_min.
    pub nodes: Vec<((usize, usize), f64)>,
    pub evaluated: usize,
    /// Whether the component reaches the edge of the region.
    pub touches_boundary: bool,
    /// Whether the fill stopped early at a node beyond the distance bound.
    pub escaped: bool,
}

impl Component {
    /// Largest distance from `center` to a node of the component.
    pub fn max_distance(&self, center: Complex64) -> f64 {
        self.nodes.iter().map(|((i, j), _)| (self.geometry.node(*i, *j) - center).norm()).fold(0.0, f64::max)
    }
}

/// Breadth-first flood fill of the component of `σ_ε` containing the node
/// nearest `seed`. Each frontier is evaluated in parallel.
pub fn lazy_component(sampler: &SigmaSampler, geometry: GridGeometry, epsilon: f64, seed: Complex64) -> Component {
    bounded_component(sampler, geometry, epsilon, seed, f64::INFINITY)
}

/// [`lazy_component`] that stops as soon as a node of the component lies
/// farther than `bound` from `seed`.
pub fn bounded_component(
    sampler: &SigmaSampler,
    geometry: GridGeometry,
    epsilon: f64,
    seed: Complex64,
    bound: f64,
) -> Component {
    let g = geometry;
    let mut state = vec![0u8; g.nx * g.ny];
    let start = g.nearest(seed);
    state[start.1 * g.nx + start.0] = 1;
    let mut frontier = vec![start];
    let mut nodes = Vec::new();
    let mut evaluated = 0;
    let mut touches_boundary = false;
    let mut escaped = false;
    while !frontier.is_empty() && !escaped {
        let values: Vec<f64> = frontier.par_iter().map(|&(i, j)| sampler.at(g.node(i, j))).collect();
        evaluated += frontier.len();
        let mut next = Vec::new();
        for (&(i, j), &v) in frontier.iter().zip(&values) {
            if v >= epsilon {
                continue;
            }
            nodes.push(((i, j), v));
            escaped |= (g.node(i, j) - seed).norm() > bound;
            touches_boundary |= i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny;
            for (a, b) in g.neighbours(i, j) {
                let k = b * g.nx + a;
                if state[k] == 0 {
                    state[k] = 1;
                    next.push((a, b));
                }
            }
        }
        frontier = next;
    }
    Component { geometry, epsilon, nodes, evaluated, touches_boundary, escaped }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Disk {
    #[serde(with = "crate::cx")]
    pub center: Complex64,
    pub radius: f64,
}

/// Disks containing the pieces of `σ_ε` near each eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnclosureDisks {
    pub epsilon: f64,
    /// Centered at 0 with radius `(ε C₀)^{(t+1)/(n+t+1)}`.
    pub zero_disk: Disk,
    /// `C₀ = t κ₀`.
    pub c0: f64,
    pub kappa0: f64,
    /// `(t+1)/(n+t+1)`.
    pub exponent: f64,
    /// Radius `ε κ_j` around each non-zero eigenvalue, same order as the spectrum.
    pub eigen_disks: Vec<Disk>,
    pub eigen_conditions: Vec<f64>,
}

pub fn zero_disk_exponent(n: usize, t: usize) -> f64 {
    (t + 1) as f64 / (n + t + 1) as f64
}

pub fn enclosure_disks(
    params: &ModelParams,
    spectrum: &SpectrumReport,
    epsilon: f64,
) -> Result<EnclosureDisks> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let (n, t) = (params.n, params.t);
    let kappa0 = condition_numbers_exact(params)?.kappa0;
    let c0 = t as f64 * kappa0;
    let exponent = zero_disk_exponent(n, t);
    let zero_disk = Disk { center: Complex64::new(0.0, 0.0), radius: (epsilon * c0).powf(exponent) };
    let mut eigen_disks = Vec::new();
    let mut eigen_conditions = Vec::new();
    for &lambda in &spectrum.nonzero_eigenvalues {
        let kappa = nonzero_eigenvector(params, lambda)?.condition();
        eigen_conditions.push(kappa);
        eigen_disks.push(Disk { center: lambda, radius: epsilon * kappa });
    }
    Ok(EnclosureDisks { epsilon, zero_disk, c0, kappa0, exponent, eigen_disks, eigen_conditions })
}
