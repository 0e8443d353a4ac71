//! Acceptance gate: one PASS/FAIL line per criterion.
//!
//! The process exits non-zero on any failure only when
//! `PSEUDODYN_ACCEPTANCE_STRICT=1` is set.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use pseudodyn::ensemble::{
    conjecture_region, fit_radius_law, mean_radius, reduced_radius, run_ensemble, symbol_curve, winding_number,
    DEFAULT_MATCH_TOL, THETA_TOL,
};
use pseudodyn::exact_oracle::{blocks_from_ranks, exact_chain_check, exact_charpoly, rank_sequence, RationalComplex as Q};
use pseudodyn::jordan::{closed_form_b0, jordan_basis, JordanBasis};
use pseudodyn::resolvent::{
    bounded_component, enclosure_disks, resolvent_direct, resolvent_jordan, GridGeometry, Region, SigmaSampler,
};
use pseudodyn::scalar::Scalar;
use pseudodyn::spectrum::{char_poly, nonzero_eigenvalues, DEFAULT_ROOT_TOL};
use pseudodyn::{build_matrix, multiplicities, ModelParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Block sizes of the zero eigenvalue: `t` blocks sharing `n - p1 - 1` as
/// evenly as possible, larger blocks first.
fn expected_partition(n: usize, t: usize) -> Vec<usize> {
    let total = n - (n - 1) / (t + 1) - 1;
    (0..t).map(|l| total / t + usize::from(l < total % t)).collect()
}

fn exact_suite() -> Vec<(usize, usize, Q, Q)> {
    let bs = [Q::zero(), Q::one(), Q::int(1, 1)];
    let ds = [Q::one(), Q::ratio(1, 10)];
    let mut out = Vec::new();
    for n in 2usize..=12 {
        for t in 1..=n.saturating_sub(2) {
            for b in &bs {
                for d in &ds {
                    out.push((n, t, b.clone(), d.clone()));
                }
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut cases = 0;
    for (n, t, b, d) in exact_suite() {
        let p = ModelParams::with_b(n, t, b.clone(), d.clone()).map_err(|e| e.to_string())?;
        let mult = multiplicities(n, t).map_err(|e| e.to_string())?;
        let cp = exact_charpoly(&p).map_err(|e| e.to_string())?;
        let ranks = rank_sequence(&p, n).map_err(|e| e.to_string())?;
        let label = format!("n={n} t={t} b={b} delta={d}");
        ensure(cp.zero_root_count() == n - mult.p1 - 1 && mult.a0 == n - mult.p1 - 1, || {
            format!("{label}: zero roots {} vs a0 {}", cp.zero_root_count(), mult.a0)
        })?;
        ensure(n - ranks[1] == t && mult.g0 == t, || format!("{label}: kernel dimension {}", n - ranks[1]))?;
        let blocks = blocks_from_ranks(&ranks);
        let want = expected_partition(n, t);
        ensure(blocks == want && mult.block_sizes == want, || {
            format!("{label}: blocks {blocks:?}, formula {:?}, expected {want:?}", mult.block_sizes)
        })?;
        cases += 1;
    }
    Ok(format!("{cases} exact cases agree"))
}

fn criterion_2() -> Outcome {
    let mut cases = 0;
    let mut active_seen = false;
    for (n, t, b, d) in exact_suite() {
        let p = ModelParams::with_b(n, t, b.clone(), d.clone()).map_err(|e| e.to_string())?;
        let oracle = exact_charpoly(&p).map_err(|e| e.to_string())?.nonzero_factor();
        let lead = oracle.last().cloned().ok_or("empty factor")?;
        let oracle: Vec<Q> = oracle.into_iter().map(|x| x / lead.clone()).collect();
        let closed = char_poly(&p).map_err(|e| e.to_string())?.coeffs;
        ensure(closed == oracle, || format!("n={n} t={t} b={b} delta={d}: coefficients differ"))?;
        active_seen |= (n, t) == (10, 2) && b == Q::one();
        cases += 1;
    }
    ensure(active_seen, || "indicator-active case n=10 t=2 b=1 missing".into())?;
    Ok(format!("{cases} exact cases match, including n=10 t=2 b=1"))
}

fn criterion_3() -> Outcome {
    let bs = [c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(-0.3, 0.2)];
    let mut cases = 0;
    let (mut worst_res, mut worst_trace) = (0.0f64, 0.0f64);
    for b in bs {
        for d in [1e-2, 0.1, 1.0] {
            for n in [5usize, 10, 20, 50, 100, 150, 200, 300, 400, 500] {
                let mut ts = vec![1, 2, 3, 5, 8, 13, 21, n / 4, n / 2, n - 2];
                ts.retain(|&t| t >= 1 && t <= n - 2);
                ts.sort_unstable();
                ts.dedup();
                for t in ts {
                    let p = ModelParams::with_b(n, t, b, c(d, 0.0)).map_err(|e| e.to_string())?;
                    let label = format!("n={n} t={t} b={b} delta={d}");
                    let r = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| format!("{label}: {e}"))?;
                    let res = r.residuals.iter().copied().fold(0.0, f64::max);
                    ensure(res <= 1e-10, || format!("{label}: residual {res:e}"))?;
                    ensure(r.trace_error <= 1e-8, || format!("{label}: trace error {:e}", r.trace_error))?;
                    worst_res = worst_res.max(res);
                    worst_trace = worst_trace.max(r.trace_error);
                    cases += 1;
                }
            }
        }
    }
    let p = ModelParams::with_b(4, 1, c(0.0, 0.0), c(0.25, 0.0)).unwrap();
    let mut roots = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| e.to_string())?.nonzero_eigenvalues;
    roots.sort_by(|a, b| b.re.total_cmp(&a.re));
    let s3 = 3f64.sqrt();
    let want = [c((1.0 + s3) / 2.0, 0.0), c((1.0 - s3) / 2.0, 0.0)];
    let err = roots.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ensure(roots.len() == 2 && err <= 1e-12, || format!("n=4 roots {roots:?}, error {err:e}"))?;
    Ok(format!(
        "{cases} cases up to n=500, worst residual {worst_res:.1e}, worst trace error {worst_trace:.1e}; n=4 error {err:.1e}"
    ))
}

fn q_frac(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// The generalized right vectors and the four left vectors of the `n = 6`,
/// `t = 2` example, as functions of a rational `b`.
fn six_vector_example(b: &BigRational) -> (Vec<Vec<BigRational>>, Vec<Vec<BigRational>>) {
    let one = BigRational::one();
    let zero = BigRational::zero();
    let s = q_frac(3, 1) + b * q_frac(2, 1);
    let s2 = &s * &s;
    let two = q_frac(2, 1);
    let right = vec![
        vec![-b.clone(), zero.clone(), zero.clone(), &one + b, -one.clone(), zero.clone()],
        vec![b * b - b, zero.clone(), zero.clone(), &one - b * b, b.clone(), -one.clone()],
    ];
    let left = vec![
        vec![
            (&one + b) / &s,
            -(&two + b) / &s,
            (&one + b) / &s,
            b * (&one + b * &two) / &s2,
            -(&two * b * (&one + b)) / &s2,
            -(&two * b * (&one + b)) / &s2,
        ],
        vec![
            zero.clone(),
            zero.clone(),
            zero.clone(),
            (&one + b) / &s,
            -(&two - b * b) / &s,
            (&one - b - b * b) / &s,
        ],
        vec![
            &one / &s,
            &one / &s,
            -(&two * (&one + b)) / &s,
            q_frac(4, 1) * b / &s2,
            b * (&one + &two * b) / &s2,
            b * (&one + &two * b) / &s2,
        ],
        vec![zero.clone(), zero.clone(), zero, &one / &s, (&one + b) / &s, -(&two + b) / &s],
    ];
    (right, left)
}

fn as_real(v: &[Q]) -> Option<Vec<BigRational>> {
    v.iter().map(|x| x.is_real().then(|| x.re.clone())).collect()
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    let mut failed = Vec::new();

    // Floating-point chains, n <= 30.
    let mut float_cases = 0;
    let mut float_fail: Vec<String> = Vec::new();
    let (mut worst_zero_b, mut worst_other) = ((0.0f64, 0.0f64), (0.0f64, 0.0f64));
    for b in [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0)] {
        for d in [1.0, 0.1] {
            for n in 3..=30 {
                for t in 1..=n - 2 {
                    float_cases += 1;
                    let p = ModelParams::with_b(n, t, b, c(d, 0.0)).unwrap();
                    let label = format!("n={n} t={t} b={b} delta={d}");
                    let basis = match jordan_basis(&p) {
                        Ok(basis) => basis,
                        Err(e) => {
                            float_fail.push(format!("{label}: {e}"));
                            continue;
                        }
                    };
                    let diag = basis.diagnostics(&p);
                    let worst = if b.norm() == 0.0 { &mut worst_zero_b } else { &mut worst_other };
                    worst.0 = worst.0.max(diag.right_residual);
                    worst.1 = worst.1.max(diag.gram_deviation);
                    if !(diag.right_residual <= 1e-10 && diag.gram_deviation <= 1e-10) {
                        float_fail.push(format!(
                            "{label}: residual {:.1e}, Gram {:.1e}",
                            diag.right_residual, diag.gram_deviation
                        ));
                    }
                }
            }
        }
    }
    notes.push(format!(
        "float {}/{float_cases} (b=0 worst residual {:.1e} Gram {:.1e}; b!=0 worst residual {:.1e} Gram {:.1e})",
        float_cases - float_fail.len(),
        worst_zero_b.0,
        worst_zero_b.1,
        worst_other.0,
        worst_other.1
    ));
    if let Some(first) = float_fail.first() {
        failed.push(format!("{} float cases fail, first {first}", float_fail.len()));
    }

    // Exact chains, n <= 10.
    let mut exact_cases = 0;
    let bs = [Q::zero(), Q::one(), Q::int(1, 1), Q::ratio(3, 7)];
    for b in &bs {
        for d in [Q::one(), Q::ratio(1, 10)] {
            for n in 3..=10 {
                for t in 1..=n - 2 {
                    let p = ModelParams::with_b(n, t, b.clone(), d.clone()).unwrap();
                    let label = format!("n={n} t={t} b={b} delta={d}");
                    let ok = jordan_basis(&p)
                        .and_then(|basis| exact_chain_check(&p, &basis))
                        .map_err(|e| e.to_string())
                        .and_then(|r| if r.passed() { Ok(()) } else { Err(format!("{:?}", r.violations)) });
                    if let Err(e) = ok {
                        failed.push(format!("exact {label}: {e}"));
                    }
                    exact_cases += 1;
                }
            }
        }
    }
    notes.push(format!("exact {exact_cases} cases"));

    // The n = 6, t = 2 example.
    for (num, den) in [(1, 1), (3, 7), (0, 1), (-5, 4)] {
        let b = q_frac(num, den);
        let p = ModelParams::with_b(6, 2, Q::new(b.clone(), BigRational::zero()), Q::ratio(1, 10)).unwrap();
        let basis: JordanBasis<Q> = jordan_basis(&p).map_err(|e| e.to_string())?;
        let (right, left) = six_vector_example(&b);
        let got_right = [as_real(&basis.right_chains[0][1]), as_real(&basis.right_chains[1][1])];
        let got_left = [
            as_real(&basis.left_chains[0][0]),
            as_real(&basis.left_chains[0][1]),
            as_real(&basis.left_chains[1][0]),
            as_real(&basis.left_chains[1][1]),
        ];
        let ok = got_right.iter().zip(&right).all(|(g, w)| g.as_ref() == Some(w))
            && got_left.iter().zip(&left).all(|(g, w)| g.as_ref() == Some(w));
        if !ok {
            failed.push(format!("six-vector example differs at b={num}/{den}"));
        }
    }
    notes.push("six-vector example exact at b in {1, 3/7, 0, -5/4}".into());

    // Closed forms at b = 0.
    let mut closed_worst = 0.0f64;
    for d in [1.0, 0.1] {
        for n in 3..=30 {
            for t in 1..=n - 2 {
                let p = ModelParams::with_b(n, t, c(0.0, 0.0), c(d, 0.0)).unwrap();
                let built = jordan_basis(&p).map_err(|e| e.to_string())?;
                let closed: JordanBasis = closed_form_b0(n, t).map_err(|e| e.to_string())?;
                let dev = built
                    .right_chains
                    .iter()
                    .flatten()
                    .zip(closed.right_chains.iter().flatten())
                    .chain(built.left_chains.iter().flatten().zip(closed.left_chains.iter().flatten()))
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
                    .fold(0.0, f64::max);
                closed_worst = closed_worst.max(dev);
                if built.block_sizes != closed.block_sizes || dev > 1e-12 {
                    failed.push(format!("closed form n={n} t={t}: deviation {dev:e}"));
                }
            }
        }
    }
    notes.push(format!("b=0 closed forms within {closed_worst:.1e}"));
    if failed.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{}; {}", failed.join("; "), notes.join("; ")))
    }
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut worst_slope = 0.0f64;
    let mut cases = 0;
    for t in 1..=3 {
        for n in t + 2..=20 {
            let p = ModelParams::with_b(n, t, c(0.0, 0.0), c(1e-2, 0.0)).unwrap();
            let label = format!("n={n} t={t}");
            let basis = jordan_basis(&p).map_err(|e| format!("{label}: {e}"))?;
            let spec = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| format!("{label}: {e}"))?;
            let m = build_matrix(&p).unwrap();
            let mut poles = spec.nonzero_eigenvalues.clone();
            poles.push(c(0.0, 0.0));
            let mut accepted = 0;
            while accepted < 100 {
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                if poles.iter().any(|l| (z - l).norm() < 0.05) {
                    continue;
                }
                accepted += 1;
                let a = resolvent_jordan(&p, &basis, &spec, z).map_err(|e| format!("{label}: {e}"))?;
                let b = resolvent_direct(&m, z).map_err(|e| format!("{label}: {e}"))?;
                let rel = a.sub(&b).frobenius() / b.frobenius();
                worst = worst.max(rel);
                ensure(rel <= 1e-6, || format!("{label} z={z}: relative difference {rel:e}"))?;
            }
            let k0 = multiplicities(n, t).unwrap().k0 as f64;
            let (z1, z2) = (c(1e-3, 0.0), c(1e-4, 0.0));
            let norm_at = |z| resolvent_jordan(&p, &basis, &spec, z).map(|r| r.norm2());
            let (r1, r2) = (norm_at(z1).map_err(|e| e.to_string())?, norm_at(z2).map_err(|e| e.to_string())?);
            let slope = (r2.ln() - r1.ln()) / (z2.re.ln() - z1.re.ln());
            worst_slope = worst_slope.max((slope + k0).abs() / k0);
            ensure((slope + k0).abs() <= 0.05 * k0, || format!("{label}: slope {slope} vs -{k0}"))?;
            if k0 <= 3.0 {
                let direct = |z| resolvent_direct(&m, z).map(|r| r.norm2());
                let (d1, d2) = (direct(z1).map_err(|e| e.to_string())?, direct(z2).map_err(|e| e.to_string())?);
                let ds = (d2.ln() - d1.ln()) / (z2.re.ln() - z1.re.ln());
                ensure((ds - slope).abs() <= 0.01 * k0, || format!("{label}: direct slope {ds} vs {slope}"))?;
            }
            cases += 1;
        }
    }
    Ok(format!(
        "{cases} cases at b=0, 100 points each, worst relative difference {worst:.1e}, worst slope deviation {:.2}%",
        100.0 * worst_slope
    ))
}

fn criterion_6() -> Outcome {
    let mut failed = Vec::new();
    let mut lines = Vec::new();
    for b in [0.0, 1.0] {
        for n in [50usize, 100] {
            for t in [1usize, 2, 5] {
                let p = ModelParams::with_b(n, t, c(b, 0.0), c(1e-2, 0.0)).unwrap();
                let label = format!("n={n} t={t} b={b}");
                let spec = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| format!("{label}: {e}"))?;
                let sampler = SigmaSampler::new(&build_matrix(&p).unwrap()).map_err(|e| e.to_string())?;
                for eps in [1e-8, 1e-10] {
                    let disks = enclosure_disks(&p, &spec, eps).map_err(|e| format!("{label}: {e}"))?;
                    let radius = disks.zero_disk.radius;
                    let geometry = GridGeometry::new(Region::square(2.0 * radius), 400, 400).unwrap();
                    let reach = radius + geometry.cell_diagonal();
                    let comp = bounded_component(&sampler, geometry, eps, c(0.0, 0.0), reach);
                    let dist = comp.max_distance(c(0.0, 0.0));
                    let ok = !comp.escaped && !comp.touches_boundary && dist <= reach;
                    let line = format!(
                        "{label} eps={eps:e}: radius {radius:.4}, component {}{dist:.4}",
                        if comp.escaped { ">" } else { "" }
                    );
                    if ok {
                        lines.push(line);
                    } else {
                        failed.push(line);
                    }
                }
            }
        }
    }
    if failed.is_empty() {
        Ok(format!("{} cases enclosed", lines.len()))
    } else {
        Err(format!("{} of {} cases escape: {}", failed.len(), failed.len() + lines.len(), failed.join("; ")))
    }
}

fn mean_radius_at(n: usize, t: usize) -> Result<f64, String> {
    let p = ModelParams::with_b(n, t, c(0.0, 0.0), c(1e-2, 0.0)).unwrap();
    let outer = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| e.to_string())?.nonzero_eigenvalues;
    let mut cloud = run_ensemble(&p, c(1e-10, 0.0), 20, 2024).map_err(|e| e.to_string())?;
    ensure(cloud.failures.is_empty(), || format!("n={n} t={t}: {:?}", cloud.failures))?;
    Ok(mean_radius(&mut cloud, &outer, DEFAULT_MATCH_TOL).map_err(|e| e.to_string())?.mean)
}

fn criterion_7() -> Outcome {
    let mut points = Vec::new();
    let ts = [8usize, 10, 12];
    let ns = [120usize, 180, 240, 300];
    let mut grid = vec![vec![0.0; ns.len()]; ts.len()];
    for (a, &t) in ts.iter().enumerate() {
        for (k, &n) in ns.iter().enumerate() {
            grid[a][k] = mean_radius_at(n, t)?;
            points.push((t, n, grid[a][k]));
        }
    }
    let line_ts = [2usize, 6, 10, 14, 18, 22, 26];
    let mut line = Vec::new();
    for &t in &line_ts {
        let r = match ts.iter().position(|&x| x == t) {
            Some(a) => grid[a][ns.len() - 1],
            None => mean_radius_at(300, t)?,
        };
        if !ts.contains(&t) {
            points.push((t, 300, r));
        }
        line.push(r);
    }
    let fit = fit_radius_law(&points).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    if !(-30.0..=-17.0).contains(&fit.c1) {
        problems.push(format!("c1 = {:.3} outside [-30, -17]", fit.c1));
    }
    if !(-0.3..=0.3).contains(&fit.c2) {
        problems.push(format!("c2 = {:.3} outside [-0.3, 0.3]", fit.c2));
    }
    for (a, row) in grid.iter().enumerate() {
        if !row.windows(2).all(|w| w[0] < w[1]) {
            problems.push(format!("mean radius not increasing in n at t={}: {row:?}", ts[a]));
        }
    }
    for k in 0..ns.len() {
        let col: Vec<f64> = grid.iter().map(|r| r[k]).collect();
        if !col.windows(2).all(|w| w[0] > w[1]) {
            problems.push(format!("mean radius not decreasing in t at n={}: {col:?}", ns[k]));
        }
    }
    if !line.windows(2).all(|w| w[0] > w[1]) {
        problems.push(format!("mean radius not decreasing in t at n=300: {line:?}"));
    }
    let summary = format!("{} points, c1 = {:.3}, c2 = {:.4}, rms {:.3}", points.len(), fit.c1, fit.c2, fit.residual);
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn criterion_8() -> Outcome {
    let p = ModelParams::with_b(200, 3, c(1.0, 0.0), c(1e-2, 0.0)).unwrap();
    let eps = 1e-10;
    let region = Region::default_for(&p);
    let resolution = (400, 400);
    let conj = conjecture_region(&p, eps, region, resolution).map_err(|e| e.to_string())?;
    let spec = nonzero_eigenvalues(&p, DEFAULT_ROOT_TOL).map_err(|e| e.to_string())?;
    let outer: Vec<Complex64> =
        spec.nonzero_eigenvalues.iter().copied().filter(|z| !conj.contains_inflated(*z)).collect();
    let mut cloud = run_ensemble(&p, c(1e-10, 0.0), 50, 8).map_err(|e| e.to_string())?;
    ensure(cloud.failures.is_empty(), || format!("{:?}", cloud.failures))?;
    let stats = mean_radius(&mut cloud, &outer, DEFAULT_MATCH_TOL).map_err(|e| e.to_string())?.filter;
    let rest: Vec<Complex64> = cloud.points.iter().filter(|q| !q.filtered).map(|q| q.value).collect();
    let inside = rest.iter().filter(|z| conj.contains_inflated(**z)).count();
    let fraction = inside as f64 / rest.len() as f64;
    let other = ModelParams::with_b(200, 3, c(1.0, 0.0), c(1e-3, 0.0)).unwrap();
    let conj2 = conjecture_region(&other, eps, region, resolution).map_err(|e| e.to_string())?;
    let unchanged = conj2.winding == conj.winding;
    let summary = format!(
        "{} outer eigenvalues, {} matched, {} unmatched, max move {:.1e}; {:.2}% of {} others inside; region {} under delta=1e-3",
        outer.len(),
        stats.matched,
        stats.fallback,
        stats.max_relative_move,
        100.0 * fraction,
        rest.len(),
        if unchanged { "unchanged" } else { "changed" }
    );
    let ok = stats.fallback == 0 && stats.max_relative_move < 1e-4 && fraction >= 0.95 && unchanged;
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Zero of `θ ↦ Im f(r e^{iθ})` by Newton's method with a central-difference
/// derivative.
fn newton_theta(f: impl Fn(f64) -> f64, mut theta: f64) -> f64 {
    for _ in 0..50 {
        let h = 1e-6;
        let step = f(theta) / ((f(theta + h) - f(theta - h)) / (2.0 * h));
        theta -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    theta
}

fn criterion_9() -> Outcome {
    let r = reduced_radius(200, 3, 1e-10).map_err(|e| e.to_string())?;
    let want = 10f64.powf(-1.0 / 20.0);
    ensure((r - want).abs() <= 1e-15, || format!("radius {r} vs {want}"))?;
    for t in 0..=6 {
        let curve = symbol_curve(t, &[], 1.0, 4096).map_err(|e| e.to_string())?;
        let w = winding_number(&curve.points, c(0.0, 0.0)).map_err(|e| e.to_string())?;
        ensure(w == t as i64 + 1, || format!("winding {w} at t={t}"))?;
    }
    let mut worst = 0.0f64;
    for t in 1..=6 {
        let curve = symbol_curve(t, &[], r, 4096).map_err(|e| e.to_string())?;
        let theta0 = curve.theta0.ok_or("no crossing")?;
        worst = worst.max((theta0 - PI / (t + 1) as f64).abs());
    }
    for (t, b) in [(3usize, c(1.0, 0.0)), (2, c(0.5, 0.0)), (5, c(-0.3, 0.2))] {
        let curve = symbol_curve(t, &[b], r, 4096).map_err(|e| e.to_string())?;
        let theta0 = curve.theta0.ok_or("no crossing")?;
        let im = |th: f64| {
            let z = Complex64::from_polar(r, th);
            (z.powu(t as u32 + 1) * (1.0 + b * z)).im
        };
        let refined = newton_theta(im, theta0);
        worst = worst.max((refined - theta0).abs());
    }
    ensure(worst <= 2.0 * THETA_TOL, || format!("theta0 off by {worst:e}"))?;
    Ok(format!("r = {r:.15}, winding t+1 for t <= 6, theta0 within {worst:.1e}"))
}

fn run_cli(args: &[&str], out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_pseudodyn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))
}

fn directory_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let runs: [&[&str]; 6] = [
        &["spectrum", "--n", "120", "--t", "3", "--b", "1", "--delta", "0.01"],
        &["jordan", "--n", "20", "--t", "3", "--b", "0.5"],
        &["pseudospec", "--n", "40", "--t", "2", "--b", "1", "--resolution", "40,40", "--eps", "1e-8,1e-10"],
        &["ensemble", "--n", "60", "--t", "3", "--b", "1", "--samples", "6", "--seed", "11", "--sweep", "2:40,4:50,3:45"],
        &["symbol", "--n", "200", "--t", "3", "--b", "1", "--resolution", "60,60", "--eps", "1e-10"],
        &["ensemble", "--n", "40", "--t", "2", "--samples", "4", "--seed", "3", "--format", "json"],
    ];
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (k, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in [(0, 1), (1, 1), (2, 8)] {
            let dir = tmp.path().join(format!("{k}_{rep}"));
            run_cli(args, &dir, threads)?;
            outputs.push(directory_bytes(&dir));
        }
        ensure(!outputs[0].is_empty(), || format!("{}: no output", args[0]))?;
        for other in &outputs[1..] {
            let names: Vec<&String> = outputs[0].iter().map(|f| &f.0).collect();
            ensure(other == &outputs[0], || format!("{} outputs differ ({names:?})", args[0]))?;
        }
        files += outputs[0].len();
    }
    Ok(format!("{files} files byte-identical across two runs and 1 vs 8 threads"))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let only: Option<Vec<u32>> = std::env::args()
        .skip(1)
        .find(|a| !a.starts_with('-'))
        .map(|s| s.split(',').filter_map(|x| x.parse().ok()).collect());
    let mut failures = 0;
    for (k, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&k)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {k:>2}: PASS ({secs:.1} s) {msg}"),
            Err(msg) => {
                failures += 1;
                println!("criterion {k:>2}: FAIL ({secs:.1} s) {msg}");
            }
        }
    }
    println!("acceptance: {failures} failing");
    if failures > 0 && std::env::var("PSEUDODYN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
