//! C interface to `pseudodyn`.
//!
//! Objects are opaque handles created by `pd_*_new`/`pd_*_compute`/`pd_*_run`
//! and released by the matching `pd_*_free`. Every fallible call returns a
//! [`PdStatus`]; on failure the message is available from
//! [`pd_last_error_message`] on the same thread. Array outputs take a caller
//! buffer and its capacity, and report the required length through `len`
//! even when the buffer is too small.

use num_complex::Complex64;
use pseudodyn::ensemble::{mean_radius, run_ensemble, EnsembleCloud, DEFAULT_MATCH_TOL};
use pseudodyn::jordan::condition_numbers_exact;
use pseudodyn::resolvent::{pseudospectrum_grid, resolvent_norm_direct, Region};
use pseudodyn::spectrum::{nonzero_eigenvalues, SpectrumReport};
use pseudodyn::{build_matrix, DenseMatrix, Error, ModelParams};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// A matrix of the family together with its dense form.
pub struct PdModel {
    params: ModelParams,
    dense: DenseMatrix,
}

/// Non-zero eigenvalues from the closed-form polynomial.
pub struct PdSpectrum {
    report: SpectrumReport,
}

/// Eigenvalues of Gaussian-perturbed copies of a model.
pub struct PdCloud {
    cloud: EnsembleCloud,
    outer: Vec<Complex64>,
}

/// Multiplicities of the zero eigenvalue and the non-zero count.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PdMultiplicities {
    /// Number of non-zero eigenvalues minus one.
    pub p1: usize,
    pub a0: usize,
    pub g0: usize,
    pub k0: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PdStatus {
    if e.is_usage() {
        PdStatus::InvalidArgument
    } else {
        PdStatus::Numerical
    }
}

fn guard(f: impl FnOnce() -> Result<(), (PdStatus, String)>) -> PdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PdStatus::Panic
        }
    }
}

fn lib(e: Error) -> (PdStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (PdStatus, String) {
    (PdStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PdStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copies `values` into the optional split buffers and reports the length.
unsafe fn write_complex(
    values: &[Complex64],
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> Result<(), (PdStatus, String)> {
    if !len.is_null() {
        *len = values.len();
    }
    if re.is_null() && im.is_null() && cap == 0 {
        return Ok(());
    }
    if re.is_null() || im.is_null() {
        return Err(null("output buffer"));
    }
    if cap < values.len() {
        return Err((PdStatus::BufferTooSmall, format!("need {} entries, have {cap}", values.len())));
    }
    for (k, v) in values.iter().enumerate() {
        *re.add(k) = v.re;
        *im.add(k) = v.im;
    }
    Ok(())
}

/// Length in bytes of the last error message on this thread, including the
/// terminating nul, or 0 when there is none. When `buf` is non-null up to
/// `cap` bytes are copied, always nul terminated.
#[no_mangle]
pub unsafe extern "C" fn pd_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap > 0 {
                let k = bytes.len().min(cap) - 1;
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, k);
                *buf.add(k) = 0;
            }
            bytes.len()
        }
    })
}

/// Builds the model with `nb` polynomial coefficients `b_1..b_nb`. `b_re` and
/// `b_im` may be null when `nb` is 0.
#[no_mangle]
pub unsafe extern "C" fn pd_model_new(
    n: usize,
    t: usize,
    b_re: *const f64,
    b_im: *const f64,
    nb: usize,
    delta_re: f64,
    delta_im: f64,
    out: *mut *mut PdModel,
) -> PdStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let b = if nb == 0 {
            Vec::new()
        } else {
            if b_re.is_null() || b_im.is_null() {
                return Err(null("b coefficients"));
            }
            (0..nb).map(|k| Complex64::new(*b_re.add(k), *b_im.add(k))).collect()
        };
        let params = ModelParams::new(n, t, b, Complex64::new(delta_re, delta_im)).map_err(lib)?;
        let dense = build_matrix(&params).map_err(lib)?;
        *out = Box::into_raw(Box::new(PdModel { params, dense }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pd_model_free(model: *mut PdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pd_model_size(model: *const PdModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.n)
}

#[no_mangle]
pub unsafe extern "C" fn pd_model_multiplicities(model: *const PdModel, out: *mut PdMultiplicities) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let k = m.params.multiplicities();
        *out = PdMultiplicities { p1: k.p1, a0: k.a0, g0: k.g0, k0: k.k0 };
        Ok(())
    })
}

/// Jordan block sizes of the zero eigenvalue, largest first.
#[no_mangle]
pub unsafe extern "C" fn pd_model_block_sizes(
    model: *const PdModel,
    buf: *mut usize,
    cap: usize,
    len: *mut usize,
) -> PdStatus {
    guard(|| {
        let sizes = deref(model, "model")?.params.multiplicities().block_sizes;
        if !len.is_null() {
            *len = sizes.len();
        }
        if buf.is_null() {
            return if cap == 0 { Ok(()) } else { Err(null("buf")) };
        }
        if cap < sizes.len() {
            return Err((PdStatus::BufferTooSmall, format!("need {} entries, have {cap}", sizes.len())));
        }
        ptr::copy_nonoverlapping(sizes.as_ptr(), buf, sizes.len());
        Ok(())
    })
}

/// Row-major entries of the dense matrix, `n*n` values.
#[no_mangle]
pub unsafe extern "C" fn pd_model_dense(
    model: *const PdModel,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let n = m.params.n;
        let values: Vec<Complex64> = (0..n * n).map(|k| m.dense[(k / n, k % n)]).collect();
        write_complex(&values, re, im, cap, len)
    })
}

/// Largest `‖v_1‖ ‖w_d‖` over the longest Jordan chains of zero.
#[no_mangle]
pub unsafe extern "C" fn pd_model_kappa0(model: *const PdModel, out: *mut f64) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = condition_numbers_exact(&m.params).map_err(lib)?.kappa0;
        Ok(())
    })
}

/// `‖(zI - M)^{-1}‖₂`, `+inf` at an eigenvalue.
#[no_mangle]
pub unsafe extern "C" fn pd_model_resolvent_norm(
    model: *const PdModel,
    z_re: f64,
    z_im: f64,
    out: *mut f64,
) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = resolvent_norm_direct(&m.dense, Complex64::new(z_re, z_im)).map_err(lib)?;
        Ok(())
    })
}

/// `σ_min(zI - M)` on an `nx × ny` grid over the rectangle, row-major in `y`
/// (entry `j*nx + i` is node `(x_i, y_j)`).
#[no_mangle]
pub unsafe extern "C" fn pd_model_sigma_grid(
    model: *const PdModel,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    nx: usize,
    ny: usize,
    out: *mut f64,
    cap: usize,
) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let need = nx.checked_mul(ny).ok_or((PdStatus::InvalidArgument, "grid too large".to_string()))?;
        if cap < need {
            return Err((PdStatus::BufferTooSmall, format!("need {need} entries, have {cap}")));
        }
        let region = Region { x_min, x_max, y_min, y_max };
        let grid = pseudospectrum_grid(&m.dense, region, (nx, ny)).map_err(lib)?;
        ptr::copy_nonoverlapping(grid.values.as_ptr(), out, need);
        Ok(())
    })
}

/// Non-zero eigenvalues with relative root tolerance `tol` (0 selects the
/// default).
#[no_mangle]
pub unsafe extern "C" fn pd_spectrum_compute(model: *const PdModel, tol: f64, out: *mut *mut PdSpectrum) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let tol = if tol > 0.0 { tol } else { pseudodyn::spectrum::DEFAULT_ROOT_TOL };
        let report = nonzero_eigenvalues(&m.params, tol).map_err(lib)?;
        *out = Box::into_raw(Box::new(PdSpectrum { report }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pd_spectrum_free(spectrum: *mut PdSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

#[no_mangle]
pub unsafe extern "C" fn pd_spectrum_roots(
    spectrum: *const PdSpectrum,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PdStatus {
    guard(|| write_complex(&deref(spectrum, "spectrum")?.report.nonzero_eigenvalues, re, im, cap, len))
}

/// Largest backward residual of the returned roots.
#[no_mangle]
pub unsafe extern "C" fn pd_spectrum_max_residual(spectrum: *const PdSpectrum) -> f64 {
    spectrum.as_ref().map_or(f64::NAN, |s| s.report.residuals.iter().copied().fold(0.0, f64::max))
}

/// `|Σλ - nδ| / |nδ|`.
#[no_mangle]
pub unsafe extern "C" fn pd_spectrum_trace_error(spectrum: *const PdSpectrum) -> f64 {
    spectrum.as_ref().map_or(f64::NAN, |s| s.report.trace_error)
}

/// Eigenvalues of `M + tilde_delta·Z` for `samples` Gaussian `Z`, seeded by
/// `seed`.
#[no_mangle]
pub unsafe extern "C" fn pd_ensemble_run(
    model: *const PdModel,
    tilde_delta_re: f64,
    tilde_delta_im: f64,
    samples: usize,
    seed: u64,
    out: *mut *mut PdCloud,
) -> PdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let outer = if m.params.delta == Complex64::new(0.0, 0.0) {
            Vec::new()
        } else {
            nonzero_eigenvalues(&m.params, pseudodyn::spectrum::DEFAULT_ROOT_TOL).map_err(lib)?.nonzero_eigenvalues
        };
        let cloud = run_ensemble(&m.params, Complex64::new(tilde_delta_re, tilde_delta_im), samples, seed)
            .map_err(lib)?;
        *out = Box::into_raw(Box::new(PdCloud { cloud, outer }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn pd_cloud_free(cloud: *mut PdCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// All perturbed eigenvalues, grouped by sample.
#[no_mangle]
pub unsafe extern "C" fn pd_cloud_points(
    cloud: *const PdCloud,
    re: *mut f64,
    im: *mut f64,
    cap: usize,
    len: *mut usize,
) -> PdStatus {
    guard(|| {
        let values: Vec<Complex64> = deref(cloud, "cloud")?.cloud.points.iter().map(|p| p.value).collect();
        write_complex(&values, re, im, cap, len)
    })
}

/// Mean modulus of the cloud after removing the points that track the
/// non-zero eigenvalues; `match_tol <= 0` selects the default.
#[no_mangle]
pub unsafe extern "C" fn pd_cloud_mean_radius(cloud: *mut PdCloud, match_tol: f64, out: *mut f64) -> PdStatus {
    guard(|| {
        let c = cloud.as_mut().ok_or_else(|| null("cloud"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = if match_tol > 0.0 { match_tol } else { DEFAULT_MATCH_TOL };
        *out = mean_radius(&mut c.cloud, &c.outer, tol).map_err(lib)?.mean;
        Ok(())
    })
}
