//! C ABI over `bergman-density`.
//!
//! Every fallible function returns a [`BdStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read
//! with [`bd_last_error_message`]. Geometries and Gram matrices are opaque
//! handles owned by the caller and released with their `_free` function.
//! Panics never cross the boundary; they become `BD_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bergman_density::density::{
    cp1_density, density_estimate, expansion_reference, DEFAULT_V_DEGREES,
};
use bergman_density::geometry::{ModelGeometry, PointDisk};
use bergman_density::gram::{
    assemble_truncated_gram, inverse00_oracle, orthonormalize_i00, schur_i00, BorderedGram,
    ErrorBudget,
};
use bergman_density::moments::{lambda0_closed_form, lambda_inv_sq};
use bergman_density::num_complex::Complex64;
use bergman_density::quadrature::QuadratureConfig;
use bergman_density::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BdStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Pole = 3,
    Quadrature = 4,
    NotPositiveDefinite = 5,
    Singular = 6,
    Overflow = 7,
    InvalidArgument = 8,
    Panic = 9,
}

impl From<&Error> for BdStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => Self::Domain,
            Error::Pole => Self::Pole,
            Error::QuadratureFailure { .. } => Self::Quadrature,
            Error::NotPositiveDefinite { .. } => Self::NotPositiveDefinite,
            Error::Singular { .. } => Self::Singular,
            Error::Overflow(_) => Self::Overflow,
            Error::InvalidInput(_) => Self::InvalidArgument,
        }
    }
}

/// Opaque model geometry.
pub struct BdGeometry(ModelGeometry);

/// Opaque bordered Gram matrix.
pub struct BdGram(BorderedGram);

/// `I_00` from the bordering formula.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BdSchur {
    pub value: f64,
    pub excess: f64,
    pub spread: f64,
    pub lo: f64,
    pub hi: f64,
}

/// One density evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BdDensityReport {
    pub m: u64,
    pub rho: f64,
    pub density: f64,
    pub lo: f64,
    pub hi: f64,
    pub reference: f64,
    pub remainder: f64,
    pub budget_c: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BdStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_last_error(format!("null pointer: {name}"));
            BdStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            set_last_error(e.to_string());
            BdStatus::from(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BdStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or valid for reads of `T`.
unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

/// # Safety
/// `p` is null or valid for writes of `T`.
unsafe fn put<T>(p: *mut T, value: T, name: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

fn quadrature(rel_tol: f64) -> Result<QuadratureConfig, Failure> {
    Ok(QuadratureConfig::new(
        rel_tol,
        QuadratureConfig::default().max_subdivisions,
    )?)
}

/// Message of the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Create the model geometry of scalar curvature `rho`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn bd_geometry_new(rho: f64, out: *mut *mut BdGeometry) -> BdStatus {
    guard(|| {
        let g = ModelGeometry::new(rho)?;
        put(out, Box::into_raw(Box::new(BdGeometry(g))), "out")
    })
}

/// Restrict the chart to `|z| < cap`.
///
/// # Safety
/// `geom` must come from [`bd_geometry_new`] and not be freed.
#[no_mangle]
pub unsafe extern "C" fn bd_geometry_set_radius_cap(geom: *mut BdGeometry, cap: f64) -> BdStatus {
    guard(|| {
        let g = geom.as_mut().ok_or(Failure::Null("geom"))?;
        g.0 = g.0.with_radius_cap(cap)?;
        Ok(())
    })
}

/// # Safety
/// `geom` is null or came from [`bd_geometry_new`] and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn bd_geometry_free(geom: *mut BdGeometry) {
    if !geom.is_null() {
        drop(Box::from_raw(geom));
    }
}

/// Radius of the chart; infinity when unbounded.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_geometry_max_radius(
    geom: *const BdGeometry,
    out: *mut f64,
) -> BdStatus {
    guard(|| put(out, get(geom, "geom")?.0.max_radius(), "out"))
}

/// `g(z)`.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_metric_density(
    geom: *const BdGeometry,
    re: f64,
    im: f64,
    out: *mut f64,
) -> BdStatus {
    guard(|| {
        let v = get(geom, "geom")?
            .0
            .metric_density(PointDisk::new(re, im))?;
        put(out, v, "out")
    })
}

/// `a(z)`.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_bundle_weight(
    geom: *const BdGeometry,
    re: f64,
    im: f64,
    out: *mut f64,
) -> BdStatus {
    guard(|| {
        let v = get(geom, "geom")?.0.bundle_weight(PointDisk::new(re, im))?;
        put(out, v, "out")
    })
}

/// Finite-difference residual of `g^-1 d dbar log g + rho` with step `h`.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_curvature_residual(
    geom: *const BdGeometry,
    re: f64,
    im: f64,
    h: f64,
    out: *mut f64,
) -> BdStatus {
    guard(|| {
        let v = get(geom, "geom")?
            .0
            .curvature_residual(PointDisk::new(re, im), h)?;
        put(out, v, "out")
    })
}

/// `lambda_p^-2` over `|z| <= radius` by adaptive quadrature.
/// `abs_err` may be null.
///
/// # Safety
/// `geom` is a live geometry handle, `value` is writable, `abs_err` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn bd_lambda_inv_sq(
    geom: *const BdGeometry,
    m: u64,
    p: u32,
    radius: f64,
    rel_tol: f64,
    value: *mut f64,
    abs_err: *mut f64,
) -> BdStatus {
    guard(|| {
        let q = lambda_inv_sq(&get(geom, "geom")?.0, m, p, radius, &quadrature(rel_tol)?)?;
        put(value, q.value, "value")?;
        if !abs_err.is_null() {
            abs_err.write(q.abs_err);
        }
        Ok(())
    })
}

/// `lambda_0^-2` on the truncation disk in closed form.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_lambda0_closed_form(
    geom: *const BdGeometry,
    m: u64,
    out: *mut f64,
) -> BdStatus {
    guard(|| put(out, lambda0_closed_form(&get(geom, "geom")?.0, m)?, "out"))
}

/// `m + rho / 2`.
#[no_mangle]
pub extern "C" fn bd_expansion_reference(m: u64, rho: f64) -> f64 {
    expansion_reference(m, rho)
}

/// Density at the base point with the default trailing degrees.
///
/// # Safety
/// `geom` is a live geometry handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_density_estimate(
    geom: *const BdGeometry,
    m: u64,
    budget_c: f64,
    rel_tol: f64,
    out: *mut BdDensityReport,
) -> BdStatus {
    guard(|| {
        let g = &get(geom, "geom")?.0;
        let r = density_estimate(
            g,
            m,
            ErrorBudget::new(budget_c)?,
            &DEFAULT_V_DEGREES,
            &quadrature(rel_tol)?,
        )?;
        let report = BdDensityReport {
            m: r.m,
            rho: r.rho,
            density: r.density,
            lo: r.interval.0,
            hi: r.interval.1,
            reference: r.reference,
            remainder: r.remainder,
            budget_c: r.budget_c,
        };
        put(out, report, "out")
    })
}

/// Sphere-model density at `z`: the analytic value `m + 1` and the term-by-term sum.
///
/// # Safety
/// `analytic` and `summed` are writable.
#[no_mangle]
pub unsafe extern "C" fn bd_cp1_density(
    m: u64,
    re: f64,
    im: f64,
    analytic: *mut f64,
    summed: *mut f64,
) -> BdStatus {
    guard(|| {
        if analytic.is_null() || summed.is_null() {
            return Err(Failure::Null("analytic/summed"));
        }
        let d = cp1_density(m, PointDisk::new(re, im))?;
        analytic.write(d.analytic);
        summed.write(d.summed);
        Ok(())
    })
}

/// Gram matrix of the truncated sections of degrees `0, 1, degrees...`.
/// Passing `n_degrees == 0` uses the default trailing degrees.
///
/// # Safety
/// `geom` is a live geometry handle, `degrees` points to `n_degrees` values
/// (or is null when `n_degrees == 0`), `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_assemble(
    geom: *const BdGeometry,
    m: u64,
    degrees: *const u32,
    n_degrees: usize,
    budget_c: f64,
    rel_tol: f64,
    out: *mut *mut BdGram,
) -> BdStatus {
    guard(|| {
        let g = &get(geom, "geom")?.0;
        let extra: &[u32] = if n_degrees == 0 {
            &DEFAULT_V_DEGREES
        } else if degrees.is_null() {
            return Err(Failure::Null("degrees"));
        } else {
            std::slice::from_raw_parts(degrees, n_degrees)
        };
        let gram = assemble_truncated_gram(
            g,
            m,
            extra,
            ErrorBudget::new(budget_c)?,
            &quadrature(rel_tol)?,
        )?;
        put(out, Box::into_raw(Box::new(BdGram(gram))), "out")
    })
}

/// Gram matrix from row-major entries given as interleaved `(re, im)` pairs,
/// `2 * dim * dim` doubles. `budgets` holds `dim * dim` values or is null for zero budgets.
///
/// # Safety
/// `entries` and `budgets` (when non-null) are readable for the stated lengths, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_from_entries(
    dim: usize,
    entries: *const f64,
    budgets: *const f64,
    out: *mut *mut BdGram,
) -> BdStatus {
    guard(|| {
        if entries.is_null() {
            return Err(Failure::Null("entries"));
        }
        let n = dim
            .checked_mul(dim)
            .ok_or_else(|| Error::InvalidInput("dimension overflows".into()))?;
        let raw = std::slice::from_raw_parts(entries, 2 * n);
        let values = raw
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let budgets = if budgets.is_null() {
            vec![0.0; n]
        } else {
            std::slice::from_raw_parts(budgets, n).to_vec()
        };
        let gram = BorderedGram::from_entries(dim, values, budgets)?;
        put(out, Box::into_raw(Box::new(BdGram(gram))), "out")
    })
}

/// # Safety
/// `gram` is null or came from a `bd_gram_*` constructor and was not freed before.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_free(gram: *mut BdGram) {
    if !gram.is_null() {
        drop(Box::from_raw(gram));
    }
}

/// Dimension of the matrix, or 0 for a null handle.
///
/// # Safety
/// `gram` is null or a live Gram handle.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_dim(gram: *const BdGram) -> usize {
    gram.as_ref().map_or(0, |g| g.0.dim())
}

/// # Safety
/// `gram` is a live Gram handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_schur_i00(gram: *const BdGram, out: *mut BdSchur) -> BdStatus {
    guard(|| {
        let s = schur_i00(&get(gram, "gram")?.0)?;
        let v = BdSchur {
            value: s.value,
            excess: s.excess,
            spread: s.spread,
            lo: s.interval.0,
            hi: s.interval.1,
        };
        put(out, v, "out")
    })
}

/// `(F^-1)_00` by a dense LU solve.
///
/// # Safety
/// `gram` is a live Gram handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_inverse00(gram: *const BdGram, out: *mut f64) -> BdStatus {
    guard(|| put(out, inverse00_oracle(&get(gram, "gram")?.0)?, "out"))
}

/// `I_00` through Cholesky orthonormalization.
///
/// # Safety
/// `gram` is a live Gram handle, `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bd_gram_orthonormalize_i00(
    gram: *const BdGram,
    out: *mut f64,
) -> BdStatus {
    guard(|| put(out, orthonormalize_i00(&get(gram, "gram")?.0)?, "out"))
}
