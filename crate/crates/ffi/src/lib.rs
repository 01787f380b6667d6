//! C interface to the genus-two verification library.
//!
//! Every entry point returns a [`Genus2Status`]. On failure a message is kept
//! per thread and can be copied out with [`genus2_last_error`]. Results that
//! own memory come back as opaque handles released by their `_free`
//! function.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use genus2_spectra::integrals::integral_quartet;
use genus2_spectra::spectra::{spectrum, SpectrumOptions, SpectrumResult};
use genus2_spectra::system::{assemble_system, nullspace, solve_critical_thetas};
use genus2_spectra::{Error, ThetaParam};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Genus2Status {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ThetaDomain = 3,
    Quadrature = 4,
    RootFinding = 5,
    Mesh = 6,
    Eigensolver = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Eigenvalues of the merged eight-sector spectrum at one angle.
pub struct Genus2Spectrum {
    inner: SpectrumResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> Genus2Status {
    match e {
        Error::ThetaDomain(_) => Genus2Status::ThetaDomain,
        Error::InvalidArgument(_) => Genus2Status::InvalidArgument,
        Error::QuadratureNonConvergence { .. } => Genus2Status::Quadrature,
        Error::Bracketing(_) | Error::Uniqueness(_) => Genus2Status::RootFinding,
        Error::Mesh(_) => Genus2Status::Mesh,
        Error::Eigen(_) => Genus2Status::Eigensolver,
        _ => Genus2Status::Numerical,
    }
}

fn guard<F: FnOnce() -> Result<(), (Genus2Status, String)>>(f: F) -> Genus2Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Genus2Status::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            Genus2Status::Panic
        }
    }
}

fn lift(e: Error) -> (Genus2Status, String) {
    (status_of(&e), e.to_string())
}

fn null_check<T>(p: *const T, name: &str) -> Result<(), (Genus2Status, String)> {
    if p.is_null() {
        Err((Genus2Status::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL, or
/// 0 when no error has been recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn genus2_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// The four half-line integrals `A, B, C, D` at `theta` into `values[4]`,
/// with error estimates into `errors[4]` (which may be null).
///
/// # Safety
/// `values` must point to 4 writable doubles; `errors` likewise or be null.
#[no_mangle]
pub unsafe extern "C" fn genus2_integrals(theta: f64, tol: f64, values: *mut f64, errors: *mut f64) -> Genus2Status {
    guard(|| {
        null_check(values, "values")?;
        let q = integral_quartet(&ThetaParam::new(theta).map_err(lift)?, tol).map_err(lift)?;
        ptr::copy_nonoverlapping(q.values().as_ptr(), values, 4);
        if !errors.is_null() {
            ptr::copy_nonoverlapping(q.err.as_ptr(), errors, 4);
        }
        Ok(())
    })
}

/// The two critical angles where the period system degenerates.
///
/// # Safety
/// `theta1` and `theta2` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn genus2_critical_angles(tol_root: f64, theta1: *mut f64, theta2: *mut f64) -> Genus2Status {
    guard(|| {
        null_check(theta1, "theta1")?;
        null_check(theta2, "theta2")?;
        let ca = solve_critical_thetas(tol_root).map_err(lift)?;
        *theta1 = ca.theta1;
        *theta2 = ca.theta2;
        Ok(())
    })
}

/// Numerical nullity of the real 6x6 period system at `theta`.
///
/// # Safety
/// `nullity` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn genus2_nullity(theta: f64, tol_rank: f64, nullity: *mut usize) -> Genus2Status {
    guard(|| {
        null_check(nullity, "nullity")?;
        let sys = assemble_system(&ThetaParam::new(theta).map_err(lift)?, 1e-12).map_err(lift)?;
        *nullity = nullspace(&sys, tol_rank).map_err(lift)?.nullity;
        Ok(())
    })
}

/// Solves all eight sectors at `theta`. `k` eigenvalues per sector, mesh
/// size `h`; with `richardson` nonzero the values are extrapolated from
/// meshes `h` and `h/2`.
///
/// # Safety
/// `out` must be valid for writes. The handle must be released with
/// [`genus2_spectrum_free`].
#[no_mangle]
pub unsafe extern "C" fn genus2_spectrum_new(
    theta: f64,
    h: f64,
    k: usize,
    richardson: i32,
    out: *mut *mut Genus2Spectrum,
) -> Genus2Status {
    guard(|| {
        null_check(out, "out")?;
        *out = ptr::null_mut();
        if k == 0 || !(h > 0.0) {
            return Err((Genus2Status::InvalidArgument, format!("need k >= 1 and h > 0, got k = {k}, h = {h}")));
        }
        let opts = SpectrumOptions::new(k, h, richardson != 0);
        let inner = spectrum(&ThetaParam::new(theta).map_err(lift)?, &opts).map_err(lift)?;
        *out = Box::into_raw(Box::new(Genus2Spectrum { inner }));
        Ok(())
    })
}

/// # Safety
/// `handle` must come from [`genus2_spectrum_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn genus2_spectrum_free(handle: *mut Genus2Spectrum) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Index and nullity (eigenvalues below 2, and within the cluster
/// tolerance of 2).
///
/// # Safety
/// `handle` must be a live spectrum handle; `ind` and `nul` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn genus2_spectrum_counts(
    handle: *const Genus2Spectrum,
    ind: *mut usize,
    nul: *mut usize,
) -> Genus2Status {
    guard(|| {
        null_check(handle, "handle")?;
        null_check(ind, "ind")?;
        null_check(nul, "nul")?;
        let s = &(*handle).inner;
        *ind = s.ind;
        *nul = s.nul;
        Ok(())
    })
}

/// Smallest positive eigenvalue.
///
/// # Safety
/// `handle` must be a live spectrum handle; `value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn genus2_spectrum_lambda1(handle: *const Genus2Spectrum, value: *mut f64) -> Genus2Status {
    guard(|| {
        null_check(handle, "handle")?;
        null_check(value, "value")?;
        *value = (*handle)
            .inner
            .lambda1()
            .ok_or_else(|| (Genus2Status::Numerical, "no positive eigenvalue computed".to_string()))?;
        Ok(())
    })
}

/// Copies the merged ascending eigenvalues into `buf`. `count` receives the
/// total number; if `len` is smaller the call fails with
/// `BufferTooSmall` after filling `count`.
///
/// # Safety
/// `handle` must be a live spectrum handle; `count` valid for writes; `buf`
/// must point to `len` writable doubles or be null when `len` is 0.
#[no_mangle]
pub unsafe extern "C" fn genus2_spectrum_eigenvalues(
    handle: *const Genus2Spectrum,
    buf: *mut f64,
    len: usize,
    count: *mut usize,
) -> Genus2Status {
    guard(|| {
        null_check(handle, "handle")?;
        null_check(count, "count")?;
        let merged = &(*handle).inner.merged;
        *count = merged.len();
        if len < merged.len() {
            return Err((
                Genus2Status::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", merged.len()),
            ));
        }
        null_check(buf, "buf")?;
        for (i, e) in merged.iter().enumerate() {
            *buf.add(i) = e.value;
        }
        Ok(())
    })
}
