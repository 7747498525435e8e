//! C ABI over `kvcert`.
//!
//! Objects cross the boundary as opaque heap handles released with the
//! matching `*_free` function. Every fallible call returns a [`KvStatus`];
//! on failure the message is kept per thread and read back with
//! [`kv_last_error`]. Panics are caught at the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kvcert::bch::{bch_series, SplitMode};
use kvcert::constructions::{
    commutator_to_squarezeros, selfcomm_to_projections, unipotent_factor, verify_certificate, FactorCertificate,
};
use kvcert::free_algebra::{evaluate, GradedSeries, Word};
use kvcert::kv::{solve_rs, verify_factorization, KvSolution};
use kvcert::matrix::MatrixElt;
use kvcert::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KvStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// An argument was out of range or malformed.
    InvalidArgument = 2,
    /// Inputs violate a precondition of the construction.
    Precondition = 3,
    /// A numerical step failed (singular matrix, non-finite values, ...).
    Numerical = 4,
    /// Text could not be parsed.
    Format = 5,
    /// The library panicked; this is a bug.
    Panic = 6,
}

/// Formal series truncated at a fixed degree.
pub struct KvSeries(GradedSeries);

/// Solution `R`, `S` of the factorization problem.
pub struct KvFlow(KvSolution);

/// Square complex matrix.
pub struct KvMatrix(MatrixElt);

/// Certified factorization.
pub struct KvCertificate(FactorCertificate);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KvStatus {
    match e {
        Error::Precondition(_) | Error::NotLie { .. } | Error::UnitCoefficient(_) => KvStatus::Precondition,
        Error::NonFinite | Error::Singular | Error::BranchCut(_) | Error::Recursion { .. } => KvStatus::Numerical,
        Error::Format(_) | Error::Json(_) | Error::InvalidWord(_) => KvStatus::Format,
        Error::DimensionMismatch(..) | Error::Config(_) | Error::Io(_) => KvStatus::InvalidArgument,
    }
}

/// Run `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (KvStatus, String)>) -> KvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            KvStatus::Panic
        }
    }
}

fn lib<T>(r: kvcert::Result<T>) -> Result<T, (KvStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn arg(msg: &str) -> (KvStatus, String) {
    (KvStatus::InvalidArgument, msg.to_string())
}

fn null(name: &str) -> (KvStatus, String) {
    (KvStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `T`.
unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, (KvStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (KvStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// # Safety
/// `p` must be null or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, (KvStatus, String)> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (KvStatus::Format, format!("{name} is not UTF-8")))
}

/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), (KvStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = CString::new(s).map_err(|_| arg("string contains NUL"))?.into_raw();
    Ok(())
}

fn split_mode(split: c_int) -> Result<SplitMode, (KvStatus, String)> {
    match split {
        0 => Ok(SplitMode::FirstLetter),
        1 => Ok(SplitMode::Symmetric),
        _ => Err(arg("split must be 0 (first letter) or 1 (symmetric)")),
    }
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length, or 0 if none.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn kv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match &*e.borrow() {
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

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `log(e^X e^Y)` up to `degree` (2 to 16).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_bch_series(degree: usize, out: *mut *mut KvSeries) -> KvStatus {
    guard(|| {
        if !(2..=kvcert::free_algebra::MAX_DEGREE).contains(&degree) {
            return Err(arg("degree out of range"));
        }
        put(out, KvSeries(bch_series(degree).into_series()))
    })
}

/// Coefficient of `word` (e.g. `"XXY"`).
///
/// # Safety
/// `series` must be a live handle, `word` a NUL-terminated string, `re` and
/// `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_series_coeff(
    series: *const KvSeries,
    word: *const c_char,
    re: *mut f64,
    im: *mut f64,
) -> KvStatus {
    guard(|| {
        let s = get(series, "series")?;
        let w: Word = lib(text(word, "word")?.parse())?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let c = s.0.coeff(&w);
        *re = c.re;
        *im = c.im;
        Ok(())
    })
}

/// Truncation degree of a series, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kv_series_degree(series: *const KvSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.truncation())
}

/// Serialize a series to JSON; release with [`kv_string_free`].
///
/// # Safety
/// `series` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_series_to_json(series: *const KvSeries, out: *mut *mut c_char) -> KvStatus {
    guard(|| {
        let s = get(series, "series")?;
        put_string(out, lib(serde_json::to_string(&s.0).map_err(Error::from))?)
    })
}

/// # Safety
/// `series` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kv_series_free(series: *mut KvSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Solve for `R`, `S` up to `degree` (2 to 12); `split` is 0 for the
/// first-letter split, 1 for the symmetric one.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_solve(degree: usize, split: c_int, out: *mut *mut KvFlow) -> KvStatus {
    guard(|| {
        if !(2..=12).contains(&degree) {
            return Err(arg("degree must lie in [2, 12]"));
        }
        put(out, KvFlow(lib(solve_rs(degree, split_mode(split)?))?))
    })
}

/// Copy of `R` (`which` = 0) or `S` (`which` = 1).
///
/// # Safety
/// `flow` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_flow_series(flow: *const KvFlow, which: c_int, out: *mut *mut KvSeries) -> KvStatus {
    guard(|| {
        let f = get(flow, "flow")?;
        let s = match which {
            0 => f.0.r.as_series().clone(),
            1 => f.0.s.as_series().clone(),
            _ => return Err(arg("which must be 0 (R) or 1 (S)")),
        };
        put(out, KvSeries(s))
    })
}

/// `||e^{x+y} - e^R e^x e^{-R} e^S e^y e^{-S}||` with `||x||, ||y|| <= radius`.
///
/// # Safety
/// Handles must be live and `residual` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_flow_verify(
    flow: *const KvFlow,
    x: *const KvMatrix,
    y: *const KvMatrix,
    radius: f64,
    residual: *mut f64,
) -> KvStatus {
    guard(|| {
        let f = get(flow, "flow")?;
        let (x, y) = (get(x, "x")?, get(y, "y")?);
        if residual.is_null() {
            return Err(null("residual"));
        }
        *residual = lib(verify_factorization(&f.0, &x.0, &y.0, radius))?;
        Ok(())
    })
}

/// Serialize a solution to JSON; release with [`kv_string_free`].
///
/// # Safety
/// `flow` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_flow_to_json(flow: *const KvFlow, out: *mut *mut c_char) -> KvStatus {
    guard(|| put_string(out, get(flow, "flow")?.0.to_json()))
}

/// # Safety
/// `flow` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kv_flow_free(flow: *mut KvFlow) {
    if !flow.is_null() {
        drop(Box::from_raw(flow));
    }
}

/// `dim x dim` matrix from row-major real and imaginary parts; `im` may be null.
///
/// # Safety
/// `re` (and `im` if non-null) must be valid for `dim * dim` reads.
#[no_mangle]
pub unsafe extern "C" fn kv_matrix_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KvMatrix,
) -> KvStatus {
    guard(|| {
        if dim == 0 || dim > 64 {
            return Err(arg("dim must lie in [1, 64]"));
        }
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, dim * dim);
        let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, dim * dim));
        let m = MatrixElt::from_fn(dim, |i, j| {
            Complex64::new(re[i * dim + j], im.map_or(0.0, |v| v[i * dim + j]))
        });
        if !m.is_finite() {
            return Err((KvStatus::Numerical, "matrix has non-finite entries".into()));
        }
        put(out, KvMatrix(m))
    })
}

/// Entry `(i, j)`.
///
/// # Safety
/// `m` must be a live handle, `re` and `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_matrix_get(m: *const KvMatrix, i: usize, j: usize, re: *mut f64, im: *mut f64) -> KvStatus {
    guard(|| {
        let m = get(m, "matrix")?;
        if i >= m.0.dim() || j >= m.0.dim() {
            return Err(arg("index out of range"));
        }
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let z = m.0.get(i, j);
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Dimension of a matrix, or 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kv_matrix_dim(m: *const KvMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// `p(u, v)` for a series `p`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_series_evaluate(
    series: *const KvSeries,
    u: *const KvMatrix,
    v: *const KvMatrix,
    out: *mut *mut KvMatrix,
) -> KvStatus {
    guard(|| {
        let s = get(series, "series")?;
        put(out, KvMatrix(lib(evaluate(&s.0, &get(u, "u")?.0, &get(v, "v")?.0))?))
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kv_matrix_free(m: *mut KvMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `1 + x` for square-zero `x` as a commutator of commutators.
///
/// # Safety
/// `x` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_factor_unipotent(x: *const KvMatrix, out: *mut *mut KvCertificate) -> KvStatus {
    guard(|| put(out, KvCertificate(lib(unipotent_factor(&get(x, "x")?.0))?)))
}

/// `[c, d]` as a sum of square-zero matrices.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_factor_comm_n2(
    c: *const KvMatrix,
    d: *const KvMatrix,
    out: *mut *mut KvCertificate,
) -> KvStatus {
    guard(|| {
        let r = lib(commutator_to_squarezeros(&get(c, "c")?.0, &get(d, "d")?.0))?;
        put(out, KvCertificate(r.certificate))
    })
}

/// `[c^*, c]` for a contraction `c` as a signed sum of projections, built
/// around the projection `p`.
///
/// # Safety
/// Handles must be live and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_factor_comm_p(
    c: *const KvMatrix,
    p: *const KvMatrix,
    out: *mut *mut KvCertificate,
) -> KvStatus {
    guard(|| {
        let r = lib(selfcomm_to_projections(&get(c, "c")?.0, &get(p, "p")?.0))?;
        put(out, KvCertificate(r.certificate))
    })
}

/// Recompute a certificate from its atoms. `pass` is set to 1 or 0.
///
/// # Safety
/// `cert` must be a live handle; `pass` and `residual` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_certificate_verify(
    cert: *const KvCertificate,
    pass: *mut c_int,
    residual: *mut f64,
) -> KvStatus {
    guard(|| {
        let c = get(cert, "certificate")?;
        if pass.is_null() || residual.is_null() {
            return Err(null("pass/residual"));
        }
        let report = verify_certificate(&c.0);
        *pass = c_int::from(report.pass);
        *residual = report.residual;
        Ok(())
    })
}

/// Serialize a certificate to JSON; release with [`kv_string_free`].
///
/// # Safety
/// `cert` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_certificate_to_json(cert: *const KvCertificate, out: *mut *mut c_char) -> KvStatus {
    guard(|| put_string(out, lib(get(cert, "certificate")?.0.to_json())?))
}

/// Parse a certificate from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kv_certificate_from_json(json: *const c_char, out: *mut *mut KvCertificate) -> KvStatus {
    guard(|| {
        put(
            out,
            KvCertificate(lib(FactorCertificate::from_json(text(json, "json")?))?),
        )
    })
}

/// # Safety
/// `cert` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kv_certificate_free(cert: *mut KvCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status_codes() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, KvStatus::Panic);
        let mut buf = [0 as c_char; 32];
        let n = unsafe { kv_last_error(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(n, "panic: boom".len());
    }

    #[test]
    fn error_kinds_map_to_statuses() {
        assert_eq!(status_of(&Error::Singular), KvStatus::Numerical);
        assert_eq!(status_of(&Error::Precondition(String::new())), KvStatus::Precondition);
        assert_eq!(status_of(&Error::InvalidWord("Q".into())), KvStatus::Format);
        assert_eq!(status_of(&Error::DimensionMismatch(2, 3)), KvStatus::InvalidArgument);
    }

    #[test]
    fn truncated_error_message_is_terminated() {
        set_error("abcdef".into());
        let mut buf = [1 as c_char; 4];
        assert_eq!(unsafe { kv_last_error(buf.as_mut_ptr(), buf.len()) }, 6);
        assert_eq!(buf[3], 0);
        assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap(), "abc");
    }
}
