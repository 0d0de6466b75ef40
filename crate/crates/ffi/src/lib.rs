//! C interface to `rado-lab`.
//!
//! Matrices and ground sets live behind opaque handles created by the
//! `*_parse` functions and released with the matching `*_free`. Every
//! fallible call returns a [`RadoStatus`]; on failure the message is
//! available from [`rado_last_error`] until the next call on the same thread.
//! Outputs are written through caller-supplied pointers only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rado_lab::coloring::{is_a_r_rado, SearchBudget, Verdict};
use rado_lab::matrix::{is_partition_regular, m_parameter};
use rado_lab::montecarlo::estimate_rado_prob;
use rado_lab::solutions::count_solutions;
use rado_lab::{Error, GroundSet, IntegerMatrix};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    LimitExceeded = 5,
    Undefined = 6,
    BudgetExceeded = 7,
    Panic = 8,
    Internal = 9,
}

/// Outcome of a coloring search.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadoVerdict {
    /// Every r-coloring has a monochromatic solution.
    Rado = 0,
    /// A coloring without monochromatic solutions exists.
    NotRado = 1,
    /// The node budget ran out.
    Unknown = 2,
}

/// Seeded Monte Carlo estimate of the probability that a p-random subset is Rado.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadoEstimate {
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub successes: u64,
    pub unknowns: u64,
    pub trials: u64,
}

/// Opaque integer matrix.
pub struct RadoMatrix(IntegerMatrix);

/// Opaque ground set.
pub struct RadoGround(GroundSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RadoStatus {
    match e {
        Error::Parse(_) => RadoStatus::Parse,
        Error::Invalid(_) | Error::ShapeMismatch(..) | Error::Matrix(_) | Error::NotPrime(_) => {
            RadoStatus::InvalidArgument
        }
        Error::LimitExceeded { .. } => RadoStatus::LimitExceeded,
        Error::UndefinedParameter { .. } | Error::RankUndefined(_) | Error::NoSolutions => RadoStatus::Undefined,
        Error::BudgetExceeded(_) => RadoStatus::BudgetExceeded,
        _ => RadoStatus::Internal,
    }
}

struct Fail(RadoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RadoStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RadoStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RadoStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail(RadoStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(RadoStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(RadoStatus::NullPointer, format!("null {what}")))
}

fn non_null<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(RadoStatus::NullPointer, format!("null {what}")))
    } else {
        Ok(())
    }
}

/// Last error message on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn rado_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rado_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a matrix such as "1 1 -1" or "1 -2 1; 0 1 -2".
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_matrix_parse(spec: *const c_char, out: *mut *mut RadoMatrix) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let m: IntegerMatrix = text(spec)?.parse()?;
        *out = Box::into_raw(Box::new(RadoMatrix(m)));
        Ok(())
    })
}

/// Builds a matrix from `rows * cols` row-major entries.
///
/// # Safety
/// `entries` must point to `rows * cols` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_matrix_from_rows(
    entries: *const i64,
    rows: usize,
    cols: usize,
    out: *mut *mut RadoMatrix,
) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let n = rows
            .checked_mul(cols)
            .filter(|&n| n > 0)
            .ok_or_else(|| Fail(RadoStatus::InvalidArgument, "matrix must be non-empty".into()))?;
        let data = std::slice::from_raw_parts(deref(entries, "entries")?, n);
        let rows: Vec<&[i64]> = data.chunks(cols).collect();
        let m = IntegerMatrix::from_rows(&rows)?;
        *out = Box::into_raw(Box::new(RadoMatrix(m)));
        Ok(())
    })
}

/// Number of columns, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rado_matrix_cols(m: *const RadoMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// # Safety
/// `m` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rado_matrix_free(m: *mut RadoMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Parses a ground set such as "interval:9", "cyclic:36" or "power:Z4:3".
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_ground_parse(spec: *const c_char, out: *mut *mut RadoGround) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let g: GroundSet = text(spec)?.parse()?;
        *out = Box::into_raw(Box::new(RadoGround(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rado_ground_free(g: *mut RadoGround) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Whether the columns condition holds over the rationals.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_is_partition_regular(m: *const RadoMatrix, out: *mut bool) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let m = deref(m, "matrix")?;
        *out = is_partition_regular(&m.0);
        Ok(())
    })
}

/// Number of solutions of `Ax = 0` with all entries in the ground set, as a
/// decimal string. Free it with [`rado_string_free`].
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_count_solutions(
    m: *const RadoMatrix,
    g: *const RadoGround,
    out: *mut *mut c_char,
) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let n = count_solutions(&deref(m, "matrix")?.0, &deref(g, "ground set")?.0)?;
        *out = CString::new(n.to_string()).unwrap().into_raw();
        Ok(())
    })
}

/// The m-parameter over the ground set. `value` receives a float
/// approximation; `exact`, if not NULL, receives the exact form (for example
/// "4/3" or "log_2(6)"), to be freed with [`rado_string_free`].
///
/// # Safety
/// Handles must be live; `value` must be writable; `exact` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn rado_m_parameter(
    m: *const RadoMatrix,
    g: *const RadoGround,
    value: *mut f64,
    exact: *mut *mut c_char,
) -> RadoStatus {
    guard(|| {
        non_null(value, "output pointer")?;
        let provider = deref(g, "ground set")?.0.rank_provider()?;
        let mp = m_parameter(&deref(m, "matrix")?.0, &provider)?;
        *value = mp.to_f64();
        if !exact.is_null() {
            *exact = CString::new(mp.value.to_string()).unwrap().into_raw();
        }
        Ok(())
    })
}

/// Decides whether every `r`-coloring of the ground set has a monochromatic
/// solution with distinct entries. `certificate`, if not NULL, must hold one
/// slot per ground-set element and receives a proper coloring (0-based colors,
/// in element order) when the verdict is `NotRado`.
///
/// # Safety
/// Handles must be live; `verdict` must be writable; `certificate` is NULL or
/// has at least `certificate_len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn rado_color(
    m: *const RadoMatrix,
    g: *const RadoGround,
    r: u32,
    budget_nodes: u64,
    verdict: *mut RadoVerdict,
    certificate: *mut u32,
    certificate_len: usize,
) -> RadoStatus {
    guard(|| {
        non_null(verdict, "output pointer")?;
        let g = deref(g, "ground set")?;
        if r == 0 {
            return Err(Fail(RadoStatus::InvalidArgument, "at least one color is needed".into()));
        }
        let v = is_a_r_rado(&deref(m, "matrix")?.0, &g.0, r, SearchBudget { nodes: budget_nodes })?;
        if let (Some(c), false) = (&v.certificate, certificate.is_null()) {
            if certificate_len < c.len() {
                return Err(Fail(
                    RadoStatus::InvalidArgument,
                    format!("certificate buffer holds {certificate_len}, need {}", c.len()),
                ));
            }
            ptr::copy_nonoverlapping(c.as_ptr(), certificate, c.len());
        }
        *verdict = match v.verdict {
            Verdict::Ramsey => RadoVerdict::Rado,
            Verdict::NotRamsey => RadoVerdict::NotRado,
            Verdict::Unknown => RadoVerdict::Unknown,
        };
        Ok(())
    })
}

/// Estimates the probability that a `p`-random subset of the ground set is
/// `(A, r)`-Rado. Results depend only on the arguments, not on threading.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rado_estimate(
    m: *const RadoMatrix,
    g: *const RadoGround,
    r: u32,
    p: f64,
    trials: u64,
    seed: u64,
    budget_nodes: u64,
    out: *mut RadoEstimate,
) -> RadoStatus {
    guard(|| {
        non_null(out, "output pointer")?;
        let budget = SearchBudget { nodes: budget_nodes };
        let e = estimate_rado_prob(&deref(m, "matrix")?.0, &deref(g, "ground set")?.0, r, p, trials, seed, budget)?;
        *out = RadoEstimate {
            estimate: e.estimate,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            successes: e.successes,
            unknowns: e.unknowns,
            trials: e.trials,
        };
        Ok(())
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a string from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rado_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
