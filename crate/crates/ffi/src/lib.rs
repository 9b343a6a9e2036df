//! C interface to `tritter-core`.
//!
//! Covariance matrices cross the boundary as opaque `TritterCm` handles,
//! created by the `tritter_cm_*` constructors and released with
//! [`tritter_cm_free`]. Every fallible function returns a [`TritterStatus`];
//! on failure, [`tritter_last_error`] describes what went wrong on the
//! calling thread. Modes are numbered 0 (a), 1 (b), 2 (c).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tritter_core::analysis::{find_threshold, ThresholdResult};
use tritter_core::measures::closed_form::{reference_formula, Context};
use tritter_core::measures::MeasureId;
use tritter_core::nalgebra::Complex;
use tritter_core::{
    apply_loss, gaussian_steering, ideal_output_cm, log_negativity, output_cm_via_transform, symplectic_eigenvalues,
    CovarianceMatrix, Error, InputSpec, LossConfig, LossSetting, Mode, ModePartition, Roles, Scenario, ScenarioId,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TritterStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument is outside its domain (λ, T, mode index, scenario...).
    Domain = 2,
    /// Linear algebra failed or produced an inconsistent result.
    Numeric = 3,
    /// A string argument could not be parsed.
    Parse = 4,
    /// A block needed for a conditional state is singular.
    Singular = 5,
    /// No closed form exists for the request.
    Unsupported = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Threshold outcome reported by [`tritter_find_threshold`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TritterThresholdKind {
    /// The measure vanishes below the returned transmissivity.
    At = 0,
    AlwaysPresent = 1,
    NeverPresent = 2,
}

/// Opaque covariance matrix.
pub struct TritterCm {
    inner: CovarianceMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TritterStatus {
    match e {
        Error::Domain(_) | Error::ModeRange { .. } | Error::Partition(_) | Error::Dimension(_) => TritterStatus::Domain,
        Error::Parse(_) => TritterStatus::Parse,
        Error::SingularBlock { .. } => TritterStatus::Singular,
        Error::UnsupportedFormula(_) => TritterStatus::Unsupported,
        Error::Numeric { .. } | Error::NotUnitary(_) => TritterStatus::Numeric,
    }
}

struct Fail(TritterStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TritterStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TritterStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TritterStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TritterStatus::Panic
        }
    }
}

unsafe fn cm_ref<'a>(cm: *const TritterCm) -> Result<&'a CovarianceMatrix, Fail> {
    cm.as_ref().map(|c| &c.inner).ok_or_else(|| null("cm"))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_cm(out: *mut *mut TritterCm, v: CovarianceMatrix) -> Result<(), Fail> {
    put(out, Box::into_raw(Box::new(TritterCm { inner: v })), "out")
}

unsafe fn modes(p: *const u32, len: usize, what: &str) -> Result<Vec<usize>, Fail> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len).iter().map(|&m| m as usize).collect())
}

fn mode(index: u32) -> Result<Mode, Fail> {
    Mode::from_index(index as usize).ok_or_else(|| {
        Fail(
            TritterStatus::Domain,
            format!("mode index must be 0, 1 or 2, got {index}"),
        )
    })
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Fail(TritterStatus::Parse, format!("{what} is not UTF-8")))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tritter_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tritter_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Lossless output covariance matrix from its closed form.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_ideal(lambda: f64, out: *mut *mut TritterCm) -> TritterStatus {
    guard(|| put_cm(out, ideal_output_cm(lambda)?))
}

/// Lossless output obtained by applying the tritter to the input state with
/// coherent amplitude `gamma_re + i gamma_im` on mode c.
///
/// # Safety
/// `out` must be valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_transform(
    lambda: f64,
    gamma_re: f64,
    gamma_im: f64,
    out: *mut *mut TritterCm,
) -> TritterStatus {
    guard(|| {
        let spec = InputSpec::from_lambda(lambda, Complex::new(gamma_re, gamma_im))?;
        put_cm(out, output_cm_via_transform(&spec)?)
    })
}

/// Covariance matrix from `(2n)²` row-major entries; the matrix is
/// symmetrized.
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` must be valid for
/// writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_from_entries(
    data: *const f64,
    len: usize,
    out: *mut *mut TritterCm,
) -> TritterStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let dim = (len as f64).sqrt().round() as usize;
        if dim * dim != len {
            return Err(Fail(
                TritterStatus::Domain,
                format!("{len} entries do not form a square matrix"),
            ));
        }
        put_cm(
            out,
            CovarianceMatrix::from_row_slice(dim, std::slice::from_raw_parts(data, len))?,
        )
    })
}

/// Pure loss with per-mode transmissivities.
///
/// # Safety
/// `cm` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_apply_loss(
    cm: *const TritterCm,
    t_a: f64,
    t_b: f64,
    t_c: f64,
    out: *mut *mut TritterCm,
) -> TritterStatus {
    guard(|| put_cm(out, apply_loss(cm_ref(cm)?, &LossConfig::new([t_a, t_b, t_c])?)?))
}

/// Loss scenario `scenario` (1 to 5) at shared transmissivity `t`, with
/// single party `k` and lossy pair member `lossy_member`.
///
/// # Safety
/// `cm` must be a live handle and `out` valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_apply_scenario(
    cm: *const TritterCm,
    scenario: u8,
    t: f64,
    k: u32,
    lossy_member: u32,
    out: *mut *mut TritterCm,
) -> TritterStatus {
    guard(|| {
        let roles = Roles::new(mode(k)?, mode(lossy_member)?)?;
        let s = Scenario::new(ScenarioId::new(scenario)?, t, roles)?;
        put_cm(out, apply_loss(cm_ref(cm)?, &LossSetting::Scenario(s).config())?)
    })
}

/// Number of modes, or 0 for a null handle.
///
/// # Safety
/// `cm` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_n_modes(cm: *const TritterCm) -> usize {
    cm.as_ref().map_or(0, |c| c.inner.n_modes())
}

/// # Safety
/// `cm` must be a live handle and `out` valid for writing a double.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_get(cm: *const TritterCm, row: usize, col: usize, out: *mut f64) -> TritterStatus {
    guard(|| {
        let v = cm_ref(cm)?;
        if row >= v.dim() || col >= v.dim() {
            return Err(Fail(
                TritterStatus::Domain,
                format!("entry ({row}, {col}) outside a {0}x{0} matrix", v.dim()),
            ));
        }
        put(out, v.get(row, col), "out")
    })
}

/// Copies all entries, row-major, into `buf` of capacity `len`.
///
/// # Safety
/// `cm` must be a live handle and `buf` valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_copy_entries(cm: *const TritterCm, buf: *mut f64, len: usize) -> TritterStatus {
    guard(|| {
        let data = cm_ref(cm)?.to_row_major();
        if len < data.len() {
            return Err(Fail(
                TritterStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", data.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `cm` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tritter_cm_free(cm: *mut TritterCm) {
    if !cm.is_null() {
        drop(Box::from_raw(cm));
    }
}

/// Ascending symplectic eigenvalues, one per mode, into `buf`.
///
/// # Safety
/// `cm` must be a live handle and `buf` valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tritter_symplectic_eigenvalues(
    cm: *const TritterCm,
    buf: *mut f64,
    len: usize,
) -> TritterStatus {
    guard(|| {
        let nu = symplectic_eigenvalues(cm_ref(cm)?)?;
        if len < nu.len() {
            return Err(Fail(
                TritterStatus::BufferTooSmall,
                format!("need {} doubles, got {len}", nu.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(nu.as_ptr(), buf, nu.len());
        Ok(())
    })
}

unsafe fn partition(
    cm: &CovarianceMatrix,
    a: *const u32,
    a_len: usize,
    b: *const u32,
    b_len: usize,
) -> Result<ModePartition, Fail> {
    Ok(ModePartition::new(
        cm.n_modes(),
        modes(a, a_len, "modes_a")?,
        modes(b, b_len, "modes_b")?,
    )?)
}

/// Logarithmic negativity between mode sets `a` and `b`.
///
/// # Safety
/// `cm` must be a live handle, `a`/`b` must hold `a_len`/`b_len` indices
/// and `out` must be valid for writing a double.
#[no_mangle]
pub unsafe extern "C" fn tritter_log_negativity(
    cm: *const TritterCm,
    a: *const u32,
    a_len: usize,
    b: *const u32,
    b_len: usize,
    out: *mut f64,
) -> TritterStatus {
    guard(|| {
        let v = cm_ref(cm)?;
        put(out, log_negativity(v, &partition(v, a, a_len, b, b_len)?)?, "out")
    })
}

/// Gaussian steering from mode set `a` to mode set `b`.
///
/// # Safety
/// As for [`tritter_log_negativity`].
#[no_mangle]
pub unsafe extern "C" fn tritter_gaussian_steering(
    cm: *const TritterCm,
    a: *const u32,
    a_len: usize,
    b: *const u32,
    b_len: usize,
    out: *mut f64,
) -> TritterStatus {
    guard(|| {
        let v = cm_ref(cm)?;
        put(out, gaussian_steering(v, &partition(v, a, a_len, b, b_len)?)?, "out")
    })
}

fn context(scenario: u8) -> Result<Context, Fail> {
    Ok(match scenario {
        0 => Context::Ideal,
        s => Context::Scenario(ScenarioId::new(s)?),
    })
}

/// Closed form of `measure` (e.g. `"S:k->ij"`) for the default roles
/// (k = c, lossy pair member a), unclamped. `scenario` 0 means no loss.
/// `domain_ok` is set to 0 when the expression leaves the real domain.
///
/// # Safety
/// `measure` must be a NUL-terminated string; `value` and `domain_ok` must
/// be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn tritter_reference_formula(
    measure: *const c_char,
    scenario: u8,
    lambda: f64,
    t: f64,
    value: *mut f64,
    domain_ok: *mut i32,
) -> TritterStatus {
    guard(|| {
        let id: MeasureId = str_arg(measure, "measure")?.parse()?;
        let formula = id.formula(&Roles::default(), context(scenario)?).ok_or_else(|| {
            Fail(
                TritterStatus::Unsupported,
                format!("no closed form for {id} in this setting"),
            )
        })?;
        let v = reference_formula(formula, lambda, t)?;
        if value.is_null() {
            return Err(null("value"));
        }
        put(domain_ok, i32::from(v.domain_ok), "domain_ok")?;
        value.write(v.value);
        Ok(())
    })
}

/// Transmissivity below which `measure` vanishes in `scenario` (1 to 5,
/// default roles), searched in `[t_lo, t_hi]`. `t` is written only when
/// `kind` is `TRITTER_THRESHOLD_KIND_AT`.
///
/// # Safety
/// `measure` must be a NUL-terminated string; `kind` and `t` must be valid
/// for writing.
#[no_mangle]
pub unsafe extern "C" fn tritter_find_threshold(
    measure: *const c_char,
    scenario: u8,
    lambda: f64,
    t_lo: f64,
    t_hi: f64,
    kind: *mut TritterThresholdKind,
    t: *mut f64,
) -> TritterStatus {
    guard(|| {
        let id: MeasureId = str_arg(measure, "measure")?.parse()?;
        let s = Scenario::new(ScenarioId::new(scenario)?, 1.0, Roles::default())?;
        if kind.is_null() || t.is_null() {
            return Err(null("kind or t"));
        }
        match find_threshold(&id, lambda, &s, (t_lo, t_hi))? {
            ThresholdResult::At(x) => {
                kind.write(TritterThresholdKind::At);
                t.write(x);
            }
            ThresholdResult::AlwaysPresent => kind.write(TritterThresholdKind::AlwaysPresent),
            ThresholdResult::NeverPresent => kind.write(TritterThresholdKind::NeverPresent),
        }
        Ok(())
    })
}
