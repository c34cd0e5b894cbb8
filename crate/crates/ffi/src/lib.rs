//! C ABI for the verification toolkit. Scenario handles are opaque; results
//! come back as JSON strings allocated by this library and released with
//! [`cw_string_free`]. Every entry point returns a status code and catches
//! panics at the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use cloakwave::error::Error;
use cloakwave::scenario::{
    run_causality_suite, run_compare_suite, run_witness_suite, HyperboloidScenario, RunConfig,
};
use cloakwave::waves::CompareMode;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    CwOk = 0,
    CwNullPointer = 1,
    CwInvalidUtf8 = 2,
    CwConfigError = 3,
    CwDomainError = 4,
    CwSignatureError = 5,
    CwSingularMetric = 6,
    CwChartError = 7,
    CwStabilityError = 8,
    CwGridError = 9,
    CwDataError = 10,
    CwPreconditionError = 11,
    CwIoError = 12,
    CwVerdictFailed = 13,
    CwPanic = 14,
}

fn status_of(err: &Error) -> CwStatus {
    match err {
        Error::Domain(_) => CwStatus::CwDomainError,
        Error::Signature(_) => CwStatus::CwSignatureError,
        Error::SingularMetric(_) => CwStatus::CwSingularMetric,
        Error::Chart(_) => CwStatus::CwChartError,
        Error::Config(_) => CwStatus::CwConfigError,
        Error::Stability(_) => CwStatus::CwStabilityError,
        Error::Grid(_) => CwStatus::CwGridError,
        Error::Data(_) => CwStatus::CwDataError,
        Error::Precondition(_) => CwStatus::CwPreconditionError,
        Error::Io(_) => CwStatus::CwIoError,
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let cmsg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cmsg));
}

/// Message for the most recent error on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread; do not free
/// it.
#[no_mangle]
pub extern "C" fn cw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Opaque validated scenario configuration.
pub struct CwScenario {
    config: RunConfig,
}

fn guard<F: FnOnce() -> CwStatus>(f: F) -> CwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("panic across the FFI boundary".to_string());
            CwStatus::CwPanic
        }
    }
}

unsafe fn read_cstr<'a>(ptr: *const c_char) -> Result<&'a str, CwStatus> {
    if ptr.is_null() {
        return Err(CwStatus::CwNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("invalid UTF-8 in argument".to_string());
        CwStatus::CwInvalidUtf8
    })
}

fn export_string(s: String, out: *mut *mut c_char) -> CwStatus {
    match CString::new(s) {
        Ok(cstr) => {
            unsafe { *out = cstr.into_raw() };
            CwStatus::CwOk
        }
        Err(_) => {
            set_last_error("embedded NUL in output".to_string());
            CwStatus::CwIoError
        }
    }
}

/// Build a scenario from a JSON configuration string.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer; the
/// returned handle must be released with [`cw_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn cw_scenario_new_from_json(
    json: *const c_char,
    out: *mut *mut CwScenario,
) -> CwStatus {
    guard(|| {
        if out.is_null() {
            return CwStatus::CwNullPointer;
        }
        let text = match read_cstr(json) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match RunConfig::from_json(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(CwScenario { config }));
                CwStatus::CwOk
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Build a scenario with the default parameters of the named geometry
/// ("hyperboloid", "kruskal" or "flrw-bounce").
///
/// # Safety
/// `name` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cw_scenario_default(
    name: *const c_char,
    out: *mut *mut CwScenario,
) -> CwStatus {
    guard(|| {
        if out.is_null() {
            return CwStatus::CwNullPointer;
        }
        let name = match read_cstr(name) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let config = RunConfig::for_scenario(name);
        match config.validate() {
            Ok(()) => {
                *out = Box::into_raw(Box::new(CwScenario { config }));
                CwStatus::CwOk
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a scenario handle. NULL is accepted.
///
/// # Safety
/// `scenario` must come from a constructor of this library and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_scenario_free(scenario: *mut CwScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Release a string returned by this library. NULL is accepted.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn run_suite_json<F>(
    scenario: *const CwScenario,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
    run: F,
) -> CwStatus
where
    F: FnOnce(&RunConfig) -> Result<(String, bool), Error>,
{
    if scenario.is_null() || out_json.is_null() {
        return CwStatus::CwNullPointer;
    }
    let config = &(*scenario).config;
    match run(config) {
        Ok((json, pass)) => {
            if !out_pass.is_null() {
                *out_pass = pass;
            }
            export_string(json, out_json)
        }
        Err(e) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Run the reachability verification; the JSON report lands in `out_json`
/// and the suite verdict in `out_pass` (may be NULL).
///
/// # Safety
/// `scenario` and `out_json` must be valid; free the string with
/// [`cw_string_free`].
#[no_mangle]
pub unsafe extern "C" fn cw_run_causality(
    scenario: *const CwScenario,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> CwStatus {
    guard(|| {
        run_suite_json(scenario, out_json, out_pass, |config| {
            let suite = run_causality_suite(config)?;
            let json = serde_json::to_string(&suite).map_err(|e| Error::Io(e.to_string()))?;
            Ok((json, suite.pass))
        })
    })
}

/// Run the scalar-curvature witness; same output contract as
/// [`cw_run_causality`].
///
/// # Safety
/// As [`cw_run_causality`].
#[no_mangle]
pub unsafe extern "C" fn cw_run_witness(
    scenario: *const CwScenario,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> CwStatus {
    guard(|| {
        run_suite_json(scenario, out_json, out_pass, |config| {
            let out = run_witness_suite(config)?;
            let json = serde_json::to_string(&out.report).map_err(|e| Error::Io(e.to_string()))?;
            Ok((json, out.report.pass))
        })
    })
}

/// Run the Dirichlet-to-Neumann comparison; same output contract as
/// [`cw_run_causality`].
///
/// # Safety
/// As [`cw_run_causality`].
#[no_mangle]
pub unsafe extern "C" fn cw_run_compare_dn(
    scenario: *const CwScenario,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> CwStatus {
    guard(|| {
        run_suite_json(scenario, out_json, out_pass, |config| {
            let suite = run_compare_suite(config, CompareMode::Dn)?;
            let json = serde_json::to_string(&suite).map_err(|e| Error::Io(e.to_string()))?;
            Ok((json, suite.pass))
        })
    })
}

/// Run the exterior source-to-solution comparison; same output contract as
/// [`cw_run_causality`].
///
/// # Safety
/// As [`cw_run_causality`].
#[no_mangle]
pub unsafe extern "C" fn cw_run_compare_sts(
    scenario: *const CwScenario,
    out_json: *mut *mut c_char,
    out_pass: *mut bool,
) -> CwStatus {
    guard(|| {
        run_suite_json(scenario, out_json, out_pass, |config| {
            let suite = run_compare_suite(config, CompareMode::Sts)?;
            let json = serde_json::to_string(&suite).map_err(|e| Error::Io(e.to_string()))?;
            Ok((json, suite.pass))
        })
    })
}

/// Scalar curvature of the scenario's base metric (`blended` = false) or
/// blended metric (`blended` = true) at a chart point.
///
/// # Safety
/// `coords` must point to `len` doubles; `out` must be valid. Only the
/// hyperboloid scenario carries a blend.
#[no_mangle]
pub unsafe extern "C" fn cw_scalar_curvature(
    scenario: *const CwScenario,
    blended: bool,
    coords: *const f64,
    len: usize,
    fd_step: f64,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        if scenario.is_null() || coords.is_null() || out.is_null() {
            return CwStatus::CwNullPointer;
        }
        let config = &(*scenario).config;
        let p = std::slice::from_raw_parts(coords, len);
        let result = (|| -> Result<f64, Error> {
            let sc = HyperboloidScenario::build(config)?;
            let metric = if blended { &sc.ambient_gp } else { &sc.ambient_g };
            metric.scalar_curvature(p, fd_step)
        })();
        match result {
            Ok(v) => {
                *out = v;
                CwStatus::CwOk
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Conformal time of the bounce cosmology; stateless helper.
#[no_mangle]
pub extern "C" fn cw_conformal_time(h_rate: f64, t: f64) -> f64 {
    cloakwave::spacetimes::conformal_time(h_rate, t)
}

/// Solve the implicit Kruskal radius relation. Returns a status; the radius
/// lands in `out`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cw_kruskal_r(
    t_coord: f64,
    r_coord: f64,
    r_s: f64,
    out: *mut f64,
) -> CwStatus {
    guard(|| {
        if out.is_null() {
            return CwStatus::CwNullPointer;
        }
        match cloakwave::spacetimes::kruskal_r(t_coord, r_coord, r_s) {
            Ok(r) => {
                *out = r;
                CwStatus::CwOk
            }
            Err(e) => {
                set_last_error(e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn cw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
