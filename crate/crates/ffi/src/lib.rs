//! C ABI for tmsl.
//!
//! Every fallible call returns a `TmslStatus`. On failure the message is
//! available from `tmsl_last_error_message` until the next call on the same
//! thread. Strings returned through `out` pointers are owned by the caller
//! and released with `tmsl_string_free`; machines with `tmsl_machine_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tmsl::geometry::geometry_report;
use tmsl::inference::SynthesisProblem;
use tmsl::machine::{detect_a0, detect_a1, tm_run, MachineSpec};
use tmsl::oracle::weight_one_table;
use tmsl::propagate::SyndromeCounts;
use tmsl::utm::utm_run_cycles;
use tmsl::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    WindowOverflow = 4,
    Budget = 5,
    Resource = 6,
    Internal = 7,
}

/// Opaque machine handle.
pub struct TmslMachine {
    spec: MachineSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(TmslStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::WindowOverflow { .. } => TmslStatus::WindowOverflow,
            Error::Budget { .. } => TmslStatus::Budget,
            Error::ResourceGuard(_) => TmslStatus::Resource,
            Error::Io(_) => TmslStatus::Internal,
            _ => TmslStatus::InvalidInput,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, recording any failure or panic.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> TmslStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmslStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            TmslStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(TmslStatus::NullPointer, "null pointer argument".into())
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(TmslStatus::InvalidUtf8, e.to_string()))
}

unsafe fn machine_arg<'a>(m: *const TmslMachine) -> Result<&'a MachineSpec, Failure> {
    m.as_ref().map(|m| &m.spec).ok_or_else(null)
}

fn out_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|e| Failure(TmslStatus::Internal, e.to_string()))?;
    // SAFETY: checked non-null by the caller of this helper.
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Problem from JSON, or the detect-A problem when `json` is null.
unsafe fn problem_arg(json: *const c_char, spec: &MachineSpec) -> Result<SynthesisProblem, Failure> {
    if json.is_null() {
        Ok(SynthesisProblem::detect_a(spec, tmsl::inference::DEFAULT_MU)?)
    } else {
        Ok(SynthesisProblem::from_json(str_arg(json)?, spec)?)
    }
}

/// Parses a machine spec. On success `*out` holds a new handle.
///
/// # Safety
/// `json` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tmsl_machine_from_json(json: *const c_char, out: *mut *mut TmslMachine) -> TmslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = MachineSpec::from_json(str_arg(json)?)?;
        *out = Box::into_raw(Box::new(TmslMachine { spec }));
        Ok(())
    })
}

/// Built-in detect-A machine, `variant` 0 or 1.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tmsl_machine_detect_a(variant: u32, out: *mut *mut TmslMachine) -> TmslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let spec = match variant {
            0 => detect_a0(),
            1 => detect_a1(),
            v => return Err(Failure(TmslStatus::InvalidInput, format!("unknown detect-A variant {v}"))),
        };
        *out = Box::into_raw(Box::new(TmslMachine { spec }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tmsl_machine_free(m: *mut TmslMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Canonical JSON of a machine.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tmsl_machine_to_json(m: *const TmslMachine, out: *mut *mut c_char) -> TmslStatus {
    guard(|| {
        let spec = machine_arg(m)?;
        if out.is_null() {
            return Err(null());
        }
        out_string(out, spec.to_json())
    })
}

/// Index of the state `name`, for comparing run results.
///
/// # Safety
/// `m` must be a live handle, `name` a C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tmsl_machine_state_index(
    m: *const TmslMachine,
    name: *const c_char,
    out: *mut u32,
) -> TmslStatus {
    guard(|| {
        let spec = machine_arg(m)?;
        let name = str_arg(name)?;
        if out.is_null() {
            return Err(null());
        }
        let i = spec
            .state_index(name)
            .ok_or_else(|| Failure(TmslStatus::InvalidInput, format!("unknown state {name:?}")))?;
        *out = i as u32;
        Ok(())
    })
}

type Runner = fn(&[usize], &MachineSpec, usize) -> tmsl::Result<usize>;

unsafe fn run_with(f: Runner, m: *const TmslMachine, input: *const c_char, t: usize, out: *mut u32) -> TmslStatus {
    guard(|| {
        let spec = machine_arg(m)?;
        let x = spec.parse_input(str_arg(input)?)?;
        if out.is_null() {
            return Err(null());
        }
        *out = f(&x, spec, t)? as u32;
        Ok(())
    })
}

/// Final state index after `t` steps of the machine on `input`.
///
/// # Safety
/// `m` must be a live handle, `input` a C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tmsl_tm_run(
    m: *const TmslMachine,
    input: *const c_char,
    t: usize,
    out: *mut u32,
) -> TmslStatus {
    run_with(tm_run, m, input, t, out)
}

/// Simulated state after `t` cycles of the staged UTM.
///
/// # Safety
/// As for `tmsl_tm_run`.
#[no_mangle]
pub unsafe extern "C" fn tmsl_utm_run_cycles(
    m: *const TmslMachine,
    input: *const c_char,
    t: usize,
    out: *mut u32,
) -> TmslStatus {
    run_with(utm_run_cycles, m, input, t, out)
}

/// Geometry report as JSON. `problem_json` may be null for the detect-A
/// problem; its inputs, distribution and timeout are used.
///
/// # Safety
/// `m` must be a live handle, `problem_json` null or a C string, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn tmsl_geometry_report_json(
    m: *const TmslMachine,
    problem_json: *const c_char,
    k_max: usize,
    out: *mut *mut c_char,
) -> TmslStatus {
    guard(|| {
        let spec = machine_arg(m)?;
        if out.is_null() {
            return Err(null());
        }
        let problem = problem_arg(problem_json, spec)?;
        let counts = SyndromeCounts::compute(spec, &problem.inputs, problem.t, k_max)?;
        let report = geometry_report(spec, "machine", &counts, &problem.q)?;
        out_string(out, serde_json::to_string(&report).map_err(|e| Failure(TmslStatus::Internal, e.to_string()))?)
    })
}

/// Weight-one syndrome table for the 1-based `coordinate`, as CSV.
///
/// # Safety
/// As for `tmsl_geometry_report_json`.
#[no_mangle]
pub unsafe extern "C" fn tmsl_weight_one_table_csv(
    m: *const TmslMachine,
    problem_json: *const c_char,
    coordinate: usize,
    out: *mut *mut c_char,
) -> TmslStatus {
    guard(|| {
        let spec = machine_arg(m)?;
        if out.is_null() {
            return Err(null());
        }
        let problem = problem_arg(problem_json, spec)?;
        if coordinate == 0 {
            return Err(Error::InvalidCoordinate(0, tmsl::noisy::LocalChart::new(spec).dim()).into());
        }
        let table = weight_one_table(spec, coordinate - 1, &problem.inputs)?;
        out_string(out, table.to_csv(spec))
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tmsl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failure on this thread, empty after a success.
/// Valid until the next tmsl call on the same thread.
#[no_mangle]
pub extern "C" fn tmsl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
