//! C ABI over the `inferfl` pipeline.
//!
//! Every fallible call returns an [`InferflStatus`]. On failure a message is
//! kept per thread and can be read with [`inferfl_last_error_message`].
//! Strings handed out by this library must be released with
//! [`inferfl_string_free`]; handles with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inferfl::driver::{localize, trace_program, PipelineConfig, TraceArtifacts};
use inferfl::evaluation::Technique;
use inferfl::minilang::{parse, StaticPdg};
use inferfl::spectrum::{SliceSpectrum, SpectrumMode, TestCase};
use inferfl::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferflStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Malformed program, tests, spectrum, PDG or configuration value.
    InputError = 3,
    /// Valid input the pipeline cannot work on, such as no failing test.
    PreconditionFailed = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InferflSpectrumMode {
    Coverage = 0,
    Slice = 1,
}

impl From<InferflSpectrumMode> for SpectrumMode {
    fn from(m: InferflSpectrumMode) -> Self {
        match m {
            InferflSpectrumMode::Coverage => SpectrumMode::Coverage,
            InferflSpectrumMode::Slice => SpectrumMode::Slice,
        }
    }
}

/// Result of executing a program on a suite: both spectra and the static PDG.
pub struct InferflTrace(TraceArtifacts);

/// Pipeline parameters, starting from the defaults.
pub struct InferflConfig(PipelineConfig);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(InferflStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            3 => InferflStatus::PreconditionFailed,
            _ => InferflStatus::InputError,
        };
        Failure(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InferflStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InferflStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            InferflStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(
            InferflStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            InferflStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(InferflStatus::NullPointer, format!("{what} is null")))
}

fn hand_out(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("nul bytes removed")
        .into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn inferfl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn inferfl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `program_src`, runs it on the JSON test array `tests_json` and
/// stores a new trace handle in `*out`.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inferfl_trace_new(
    program_src: *const c_char,
    tests_json: *const c_char,
    out: *mut *mut InferflTrace,
) -> InferflStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let program = parse(text(program_src, "program_src")?)?;
        let tests: Vec<TestCase> = serde_json::from_str(text(tests_json, "tests_json")?)
            .map_err(|e| Failure(InferflStatus::InputError, format!("tests json: {e}")))?;
        let t = trace_program(&program, &tests)?;
        *out = Box::into_raw(Box::new(InferflTrace(t)));
        Ok(())
    })
}

/// # Safety
/// `trace` must be null or a handle from [`inferfl_trace_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn inferfl_trace_free(trace: *mut InferflTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of failing tests in the trace, or -1 for a null handle.
///
/// # Safety
/// `trace` must be null or a live trace handle.
#[no_mangle]
pub unsafe extern "C" fn inferfl_trace_failing(trace: *const InferflTrace) -> i64 {
    trace.as_ref().map_or(-1, |t| t.0.failing() as i64)
}

/// Writes the spectrum of the given mode as JSON into `*out`.
///
/// # Safety
/// `trace` must be a live trace handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inferfl_trace_spectrum_json(
    trace: *const InferflTrace,
    mode: InferflSpectrumMode,
    out: *mut *mut c_char,
) -> InferflStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = trace
            .as_ref()
            .ok_or_else(|| Failure(InferflStatus::NullPointer, "trace is null".into()))?;
        *out = hand_out(t.0.spectrum(mode.into()).to_json());
        Ok(())
    })
}

/// Writes the static PDG as JSON into `*out`.
///
/// # Safety
/// `trace` must be a live trace handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inferfl_trace_pdg_json(
    trace: *const InferflTrace,
    out: *mut *mut c_char,
) -> InferflStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let t = trace
            .as_ref()
            .ok_or_else(|| Failure(InferflStatus::NullPointer, "trace is null".into()))?;
        *out = hand_out(t.0.pdg.to_json());
        Ok(())
    })
}

/// New configuration holding the default parameters.
#[no_mangle]
pub extern "C" fn inferfl_config_new() -> *mut InferflConfig {
    Box::into_raw(Box::new(InferflConfig(PipelineConfig::default())))
}

/// # Safety
/// `config` must be null or a handle from [`inferfl_config_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn inferfl_config_free(config: *mut InferflConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Sets one parameter by its CLI flag name without dashes: `phi`,
/// `delta-fraction`, `chain-cap`, `matching`, `ridge` or `caliper`.
/// The resulting configuration is validated; on error it is left unchanged.
///
/// # Safety
/// `config` must be a live handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn inferfl_config_set(
    config: *mut InferflConfig,
    key: *const c_char,
    value: *const c_char,
) -> InferflStatus {
    guard(|| {
        let cfg = out_ptr(config, "config")?;
        let key = text(key, "key")?;
        let value = text(value, "value")?;
        let bad = |e: String| Failure(InferflStatus::InputError, format!("{key}: {e}"));
        let mut next = cfg.0.clone();
        match key {
            "phi" => next.phi = value.parse().map_err(|e: Error| bad(e.to_string()))?,
            "delta-fraction" => {
                next.delta_fraction = value.parse().map_err(|e| bad(format!("{e}")))?
            }
            "chain-cap" => next.chain_cap = value.parse().map_err(|e| bad(format!("{e}")))?,
            "matching" => next.matching = value.parse().map_err(|e: Error| bad(e.to_string()))?,
            "ridge" => next.ridge = value.parse().map_err(|e| bad(format!("{e}")))?,
            "caliper" => next.caliper = value.parse().map_err(|e| bad(format!("{e}")))?,
            _ => {
                return Err(Failure(
                    InferflStatus::InputError,
                    format!("unknown parameter `{key}`"),
                ))
            }
        }
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// Localizes from JSON inputs and writes the JSON report into `*out`.
/// `effect_spectrum_json` may be null to reuse `spectrum_json`; `config`
/// may be null for defaults. `technique` is one of `inference`, `ochiai`,
/// `o`, `gp19`, `dstar`.
///
/// # Safety
/// Non-null pointers must be valid NUL-terminated strings or live handles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inferfl_localize_json(
    spectrum_json: *const c_char,
    effect_spectrum_json: *const c_char,
    pdg_json: *const c_char,
    config: *const InferflConfig,
    technique: *const c_char,
    out: *mut *mut c_char,
) -> InferflStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let spectrum = SliceSpectrum::from_json(text(spectrum_json, "spectrum_json")?)?;
        let effect = if effect_spectrum_json.is_null() {
            None
        } else {
            Some(SliceSpectrum::from_json(text(
                effect_spectrum_json,
                "effect_spectrum_json",
            )?)?)
        };
        let pdg = StaticPdg::from_json(text(pdg_json, "pdg_json")?)?;
        let technique: Technique = text(technique, "technique")?.parse()?;
        let default = PipelineConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.0);
        let report = localize(&spectrum, effect.as_ref(), &pdg, None, technique, cfg)?;
        *out = hand_out(report.to_json());
        Ok(())
    })
}

/// Localizes directly from a trace, selecting on `selection_mode` and
/// estimating effects on `effect_mode`.
///
/// # Safety
/// `trace` must be a live handle, `config` null or live, `technique` a
/// NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inferfl_localize_trace(
    trace: *const InferflTrace,
    config: *const InferflConfig,
    technique: *const c_char,
    selection_mode: InferflSpectrumMode,
    effect_mode: InferflSpectrumMode,
    out: *mut *mut c_char,
) -> InferflStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let t = trace
            .as_ref()
            .ok_or_else(|| Failure(InferflStatus::NullPointer, "trace is null".into()))?;
        let technique: Technique = text(technique, "technique")?.parse()?;
        let default = PipelineConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.0);
        let report = localize(
            t.0.spectrum(selection_mode.into()),
            Some(t.0.spectrum(effect_mode.into())),
            &t.0.pdg,
            None,
            technique,
            cfg,
        )?;
        *out = hand_out(report.to_json());
        Ok(())
    })
}
