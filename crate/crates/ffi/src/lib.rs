//! C interface to qdlink.
//!
//! Every fallible call returns a [`QdStatus`]. On failure the message is kept per thread and
//! can be read with [`qd_last_error_message`]. Handles are opaque and released with their
//! matching `_free` function; strings returned by the library are released with
//! [`qd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qdlink::config::{parse_config_with, ExperimentConfig, Overrides, Preset};
use qdlink::linkbudget::{self, ScenarioParams};
use qdlink::model::{self, EmitterParams};
use qdlink::output::emit_outputs;
use qdlink::presets::{run_preset, ResultBundle};
use qdlink::units::ghz_to_rad_per_ps;
use qdlink::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Rejected configuration or parameter values.
    Config = 3,
    /// The run failed for a reason other than its inputs.
    Runtime = 4,
    Io = 5,
    NotFound = 6,
    Panic = 7,
}

/// Parsed experiment configuration.
pub struct QdConfig(ExperimentConfig);

/// Results of one preset run.
pub struct QdBundle(ResultBundle);

/// Emitter parameters without the label.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdEmitter {
    pub t1_ps: f64,
    pub t2_ps: f64,
    pub m_consecutive: f64,
    pub g2_zero: f64,
    pub wavelength_nm: f64,
    pub eta_sys: f64,
    pub rep_rate_hz: f64,
}

/// Link-budget scenario without the label.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdScenario {
    pub rep_rate_hz: f64,
    pub eta_sys: f64,
    pub eta_det: f64,
    pub eta_qfc: f64,
    pub loss_db_per_km: f64,
    pub dark_rate_hz: f64,
    pub coincidence_window_ps: f64,
    pub kappa_sys: f64,
}

impl From<&EmitterParams> for QdEmitter {
    fn from(e: &EmitterParams) -> Self {
        Self {
            t1_ps: e.t1_ps,
            t2_ps: e.t2_ps,
            m_consecutive: e.m_consecutive,
            g2_zero: e.g2_zero,
            wavelength_nm: e.wavelength_nm,
            eta_sys: e.eta_sys,
            rep_rate_hz: e.rep_rate_hz,
        }
    }
}

impl QdEmitter {
    fn to_params(self, label: &str) -> EmitterParams {
        EmitterParams {
            label: label.into(),
            t1_ps: self.t1_ps,
            t2_ps: self.t2_ps,
            m_consecutive: self.m_consecutive,
            g2_zero: self.g2_zero,
            wavelength_nm: self.wavelength_nm,
            eta_sys: self.eta_sys,
            rep_rate_hz: self.rep_rate_hz,
        }
    }
}

impl From<&ScenarioParams> for QdScenario {
    fn from(s: &ScenarioParams) -> Self {
        Self {
            rep_rate_hz: s.rep_rate_hz,
            eta_sys: s.eta_sys,
            eta_det: s.eta_det,
            eta_qfc: s.eta_qfc,
            loss_db_per_km: s.loss_db_per_km,
            dark_rate_hz: s.dark_rate_hz,
            coincidence_window_ps: s.coincidence_window_ps,
            kappa_sys: s.kappa_sys,
        }
    }
}

impl QdScenario {
    fn to_params(self) -> ScenarioParams {
        ScenarioParams {
            label: "ffi".into(),
            rep_rate_hz: self.rep_rate_hz,
            eta_sys: self.eta_sys,
            eta_det: self.eta_det,
            eta_qfc: self.eta_qfc,
            loss_db_per_km: self.loss_db_per_km,
            dark_rate_hz: self.dark_rate_hz,
            coincidence_window_ps: self.coincidence_window_ps,
            kappa_sys: self.kappa_sys,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(QdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => QdStatus::Io,
            e if e.is_config_error() => QdStatus::Config,
            _ => QdStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            QdStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            QdStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(QdStatus::NullArgument, format!("`{what}` is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(QdStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| Failure(QdStatus::Runtime, e.to_string()))
}

/// Message of the last failed call on this thread, or null after a success. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn qd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a TOML document. `preset` may be null when the document names its preset.
///
/// # Safety
/// `toml` and a non-null `preset` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_config_parse(
    toml: *const c_char,
    preset: *const c_char,
    out: *mut *mut QdConfig,
) -> QdStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let doc = text(toml, "toml")?;
        let preset = if preset.is_null() {
            None
        } else {
            Some(text(preset, "preset")?.parse::<Preset>()?)
        };
        let overrides = Overrides {
            preset,
            ..Default::default()
        };
        let cfg = parse_config_with(doc, &overrides)?;
        *out = Box::into_raw(Box::new(QdConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle from [`qd_config_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_config_free(cfg: *mut QdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// # Safety
/// `cfg` must be a live config handle.
#[no_mangle]
pub unsafe extern "C" fn qd_config_set_seed(cfg: *mut QdConfig, seed: u64) -> QdStatus {
    guard(|| {
        if seed > i64::MAX as u64 {
            return Err(Failure(
                QdStatus::Config,
                format!("master_seed {seed} exceeds {}", i64::MAX),
            ));
        }
        out_ptr(cfg, "cfg")?.0.master_seed = seed;
        Ok(())
    })
}

/// Effective configuration as TOML, to be released with [`qd_string_free`].
///
/// # Safety
/// `cfg` must be a live config handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_config_echo(cfg: *const QdConfig, out: *mut *mut c_char) -> QdStatus {
    guard(|| {
        let echo = borrow(cfg, "cfg")?.0.echo();
        *out_ptr(out, "out")? = into_c_string(echo)?;
        Ok(())
    })
}

/// Runs the configured preset on `workers` threads (0 picks one per core).
///
/// # Safety
/// `cfg` must be a live config handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_run_preset(
    cfg: *const QdConfig,
    workers: usize,
    out: *mut *mut QdBundle,
) -> QdStatus {
    guard(|| {
        let cfg = &borrow(cfg, "cfg")?.0;
        let out = out_ptr(out, "out")?;
        let workers = match workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        };
        let bundle = run_preset(cfg, workers)?;
        *out = Box::into_raw(Box::new(QdBundle(bundle)));
        Ok(())
    })
}

/// # Safety
/// `bundle` must be null or a handle from [`qd_run_preset`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_free(bundle: *mut QdBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Writes the bundle's files into `dir`, creating it if needed.
///
/// # Safety
/// `bundle` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_write(bundle: *const QdBundle, dir: *const c_char) -> QdStatus {
    guard(|| {
        let bundle = &borrow(bundle, "bundle")?.0;
        emit_outputs(bundle, Path::new(text(dir, "dir")?))?;
        Ok(())
    })
}

/// Summary records as a JSON array.
///
/// # Safety
/// `bundle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_summary_json(
    bundle: *const QdBundle,
    out: *mut *mut c_char,
) -> QdStatus {
    guard(|| {
        let bundle = &borrow(bundle, "bundle")?.0;
        let json = serde_json::to_string(&bundle.summary)
            .map_err(|e| Failure(QdStatus::Runtime, e.to_string()))?;
        *out_ptr(out, "out")? = into_c_string(json)?;
        Ok(())
    })
}

/// Looks up one summary value by name.
///
/// # Safety
/// `bundle` must be a live handle, `name` NUL-terminated, `value` and `stderr` writable.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_summary_value(
    bundle: *const QdBundle,
    name: *const c_char,
    value: *mut f64,
    stderr: *mut f64,
) -> QdStatus {
    guard(|| {
        let bundle = &borrow(bundle, "bundle")?.0;
        let name = text(name, "name")?;
        let (value, stderr) = (out_ptr(value, "value")?, out_ptr(stderr, "stderr")?);
        let r = bundle
            .summary
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Failure(QdStatus::NotFound, format!("no summary record `{name}`")))?;
        (*value, *stderr) = (r.value, r.stderr);
        Ok(())
    })
}

/// # Safety
/// `bundle` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_table_count(bundle: *const QdBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.0.tables.len())
}

/// Name and CSV text of table `index`; both strings are released with [`qd_string_free`].
///
/// # Safety
/// `bundle` must be a live handle; `name` and `csv` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_bundle_table(
    bundle: *const QdBundle,
    index: usize,
    name: *mut *mut c_char,
    csv: *mut *mut c_char,
) -> QdStatus {
    guard(|| {
        let bundle = &borrow(bundle, "bundle")?.0;
        let (name, csv) = (out_ptr(name, "name")?, out_ptr(csv, "csv")?);
        let t = bundle.tables.get(index).ok_or_else(|| {
            Failure(
                QdStatus::NotFound,
                format!("table {index} of {}", bundle.tables.len()),
            )
        })?;
        let n = into_c_string(t.name.clone())?;
        match into_c_string(t.csv.clone()) {
            Ok(c) => {
                (*name, *csv) = (n, c);
                Ok(())
            }
            Err(e) => {
                drop(CString::from_raw(n));
                Err(e)
            }
        }
    })
}

/// Default parameters of source 1 or 2.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_emitter_default(index: u32, out: *mut QdEmitter) -> QdStatus {
    guard(|| {
        let e = match index {
            1 => EmitterParams::qd1(),
            2 => EmitterParams::qd2(),
            _ => {
                return Err(Failure(
                    QdStatus::NotFound,
                    format!("no default emitter {index}"),
                ))
            }
        };
        *out_ptr(out, "out")? = QdEmitter::from(&e);
        Ok(())
    })
}

/// Two-photon interference visibility between independent sources detuned by `detuning_ghz`.
///
/// # Safety
/// `a` and `b` must point to valid emitters and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_remote_visibility(
    a: *const QdEmitter,
    b: *const QdEmitter,
    detuning_ghz: f64,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let a = borrow(a, "a")?.to_params("a");
        let b = borrow(b, "b")?.to_params("b");
        let out = out_ptr(out, "out")?;
        *out = model::remote_visibility(&a, &b, ghz_to_rad_per_ps(detuning_ghz))?;
        Ok(())
    })
}

/// `which` is 0 for the present-day link and 1 for the projected one, both calibrated.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_scenario_default(which: u32, out: *mut QdScenario) -> QdStatus {
    guard(|| {
        let (current, improved) = ScenarioParams::calibrated_pair()?;
        let s = match which {
            0 => current,
            1 => improved,
            _ => return Err(Failure(QdStatus::NotFound, format!("no scenario {which}"))),
        };
        *out_ptr(out, "out")? = QdScenario::from(&s);
        Ok(())
    })
}

/// Two-photon coincidence rate (Hz) over a link of `length_km` total fiber.
///
/// # Safety
/// `s` must point to a valid scenario and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_coincidence_rate(
    length_km: f64,
    s: *const QdScenario,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let s = borrow(s, "s")?.to_params();
        *out_ptr(out, "out")? = linkbudget::coincidence_rate(length_km, &s)?;
        Ok(())
    })
}

/// Signal-to-noise ratio in dB; infinite when there are no accidentals.
///
/// # Safety
/// `s` must point to a valid scenario and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_snr_db(
    length_km: f64,
    s: *const QdScenario,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        let s = borrow(s, "s")?.to_params();
        *out_ptr(out, "out")? = linkbudget::snr_db(length_km, &s)?.value();
        Ok(())
    })
}

/// Pump wavelength that converts `signal_nm` to `target_nm`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qd_solve_pump_wavelength(
    signal_nm: f64,
    target_nm: f64,
    out: *mut f64,
) -> QdStatus {
    guard(|| {
        *out_ptr(out, "out")? = qdlink::qfc::solve_pump_wavelength(signal_nm, target_nm)?;
        Ok(())
    })
}
