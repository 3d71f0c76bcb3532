//! C ABI for the crowdflow walkway simulator.
//!
//! The interface follows the usual opaque-handle pattern: load a scenario
//! file into a `CfScenario`, instantiate a `CfSimulation` from it, step or
//! run it, and read bulk state or the per-element density back out. Every
//! fallible call returns a [`CfStatus`]; the message for the most recent
//! failure on the calling thread is available from
//! [`cf_last_error_message`]. Handles must be released with the matching
//! `*_free` function exactly once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use crowdflow::scenario::{Scenario, ScenarioConfig};
use crowdflow::sim::Simulation;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidConfig = 3,
    Io = 4,
    /// Numerical failure (CFL violation, non-finite density, solver).
    Numeric = 5,
    /// Output buffer too small.
    BufferTooSmall = 6,
    /// A panic was caught at the boundary.
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &crowdflow::Error) -> CfStatus {
    use crowdflow::Error::*;
    match err {
        InvalidConfig { .. } => CfStatus::InvalidConfig,
        Io(_) => CfStatus::Io,
        MeshFormat { .. } => CfStatus::InvalidConfig,
        CflViolation { .. } | NonFiniteDensity { .. } | Solve(_) => CfStatus::Numeric,
        Geometry(_) | Mesh(_) => CfStatus::Numeric,
    }
}

/// Scenario handle (opaque).
pub struct CfScenario {
    inner: Scenario,
}

/// Simulation handle (opaque).
pub struct CfSimulation {
    inner: Simulation,
    length_m: f64,
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, CfStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(CfStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        CfStatus::InvalidUtf8
    })
}

fn guard<F: FnOnce() -> CfStatus>(f: F) -> CfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the FFI boundary");
            CfStatus::Panic
        }
    }
}

/// Load and validate a scenario TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_scenario_load_file(
    path: *const c_char,
    out: *mut *mut CfScenario,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return CfStatus::NullArgument;
        }
        let path = match cstr_arg(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        match ScenarioConfig::from_path(path).and_then(|cfg| cfg.resolve()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CfScenario { inner }));
                CfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Parse and validate a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_scenario_parse(
    text: *const c_char,
    out: *mut *mut CfScenario,
) -> CfStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return CfStatus::NullArgument;
        }
        let text = match cstr_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::from_toml_str(text).and_then(|cfg| cfg.resolve()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CfScenario { inner }));
                CfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a scenario handle.
///
/// # Safety
/// `scenario` must come from a `cf_scenario_*` constructor and not have
/// been freed already; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cf_scenario_free(scenario: *mut CfScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Build the mesh and fields and create a simulation at t = 0.
///
/// # Safety
/// `scenario` must be a live scenario handle; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_create(
    scenario: *const CfScenario,
    out: *mut *mut CfSimulation,
) -> CfStatus {
    guard(|| {
        if scenario.is_null() || out.is_null() {
            set_error("null pointer argument");
            return CfStatus::NullArgument;
        }
        let sc = &(*scenario).inner;
        match sc.build() {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(CfSimulation {
                    inner,
                    length_m: sc.length_m,
                }));
                CfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Release a simulation handle.
///
/// # Safety
/// `sim` must come from `cf_simulation_create` and not have been freed
/// already; NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_free(sim: *mut CfSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Advance one step; writes the step size into `dt_out` when non-NULL.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_step(sim: *mut CfSimulation, dt_out: *mut f64) -> CfStatus {
    guard(|| {
        if sim.is_null() {
            set_error("null simulation handle");
            return CfStatus::NullArgument;
        }
        match (*sim).inner.step() {
            Ok(dt) => {
                if !dt_out.is_null() {
                    *dt_out = dt;
                }
                CfStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Run until `t_end` (in crossing-time units), stopping early once the
/// crowd has fully drained.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_advance(sim: *mut CfSimulation, t_end: f64) -> CfStatus {
    guard(|| {
        if sim.is_null() {
            set_error("null simulation handle");
            return CfStatus::NullArgument;
        }
        match (*sim).inner.run_until(t_end, |_, _| {}) {
            Ok(()) => CfStatus::Ok,
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Current time in crossing-time units.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_time(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.t
}

/// Number of mesh elements.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_element_count(sim: *const CfSimulation) -> usize {
    if sim.is_null() {
        return 0;
    }
    (*sim).inner.mesh.element_count()
}

/// Pedestrians currently on the walkway.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_walkway_count(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.rho.domain_mass(&(*sim).inner.mesh)
}

/// Pedestrians that have walked out (cumulative egress).
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_egressed_count(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.egress
}

/// Pedestrians still waiting in the reservoir (0 without an entrance).
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_reservoir_count(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.entrance.as_ref().map_or(0.0, |e| e.reservoir)
}

/// Pedestrians inside the entering region.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_buffer_count(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.rho.buffer_mass(&(*sim).inner.mesh)
}

/// Scaled egress time, or +inf if the crowd has not fully left yet.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_egress_time(sim: *const CfSimulation) -> f64 {
    if sim.is_null() {
        return f64::NAN;
    }
    (*sim).inner.metrics.egress_time().unwrap_or(f64::INFINITY)
}

/// Copy the per-element dimensional pedestrian density (ped/m^2) into
/// `buf`. `len` must be at least the element count.
///
/// # Safety
/// `sim` must be a live simulation handle and `buf` writable for `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_density(
    sim: *const CfSimulation,
    buf: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| {
        if sim.is_null() || buf.is_null() {
            set_error("null pointer argument");
            return CfStatus::NullArgument;
        }
        let sim = &*sim;
        let values = &sim.inner.rho.values;
        if len < values.len() {
            set_error("density buffer too small");
            return CfStatus::BufferTooSmall;
        }
        let inv_l2 = 1.0 / (sim.length_m * sim.length_m);
        let out = std::slice::from_raw_parts_mut(buf, values.len());
        for (o, v) in out.iter_mut().zip(values) {
            *o = v * inv_l2;
        }
        CfStatus::Ok
    })
}

/// Copy the element centroids as interleaved (x, y) pairs in scaled units.
/// `len` must be at least twice the element count.
///
/// # Safety
/// `sim` must be a live simulation handle and `buf` writable for `len`
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn cf_simulation_centroids(
    sim: *const CfSimulation,
    buf: *mut f64,
    len: usize,
) -> CfStatus {
    guard(|| {
        if sim.is_null() || buf.is_null() {
            set_error("null pointer argument");
            return CfStatus::NullArgument;
        }
        let centroids = &(*sim).inner.mesh.centroids;
        if len < 2 * centroids.len() {
            set_error("centroid buffer too small");
            return CfStatus::BufferTooSmall;
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * centroids.len());
        for (i, c) in centroids.iter().enumerate() {
            out[2 * i] = c.x;
            out[2 * i + 1] = c.y;
        }
        CfStatus::Ok
    })
}

/// One-shot pipeline: load a scenario, run it to its configured end, write
/// all artifacts into `out_dir` (same layout as the CLI `run` command).
///
/// # Safety
/// `config_path` and `out_dir` must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn cf_run_scenario(
    config_path: *const c_char,
    out_dir: *const c_char,
) -> CfStatus {
    guard(|| {
        let config_path = match cstr_arg(config_path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let out_dir = match cstr_arg(out_dir) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let result = (|| -> crowdflow::Result<()> {
            let sc = ScenarioConfig::from_path(config_path)?.resolve()?;
            std::fs::create_dir_all(out_dir)?;
            let dir = std::path::Path::new(out_dir);
            let mut sim = sc.build()?;
            crowdflow::output::write_mesh_info(&sim.mesh, dir.join("mesh_info.txt"))?;
            crowdflow::output::write_field_csv(&sim, dir.join("field.csv"))?;
            sim.run_until(sc.t_end, |_, _| {})?;
            crowdflow::output::write_metrics_csv(&sim.metrics, dir.join("metrics.csv"))?;
            if sim.entrance.is_some() {
                crowdflow::output::write_entrance_csv(&sim.metrics, dir.join("entrance.csv"))?;
            }
            crowdflow::output::write_profile_csv(&sim, sc.length_m, dir.join("profile_mid.csv"))?;
            crowdflow::output::write_summary(&sim, dir.join("summary.txt"))?;
            Ok(())
        })();
        match result {
            Ok(()) => CfStatus::Ok,
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
