//! C ABI for the temperature-sensor simulator.
//!
//! Configurations are opaque handles created by `tempsim_config_canonical`
//! or `tempsim_config_from_toml_file` and released with
//! `tempsim_config_free`. All evaluation calls are thread-safe for shared
//! (read-only) handles. Every function returns a `TsStatus`; out-parameters
//! are written only on `TS_STATUS_OK`.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tempsim::error::Error;
use tempsim::fdc::code_closed_form;
use tempsim::frontend::frontend_state;
use tempsim::metrology::noise_resolution;
use tempsim::pipeline::{evaluate_point, noisy_conversion};
use tempsim::variation::{apply_corner, apply_die, sample_die, Corner, CornerName, VariationSpec};
use tempsim::SensorConfig;

/// Call outcome. Non-zero values are errors; see `tempsim_status_message`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DomainError = 3,
    ConfigError = 4,
    IoError = 5,
    Panic = 6,
}

fn status_of(err: &Error) -> TsStatus {
    match err {
        Error::Domain(_) | Error::Calibration(_) => TsStatus::DomainError,
        Error::Config(_) => TsStatus::ConfigError,
        Error::Input(_) => TsStatus::InvalidArgument,
        Error::Io(_) => TsStatus::IoError,
    }
}

/// Opaque sensor configuration handle.
pub struct TsConfig(SensorConfig);

/// Front-end operating point.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TsFrontEnd {
    pub v_vdd_v: f64,
    pub i_h_a: f64,
    pub i_l_a: f64,
    pub i_supply_a: f64,
}

/// One temperature conversion.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TsConversion {
    pub code: u32,
    /// 1 when the code counter saturated.
    pub overflow: u8,
    pub window_s: f64,
    pub t_conv_s: f64,
    pub energy_j: f64,
    pub f_h_hz: f64,
    pub f_l_hz: f64,
}

/// Repeated-reading noise measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TsNoise {
    pub sigma_c: f64,
    pub sigma_lsb: f64,
    pub mean_code: f64,
}

fn guarded<F: FnOnce() -> TsStatus>(f: F) -> TsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => TsStatus::Panic,
    }
}

/// The canonical fitted configuration. Free with `tempsim_config_free`.
#[no_mangle]
pub extern "C" fn tempsim_config_canonical() -> *mut TsConfig {
    match catch_unwind(|| SensorConfig::canonical().clone()) {
        Ok(cfg) => Box::into_raw(Box::new(TsConfig(cfg))),
        Err(_) => ptr::null_mut(),
    }
}

/// Load a sensor configuration from a TOML file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_config_from_toml_file(
    path: *const c_char,
    out: *mut *mut TsConfig,
) -> TsStatus {
    if path.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| {
        let Ok(path) = unsafe { CStr::from_ptr(path) }.to_str() else {
            return TsStatus::InvalidArgument;
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(_) => return TsStatus::IoError,
        };
        match SensorConfig::from_toml_str(&text) {
            Ok(cfg) => {
                unsafe { *out = Box::into_raw(Box::new(TsConfig(cfg))) };
                TsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Duplicate a configuration handle.
///
/// # Safety
/// `cfg` must be a live handle from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_config_clone(
    cfg: *const TsConfig,
    out: *mut *mut TsConfig,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| {
        let copy = unsafe { &*cfg }.0.clone();
        unsafe { *out = Box::into_raw(Box::new(TsConfig(copy))) };
        TsStatus::Ok
    })
}

/// Release a configuration handle. Accepts NULL.
///
/// # Safety
/// `cfg` must be NULL or a handle produced by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tempsim_config_free(cfg: *mut TsConfig) {
    if !cfg.is_null() {
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Hex SHA-256 of the configuration. `buf` needs at least 65 bytes.
///
/// # Safety
/// `cfg` must be a live handle; `buf` must point to `buf_len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tempsim_config_hash(
    cfg: *const TsConfig,
    buf: *mut c_char,
    buf_len: usize,
) -> TsStatus {
    if cfg.is_null() || buf.is_null() {
        return TsStatus::NullPointer;
    }
    if buf_len < 65 {
        return TsStatus::InvalidArgument;
    }
    guarded(|| {
        let hash = unsafe { &*cfg }.0.config_hash();
        let c = CString::new(hash).expect("hex has no NUL");
        let bytes = c.as_bytes_with_nul();
        unsafe { ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len()) };
        TsStatus::Ok
    })
}

/// Front-end operating point at (v_dd, temp).
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_frontend_eval(
    cfg: *const TsConfig,
    vdd_v: f64,
    temp_c: f64,
    out: *mut TsFrontEnd,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| match frontend_state(&unsafe { &*cfg }.0, vdd_v, temp_c) {
        Ok(s) => {
            unsafe {
                *out = TsFrontEnd {
                    v_vdd_v: s.v_vdd,
                    i_h_a: s.i_h,
                    i_l_a: s.i_l,
                    i_supply_a: s.i_supply,
                };
            }
            TsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Noiseless conversion (closed-form code path).
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_convert(
    cfg: *const TsConfig,
    vdd_v: f64,
    temp_c: f64,
    out: *mut TsConversion,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| match evaluate_point(&unsafe { &*cfg }.0, vdd_v, temp_c) {
        Ok(p) => {
            unsafe {
                *out = TsConversion {
                    code: p.code,
                    overflow: p.overflow as u8,
                    window_s: p.t_conv,
                    t_conv_s: p.t_conv,
                    energy_j: p.energy,
                    f_h_hz: p.f_h,
                    f_l_hz: p.f_l,
                };
            }
            TsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// One jittered conversion; the seed fully determines the outcome.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_convert_noisy(
    cfg: *const TsConfig,
    vdd_v: f64,
    temp_c: f64,
    seed: u64,
    out: *mut TsConversion,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| {
        let config = &unsafe { &*cfg }.0;
        let freqs = match evaluate_point(config, vdd_v, temp_c) {
            Ok(p) => (p.f_h, p.f_l),
            Err(e) => return status_of(&e),
        };
        match noisy_conversion(config, vdd_v, temp_c, seed) {
            Ok(c) => {
                unsafe {
                    *out = TsConversion {
                        code: c.code,
                        overflow: c.overflow as u8,
                        window_s: c.window,
                        t_conv_s: c.t_conv,
                        energy_j: c.energy,
                        f_h_hz: freqs.0,
                        f_l_hz: freqs.1,
                    };
                }
                TsStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Noise-limited resolution from repeated jittered conversions.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_noise_resolution(
    cfg: *const TsConfig,
    temp_c: f64,
    vdd_v: f64,
    repeats: u32,
    seed: u64,
    out: *mut TsNoise,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(
        || match noise_resolution(&unsafe { &*cfg }.0, temp_c, vdd_v, repeats, seed) {
            Ok(r) => {
                unsafe {
                    *out = TsNoise {
                        sigma_c: r.sigma_c,
                        sigma_lsb: r.sigma_lsb,
                        mean_code: r.mean_code,
                    };
                }
                TsStatus::Ok
            }
            Err(e) => status_of(&e),
        },
    )
}

/// floor(window_cycles · f_h / f_l).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_code_closed_form(
    f_h_hz: f64,
    f_l_hz: f64,
    window_cycles: u32,
    out: *mut u64,
) -> TsStatus {
    if out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| match code_closed_form(f_h_hz, f_l_hz, window_cycles) {
        Ok(code) => {
            unsafe { *out = code };
            TsStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Shift a configuration to a named process corner
/// ("TT", "FF", "SS", "FS", "SF"), producing a new handle.
///
/// # Safety
/// `cfg` must be a live handle; `corner` a NUL-terminated string; `out`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_apply_corner(
    cfg: *const TsConfig,
    corner: *const c_char,
    out: *mut *mut TsConfig,
) -> TsStatus {
    if cfg.is_null() || corner.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    guarded(|| {
        let Ok(name) = unsafe { CStr::from_ptr(corner) }.to_str() else {
            return TsStatus::InvalidArgument;
        };
        let Ok(name) = name.parse::<CornerName>() else {
            return TsStatus::InvalidArgument;
        };
        let shifted = apply_corner(&unsafe { &*cfg }.0, &Corner::nominal(name));
        unsafe { *out = Box::into_raw(Box::new(TsConfig(shifted))) };
        TsStatus::Ok
    })
}

/// Draw one Monte Carlo die (Gaussian mismatch with the given sigmas) and
/// apply it, producing a new handle. Deterministic per seed.
///
/// # Safety
/// `cfg` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tempsim_apply_die(
    cfg: *const TsConfig,
    sigma_vth: f64,
    sigma_i0: f64,
    sigma_cap: f64,
    seed: u64,
    out: *mut *mut TsConfig,
) -> TsStatus {
    if cfg.is_null() || out.is_null() {
        return TsStatus::NullPointer;
    }
    if sigma_vth < 0.0 || sigma_i0 < 0.0 || sigma_cap < 0.0 {
        return TsStatus::InvalidArgument;
    }
    guarded(|| {
        let base = &unsafe { &*cfg }.0;
        let spec = VariationSpec {
            sigma_vth,
            sigma_i0,
            sigma_cap,
        };
        let die = sample_die(&spec, base.osc.jitter_rel_sigma, seed);
        unsafe { *out = Box::into_raw(Box::new(TsConfig(apply_die(base, &die)))) };
        TsStatus::Ok
    })
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tempsim_status_message(status: TsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        TsStatus::Ok => b"ok\0",
        TsStatus::NullPointer => b"null pointer argument\0",
        TsStatus::InvalidArgument => b"invalid argument\0",
        TsStatus::DomainError => b"model domain error\0",
        TsStatus::ConfigError => b"configuration error\0",
        TsStatus::IoError => b"i/o error\0",
        TsStatus::Panic => b"internal panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tempsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
