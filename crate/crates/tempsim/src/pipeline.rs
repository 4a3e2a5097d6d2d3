//! Composition of the front end, oscillators and digital back end into one
//! sensor evaluation, noiseless or with period jitter.

use crate::cfc::{frequencies, jittered_period_stream};
use crate::config::SensorConfig;
use crate::error::Result;
use crate::fdc::{code_closed_form, conversion_energy, run_conversion, ConversionResult};
use crate::frontend::{frontend_state, FrontEndState};
use crate::variation::derive_seed;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Noiseless evaluation of one grid point.
#[derive(Debug, Clone, Copy)]
pub struct PointEval {
    pub state: FrontEndState,
    pub f_h: f64,
    pub f_l: f64,
    pub code: u32,
    pub overflow: bool,
    /// One conversion window, window_cycles/f_l (s).
    pub t_conv: f64,
    /// Total supply power at the operating point (W).
    pub power: f64,
    /// Energy of one conversion (J).
    pub energy: f64,
}

/// Evaluate the full chain noiselessly at (v_dd, t_c) using the closed-form
/// code path.
pub fn evaluate_point(cfg: &SensorConfig, v_dd: f64, t_c: f64) -> Result<PointEval> {
    let state = frontend_state(cfg, v_dd, t_c)?;
    let (f_h, f_l) = frequencies(&cfg.osc, state.i_h, state.i_l)?;
    let raw = code_closed_form(f_h, f_l, cfg.fdc.window_cycles)?;
    let max_code = cfg.fdc.max_code() as u64;
    let (code, overflow) = if raw > max_code {
        (max_code as u32, true)
    } else {
        (raw as u32, false)
    };
    let t_conv = cfg.fdc.window_cycles as f64 / f_l;
    let power = v_dd * state.i_supply + cfg.backend.power(v_dd);
    Ok(PointEval {
        state,
        f_h,
        f_l,
        code,
        overflow,
        t_conv,
        power,
        energy: power * t_conv,
    })
}

/// One jittered conversion. The seed fully determines the phase draw and
/// both period streams.
pub fn noisy_conversion(
    cfg: &SensorConfig,
    v_dd: f64,
    t_c: f64,
    seed: u64,
) -> Result<ConversionResult> {
    let state = frontend_state(cfg, v_dd, t_c)?;
    let sigma = cfg.osc.jitter_rel_sigma;
    let phase = if sigma > 0.0 {
        ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0])).random::<f64>()
    } else {
        0.0
    };
    let hi = jittered_period_stream(&cfg.osc.fast, state.i_h, sigma, derive_seed(seed, &[1]))?;
    let lo = jittered_period_stream(&cfg.osc.slow, state.i_l, sigma, derive_seed(seed, &[2]))?;
    let mut result = run_conversion(hi, lo, phase, &cfg.fdc)?;
    result.energy = conversion_energy(cfg, &state, result.t_conv)?;
    Ok(result)
}

/// Noiseless codes at the two calibration temperatures for one supply.
pub fn calibration_codes(cfg: &SensorConfig, v_dd: f64, t_lo_c: f64, t_hi_c: f64) -> Result<(u32, u32)> {
    let lo = evaluate_point(cfg, v_dd, t_lo_c)?;
    let hi = evaluate_point(cfg, v_dd, t_hi_c)?;
    Ok((lo.code, hi.code))
}
