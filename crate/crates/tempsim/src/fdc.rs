//! Frequency-to-digital back end.
//!
//! A 5-bit reference counter watches the slow oscillator; its MSB raises DONE
//! after 16 slow cycles, which defines the sampling window. A 13-bit code
//! counter counts fast-oscillator rising edges inside that window and
//! saturates instead of wrapping. Conversion starts on a slow-oscillator
//! rising edge; the fast oscillator starts low and produces its first rising
//! edge one (phase-offset) period later, so a code latch coincident with DONE
//! still captures that edge.

use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::error::{Error, Result};
use crate::frontend::FrontEndState;

/// Counter sizing of the digital back end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FdcConfig {
    /// Reference counter width; MSB triggers DONE.
    pub ref_bits: u32,
    /// Code counter width.
    pub code_bits: u32,
    /// Slow cycles per window, 2^(ref_bits − 1).
    pub window_cycles: u32,
}

impl Default for FdcConfig {
    fn default() -> Self {
        FdcConfig {
            ref_bits: 5,
            code_bits: 13,
            window_cycles: 16,
        }
    }
}

impl FdcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ref_bits < 2 || self.code_bits < 1 {
            return Err(Error::Config("fdc: counter widths too small".into()));
        }
        if self.window_cycles != 1 << (self.ref_bits - 1) {
            return Err(Error::Config(format!(
                "fdc.window_cycles: must be 2^(ref_bits-1) = {}, got {}",
                1u32 << (self.ref_bits - 1),
                self.window_cycles
            )));
        }
        Ok(())
    }

    /// Saturation value of the code counter.
    pub fn max_code(&self) -> u32 {
        (1u32 << self.code_bits) - 1
    }
}

/// One temperature conversion.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConversionResult {
    /// Output code (LSB counts), saturated at the counter capacity.
    pub code: u32,
    /// Measured window, window_cycles slow periods (s).
    pub window: f64,
    /// START to DONE (s).
    pub t_conv: f64,
    /// Energy drawn over the conversion (J); filled in by the caller that
    /// knows the operating point.
    pub energy: f64,
    pub overflow: bool,
}

/// Event-driven conversion over explicit period sequences.
///
/// `phase` in [0, 1) offsets the fast oscillator's first period against
/// START. Counting is half-open on the START side and inclusive at DONE.
pub fn run_conversion<H, L>(
    mut hi_periods: H,
    mut lo_periods: L,
    phase: f64,
    cfg: &FdcConfig,
) -> Result<ConversionResult>
where
    H: Iterator<Item = f64>,
    L: Iterator<Item = f64>,
{
    if !(0.0..1.0).contains(&phase) {
        return Err(Error::Input(format!("phase must be in [0, 1), got {phase}")));
    }
    // DONE fires on the window_cycles-th slow rising edge after START.
    let mut done_at = 0.0;
    for i in 0..cfg.window_cycles {
        let p = lo_periods.next().ok_or_else(|| {
            Error::Input(format!(
                "slow period stream exhausted after {i} of {} cycles",
                cfg.window_cycles
            ))
        })?;
        if !(p > 0.0) {
            return Err(Error::Input(format!("non-positive slow period {p}")));
        }
        done_at += p;
    }

    let max_code = cfg.max_code();
    let mut code: u32 = 0;
    let mut overflow = false;
    let first = hi_periods
        .next()
        .ok_or_else(|| Error::Input("fast period stream exhausted at start".into()))?;
    if !(first > 0.0) {
        return Err(Error::Input(format!("non-positive fast period {first}")));
    }
    // First rising edge one full period after the phase offset.
    let mut t = phase * first + first;
    while t <= done_at {
        if code == max_code {
            overflow = true;
            break;
        }
        code += 1;
        let p = hi_periods
            .next()
            .ok_or_else(|| Error::Input("fast period stream exhausted inside window".into()))?;
        if !(p > 0.0) {
            return Err(Error::Input(format!("non-positive fast period {p}")));
        }
        t += p;
    }

    Ok(ConversionResult {
        code,
        window: done_at,
        t_conv: done_at,
        energy: 0.0,
        overflow,
    })
}

/// Noise-free fast path: floor(window_cycles·f_h/f_l).
pub fn code_closed_form(f_h: f64, f_l: f64, window_cycles: u32) -> Result<u64> {
    if !(f_l > 0.0) || !(f_h > f_l) {
        return Err(Error::Domain(format!(
            "code_closed_form needs f_h > f_l > 0, got f_h = {f_h}, f_l = {f_l}"
        )));
    }
    Ok((window_cycles as f64 * f_h / f_l).floor() as u64)
}

/// Run a conversion on one of several multiplexed front ends. Only the
/// selected front end's streams are instantiated and consumed; the others
/// keep their state.
pub fn mux_conversion<F, H, L>(
    frontends: &mut [F],
    select: usize,
    phase: f64,
    cfg: &FdcConfig,
) -> Result<ConversionResult>
where
    F: FnMut() -> (H, L),
    H: Iterator<Item = f64>,
    L: Iterator<Item = f64>,
{
    let n = frontends.len();
    let factory = frontends.get_mut(select).ok_or_else(|| {
        Error::Input(format!("mux select {select} out of range for {n} front ends"))
    })?;
    let (hi, lo) = factory();
    run_conversion(hi, lo, phase, cfg)
}

/// Supply energy for one conversion: front-end draw at the operating point
/// plus the fitted back-end term, integrated over the conversion time.
pub fn conversion_energy(cfg: &SensorConfig, state: &FrontEndState, t_conv: f64) -> Result<f64> {
    if !(t_conv > 0.0) {
        return Err(Error::Domain(format!(
            "conversion_energy needs t_conv > 0, got {t_conv}"
        )));
    }
    let power = state.v_dd * state.i_supply + cfg.backend.power(state.v_dd);
    Ok(power * t_conv)
}

/// Digital back-end power, affine in V_DD. Covers the counters, multiplexers
/// and level shifters that run from the external rail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendPower {
    pub intercept_w: f64,
    pub slope_w_per_v: f64,
}

impl BackendPower {
    pub fn power(&self, v_dd: f64) -> f64 {
        self.intercept_w + self.slope_w_per_v * v_dd
    }
}
