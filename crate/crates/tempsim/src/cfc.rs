//! Current-to-frequency conversion: current-starved ring oscillators.
//!
//! Period model: `T_osc = N·(C_L·ΔV/I_bias + t_edge)` with `t_edge` the lumped
//! per-stage rise+fall time. The canonical configuration uses t_edge = 0 and
//! folds the output swing into the fitted C_L·ΔV product.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One ring oscillator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscParams {
    /// Stage count; odd and >= 3 for oscillation.
    pub n_stages: u32,
    /// Load capacitance per delay cell (F).
    pub c_load: f64,
    /// Output swing (V).
    pub delta_v: f64,
    /// Lumped per-stage rise+fall time (s).
    pub t_edge: f64,
}

impl OscParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_stages < 3 || self.n_stages % 2 == 0 {
            return Err(Error::Config(format!(
                "osc.n_stages: must be odd and >= 3, got {}",
                self.n_stages
            )));
        }
        if !(self.c_load > 0.0) {
            return Err(Error::Config("osc.c_load: must be > 0".into()));
        }
        if !(self.delta_v > 0.0) {
            return Err(Error::Config("osc.delta_v: must be > 0".into()));
        }
        if self.t_edge < 0.0 {
            return Err(Error::Config("osc.t_edge: must be >= 0".into()));
        }
        Ok(())
    }
}

/// The slow/fast oscillator pair plus the per-period jitter magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscPair {
    /// 13-stage oscillator biased by I_L.
    pub slow: OscParams,
    /// 7-stage oscillator biased by I_H.
    pub fast: OscParams,
    /// Relative per-period jitter standard deviation.
    pub jitter_rel_sigma: f64,
}

impl OscPair {
    pub fn validate(&self) -> Result<()> {
        self.slow.validate()?;
        self.fast.validate()?;
        if self.jitter_rel_sigma < 0.0 {
            return Err(Error::Config("osc.jitter_rel_sigma: must be >= 0".into()));
        }
        if self.jitter_rel_sigma * 5.0 >= 1.0 {
            return Err(Error::Config(
                "osc.jitter_rel_sigma: 5 sigma must stay below 1 to keep periods positive".into(),
            ));
        }
        Ok(())
    }
}

/// Oscillation period for a bias current (s).
pub fn osc_period(p: &OscParams, i_bias: f64) -> Result<f64> {
    if !(i_bias > 0.0) {
        return Err(Error::Domain(format!(
            "osc_period needs i_bias > 0, got {i_bias}"
        )));
    }
    Ok(p.n_stages as f64 * (p.c_load * p.delta_v / i_bias + p.t_edge))
}

/// (f_H, f_L) from the fast/slow oscillators driven by (I_H, I_L).
///
/// A pair with f_H <= f_L cannot feed the frequency-to-digital counters and is
/// rejected as a configuration error.
pub fn frequencies(pair: &OscPair, i_h: f64, i_l: f64) -> Result<(f64, f64)> {
    let f_h = 1.0 / osc_period(&pair.fast, i_h)?;
    let f_l = 1.0 / osc_period(&pair.slow, i_l)?;
    if f_h <= f_l {
        return Err(Error::Config(format!(
            "oscillator pair produced f_h = {f_h} <= f_l = {f_l}; counter sizing requires f_h > f_l"
        )));
    }
    Ok((f_h, f_l))
}

/// Infinite stream of jittered oscillator periods.
///
/// Each period is `nominal·(1 + g)` with `g ~ Normal(0, sigma_rel)` re-drawn
/// until it lands within ±5 sigma, so periods stay positive. The stream is
/// fully determined by its seed.
#[derive(Debug, Clone)]
pub struct JitterStream {
    nominal: f64,
    sigma_rel: f64,
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl JitterStream {
    pub fn new(nominal_period: f64, sigma_rel: f64, seed: u64) -> Result<Self> {
        if !(nominal_period > 0.0) {
            return Err(Error::Domain(format!(
                "jitter stream needs a positive nominal period, got {nominal_period}"
            )));
        }
        if sigma_rel < 0.0 || sigma_rel * 5.0 >= 1.0 {
            return Err(Error::Config(format!(
                "jitter sigma_rel {sigma_rel} outside [0, 0.2)"
            )));
        }
        let normal = if sigma_rel > 0.0 {
            Some(Normal::new(0.0, sigma_rel).expect("validated sigma"))
        } else {
            None
        };
        Ok(JitterStream {
            nominal: nominal_period,
            sigma_rel,
            rng: ChaCha8Rng::seed_from_u64(seed),
            normal,
        })
    }
}

impl Iterator for JitterStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let Some(normal) = &self.normal else {
            return Some(self.nominal);
        };
        let bound = 5.0 * self.sigma_rel;
        let g = loop {
            let g = normal.sample(&mut self.rng);
            if g.abs() <= bound {
                break g;
            }
        };
        Some(self.nominal * (1.0 + g))
    }
}

/// Stream of jittered periods for an oscillator at a bias current.
pub fn jittered_period_stream(
    p: &OscParams,
    i_bias: f64,
    sigma_rel: f64,
    seed: u64,
) -> Result<JitterStream> {
    JitterStream::new(osc_period(p, i_bias)?, sigma_rel, seed)
}
