//! Sensor front end: the temperature-to-current converter and the
//! native-device voltage regulator that feeds it.
//!
//! The TCC is two stacks of diode-connected PMOS devices under the regulated
//! rail: three in the I_H branch (V_SG = V_VDD/3, large mirror device M1) and
//! two in the I_L branch (V_SG = V_VDD/2, unit device M2). The regulated rail
//! itself is the crossing of the regulator and load I(V,T) exponentials.

use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::constants::{kelvin_from_celsius, Q_OVER_KB};
use crate::device::{
    exp_iv_current, subthreshold_current, DeviceParams, ExpIvCoeffs, ExpIvSign,
};
use crate::error::{Error, Result};
use crate::stats::{linear_fit, LinearFit};

/// Bisection stops when the bracket is narrower than this (V). Well below the
/// 1e-9 V agreement contract against the closed form.
const BISECTION_WIDTH_V: f64 = 1e-12;
const BISECTION_MAX_ITER: u32 = 200;

/// Relative tolerance when checking that M1 and M2 share i0/vth/n, and the
/// absolute V_th window (V) left open for die mismatch.
const SHARED_PARAM_REL_TOL: f64 = 0.25;
const SHARED_VTH_ABS_TOL: f64 = 0.08;

/// The two TCC mirror devices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TccParams {
    /// Mirror device of the 3-transistor branch (V_SG = V_VDD/3), generates I_H.
    pub m1: DeviceParams,
    /// Mirror device of the 2-transistor branch (V_SG = V_VDD/2), generates I_L.
    pub m2: DeviceParams,
}

impl TccParams {
    pub fn validate(&self) -> Result<()> {
        self.m1.validate()?;
        self.m2.validate()?;
        if self.m1.w_over_l / self.m2.w_over_l <= 1.0 {
            return Err(Error::Config(format!(
                "tcc: m1.w_over_l/m2.w_over_l must exceed 1 so that i_h > i_l, got {}",
                self.m1.w_over_l / self.m2.w_over_l
            )));
        }
        if self.m1.n != self.m2.n {
            return Err(Error::Config(
                "tcc: m1 and m2 must share the subthreshold factor n".into(),
            ));
        }
        let i0_rel = (self.m1.i0 - self.m2.i0).abs() / self.m2.i0;
        if i0_rel > SHARED_PARAM_REL_TOL {
            return Err(Error::Config(format!(
                "tcc: m1/m2 i0 differ by {:.1}%, beyond the mismatch window",
                i0_rel * 100.0
            )));
        }
        if (self.m1.vth - self.m2.vth).abs() > SHARED_VTH_ABS_TOL {
            return Err(Error::Config(
                "tcc: m1/m2 threshold voltages differ beyond the mismatch window".into(),
            ));
        }
        Ok(())
    }
}

/// Regulator and aggregate-load exponentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegulatorParams {
    /// Stacked native devices between V_DD and the regulated rail.
    pub reg: ExpIvCoeffs,
    /// Aggregate TCC + CFC draw seen by the regulator.
    pub load: ExpIvCoeffs,
}

impl RegulatorParams {
    pub fn validate(&self) -> Result<()> {
        self.reg.validate()?;
        self.load.validate()?;
        if self.reg.sign != ExpIvSign::Regulator {
            return Err(Error::Config("regulator.reg: sign must be regulator".into()));
        }
        if self.load.sign != ExpIvSign::Load {
            return Err(Error::Config("regulator.load: sign must be load".into()));
        }
        Ok(())
    }

    /// Temperature domain shared by the tables (Celsius).
    pub fn domain(&self) -> (f64, f64) {
        self.reg.alpha.domain()
    }
}

/// Front-end operating point at one (V_DD, temperature).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrontEndState {
    pub v_vdd: f64,
    pub i_h: f64,
    pub i_l: f64,
    pub i_supply: f64,
    pub temp_c: f64,
    pub v_dd: f64,
}

/// Degenerate outcomes of the operating-point solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VvddFlag {
    /// The curves cross at 0 V; the rail is unusable.
    ZeroRail,
    /// No crossing below V_DD; the regulator has no headroom.
    HeadroomViolation,
}

#[derive(Debug, Clone, Copy)]
pub struct VvddSolution {
    pub v_vdd: f64,
    pub flag: Option<VvddFlag>,
}

/// Locate the regulated rail: the unique v in (0, v_dd) where the regulator
/// and load currents cross, by bisection on the log-current difference.
pub fn solve_vvdd(rp: &RegulatorParams, v_dd: f64, t_c: f64) -> Result<VvddSolution> {
    if !(v_dd > 0.0) {
        return Err(Error::Domain(format!("solve_vvdd needs v_dd > 0, got {v_dd}")));
    }
    let log_diff = |v: f64| -> Result<f64> {
        let ir = exp_iv_current(&rp.reg, v, t_c)?;
        let il = exp_iv_current(&rp.load, v, t_c)?;
        Ok(ir.ln() - il.ln())
    };
    // The difference is strictly decreasing in v, so the bracket holds at most
    // one sign change.
    let f_lo = log_diff(0.0)?;
    if f_lo <= 0.0 {
        return Ok(VvddSolution {
            v_vdd: 0.0,
            flag: Some(VvddFlag::ZeroRail),
        });
    }
    let f_hi = log_diff(v_dd)?;
    if f_hi >= 0.0 {
        return Ok(VvddSolution {
            v_vdd: v_dd,
            flag: Some(VvddFlag::HeadroomViolation),
        });
    }
    let (mut lo, mut hi) = (0.0, v_dd);
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if log_diff(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < BISECTION_WIDTH_V {
            break;
        }
    }
    Ok(VvddSolution {
        v_vdd: 0.5 * (lo + hi),
        flag: None,
    })
}

/// Closed-form regulated rail:
/// `beta_eq(T)·(kB·T/q)·ln(alpha_R(T)/alpha_L(T))` with
/// `beta_eq = beta_L·beta_R/(beta_L + beta_R)`.
pub fn vvdd_closed_form(rp: &RegulatorParams, t_c: f64) -> Result<f64> {
    let alpha_r = rp.reg.alpha.eval(t_c)?;
    let alpha_l = rp.load.alpha.eval(t_c)?;
    let beta_r = rp.reg.beta.eval(t_c)?;
    let beta_l = rp.load.beta.eval(t_c)?;
    let beta_eq = beta_l * beta_r / (beta_l + beta_r);
    let t_k = kelvin_from_celsius(t_c);
    Ok(beta_eq * t_k / Q_OVER_KB * (alpha_r / alpha_l).ln())
}

/// Branch currents with the saturation flag of either device.
#[derive(Debug, Clone, Copy)]
pub struct TccCurrents {
    pub i_h: f64,
    pub i_l: f64,
    pub saturation_violated: bool,
}

/// I_H and I_L for a regulated rail voltage. The diode-connected devices see
/// V_SD = V_SG, so the drain headroom check uses the same branch voltage.
pub fn tcc_currents(tp: &TccParams, v_vdd: f64, t_c: f64) -> Result<TccCurrents> {
    if !(v_vdd > 0.0) {
        return Err(Error::Domain(format!(
            "tcc_currents needs v_vdd > 0, got {v_vdd}"
        )));
    }
    let t_k = kelvin_from_celsius(t_c);
    let hi = subthreshold_current(&tp.m1, v_vdd / 3.0, v_vdd / 3.0, t_k)?;
    let lo = subthreshold_current(&tp.m2, v_vdd / 2.0, v_vdd / 2.0, t_k)?;
    Ok(TccCurrents {
        i_h: hi.amps,
        i_l: lo.amps,
        saturation_violated: hi.saturation_violated || lo.saturation_violated,
    })
}

/// The closed-form current ratio
/// `([W/L]1/[W/L]2)·exp(−q·v_vdd/(6·n·kB·T))`, using the shared n of the pair.
pub fn current_ratio_model(tp: &TccParams, v_vdd: f64, t_c: f64) -> f64 {
    let t_k = kelvin_from_celsius(t_c);
    let sizing = tp.m1.w_over_l / tp.m2.w_over_l;
    sizing * (-Q_OVER_KB * v_vdd / (6.0 * tp.m1.n * t_k)).exp()
}

/// Least-squares line through (temperature, ratio) samples.
pub fn fit_linear_ratio(samples: &[(f64, f64)]) -> Result<LinearFit> {
    linear_fit(samples)
}

/// Full front-end operating point: regulated rail (with the optional headroom
/// term), branch currents and supply draw.
pub fn frontend_state(cfg: &SensorConfig, v_dd: f64, t_c: f64) -> Result<FrontEndState> {
    let sol = solve_vvdd(&cfg.regulator, v_dd, t_c)?;
    match sol.flag {
        Some(VvddFlag::ZeroRail) => {
            return Err(Error::Domain("regulated rail collapsed to 0 V".into()))
        }
        Some(VvddFlag::HeadroomViolation) => {
            return Err(Error::Domain(format!(
                "no regulator/load crossing below v_dd = {v_dd} V"
            )))
        }
        None => {}
    }
    let v_vdd = sol.v_vdd + cfg.headroom_coeff * (v_dd - cfg.headroom_vref);
    let tcc = tcc_currents(&cfg.tcc, v_vdd, t_c)?;
    if tcc.i_h <= tcc.i_l {
        return Err(Error::Config(format!(
            "tcc produced i_h = {} <= i_l = {}; sizing ratio violates the PTAT invariant",
            tcc.i_h, tcc.i_l
        )));
    }
    let i_supply = exp_iv_current(&cfg.regulator.load, v_vdd, t_c)?;
    Ok(FrontEndState {
        v_vdd,
        i_h: tcc.i_h,
        i_l: tcc.i_l,
        i_supply,
        temp_c: t_c,
        v_dd,
    })
}
