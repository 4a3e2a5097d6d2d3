//! Subthreshold transistor model and the exponential I(V,T) forms used by
//! the regulator and its load.
//!
//! Currents follow the weak-inversion exponential
//! `I = (W/L)·I0·exp(q(|Vgs| − |Vth|)/(n·kB·T))`, valid while the device
//! keeps at least four thermal voltages of drain-source headroom. The
//! regulator/load pair is described by fitted `alpha(T)·exp(±q·V/(beta(T)·kB·T))`
//! characteristics with `alpha` and `beta` stored as piecewise-linear tables
//! over temperature.

use serde::{Deserialize, Serialize};

use crate::constants::{kelvin_from_celsius, Q_OVER_KB};
use crate::error::{Error, Result};

/// Reference temperature (K) for the optional quadratic V_th tempco.
pub const VTH_TC_REF_KELVIN: f64 = 298.15;

/// Subthreshold PMOS/NMOS description. Voltages are magnitudes; polarity is
/// the caller's business.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    /// Aspect ratio W/L.
    pub w_over_l: f64,
    /// Technology subthreshold current extrapolated at V_GS = V_th (A).
    pub i0: f64,
    /// Threshold voltage magnitude (V) at the tempco reference temperature.
    pub vth: f64,
    /// Subthreshold factor.
    pub n: f64,
    /// Quadratic temperature coefficient of V_th (V), applied as
    /// `vth + vth_tc2·((T/298.15K)² − 1)`. Zero for nominal devices; process
    /// corners use it to bend the threshold over temperature.
    #[serde(default)]
    pub vth_tc2: f64,
}

impl DeviceParams {
    pub fn new(w_over_l: f64, i0: f64, vth: f64, n: f64) -> Result<Self> {
        let p = DeviceParams {
            w_over_l,
            i0,
            vth,
            n,
            vth_tc2: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_over_l > 0.0) {
            return Err(Error::Config(format!(
                "device.w_over_l: must be > 0, got {}",
                self.w_over_l
            )));
        }
        if !(self.i0 > 0.0) {
            return Err(Error::Config(format!(
                "device.i0: must be > 0, got {}",
                self.i0
            )));
        }
        if !(self.n >= 1.0) {
            return Err(Error::Config(format!(
                "device.n: subthreshold factor must be >= 1, got {}",
                self.n
            )));
        }
        if !(self.vth >= 0.0) {
            return Err(Error::Config(format!(
                "device.vth: magnitude must be >= 0, got {}",
                self.vth
            )));
        }
        Ok(())
    }

    /// Effective threshold magnitude at an absolute temperature.
    #[inline]
    pub fn vth_at(&self, t_kelvin: f64) -> f64 {
        let r = t_kelvin / VTH_TC_REF_KELVIN;
        self.vth + self.vth_tc2 * (r * r - 1.0)
    }
}

/// k_B·T/q (V).
pub fn thermal_voltage(t_kelvin: f64) -> Result<f64> {
    if !(t_kelvin > 0.0) {
        return Err(Error::Domain(format!(
            "thermal voltage needs T > 0 K, got {t_kelvin}"
        )));
    }
    Ok(t_kelvin / Q_OVER_KB)
}

/// A subthreshold current with its saturation-validity flag.
#[derive(Debug, Clone, Copy)]
pub struct CurrentEval {
    pub amps: f64,
    /// True when V_DS < 4·V_T, i.e. the weak-inversion saturation condition
    /// is violated. Advisory: ring-oscillator internal nodes cross this
    /// transiently by design.
    pub saturation_violated: bool,
}

/// Weak-inversion source current, `(W/L)·I0·exp(q(Vgs − Vth)/(n·kB·T))`.
pub fn subthreshold_current(
    p: &DeviceParams,
    v_gs_mag: f64,
    v_ds_mag: f64,
    t_kelvin: f64,
) -> Result<CurrentEval> {
    let vt = thermal_voltage(t_kelvin)?;
    let exponent = (v_gs_mag - p.vth_at(t_kelvin)) / (p.n * vt);
    Ok(CurrentEval {
        amps: p.w_over_l * p.i0 * exponent.exp(),
        saturation_violated: v_ds_mag < 4.0 * vt,
    })
}

/// Piecewise-linear table over temperature in Celsius. Queries outside the
/// knot range are a domain error; there is no extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlTable {
    temps_c: Vec<f64>,
    values: Vec<f64>,
}

impl PwlTable {
    pub fn new(temps_c: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if temps_c.len() != values.len() || temps_c.len() < 2 {
            return Err(Error::Config(format!(
                "pwl table needs matching knot/value lists with >= 2 entries, got {}/{}",
                temps_c.len(),
                values.len()
            )));
        }
        if !temps_c.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(
                "pwl table knots must be strictly increasing".into(),
            ));
        }
        Ok(PwlTable { temps_c, values })
    }

    /// Constant table over two knots.
    pub fn constant(t_lo_c: f64, t_hi_c: f64, value: f64) -> Result<Self> {
        PwlTable::new(vec![t_lo_c, t_hi_c], vec![value, value])
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.temps_c[0], *self.temps_c.last().unwrap())
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.temps_c.iter().copied().zip(self.values.iter().copied())
    }

    pub fn eval(&self, t_c: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(t_c >= lo && t_c <= hi) {
            return Err(Error::Domain(format!(
                "temperature {t_c} degC outside table domain [{lo}, {hi}] degC"
            )));
        }
        // Binary search for the enclosing segment.
        let idx = match self
            .temps_c
            .binary_search_by(|t| t.partial_cmp(&t_c).unwrap())
        {
            Ok(i) => return Ok(self.values[i]),
            Err(i) => i,
        };
        let (t0, t1) = (self.temps_c[idx - 1], self.temps_c[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        Ok(v0 + (v1 - v0) * (t_c - t0) / (t1 - t0))
    }

    /// New table with each knot value transformed by `f(temp_c, value)`.
    pub fn map_values(&self, mut f: impl FnMut(f64, f64) -> f64) -> PwlTable {
        PwlTable {
            temps_c: self.temps_c.clone(),
            values: self
                .temps_c
                .iter()
                .zip(&self.values)
                .map(|(&t, &v)| f(t, v))
                .collect(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Which side of the regulator load line a characteristic sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpIvSign {
    /// Current falls with the regulated rail: `alpha·exp(−qV/(beta·kB·T))`.
    Regulator,
    /// Current rises with the regulated rail: `alpha·exp(+qV/(beta·kB·T))`.
    Load,
}

/// Generic exponential I(V,T) with tabulated `alpha(T)` and `beta(T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpIvCoeffs {
    pub alpha: PwlTable,
    pub beta: PwlTable,
    pub sign: ExpIvSign,
}

impl ExpIvCoeffs {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.min_value() <= 0.0 {
            return Err(Error::Config("exp_iv.alpha: all knots must be > 0".into()));
        }
        if self.beta.min_value() <= 0.0 {
            return Err(Error::Config("exp_iv.beta: all knots must be > 0".into()));
        }
        if self.alpha.domain() != self.beta.domain() {
            return Err(Error::Config(
                "exp_iv: alpha and beta tables must share a domain".into(),
            ));
        }
        Ok(())
    }
}

/// Evaluate the exponential I(V,T) form at `v` volts and `t_c` Celsius.
pub fn exp_iv_current(c: &ExpIvCoeffs, v: f64, t_c: f64) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::Domain(format!("exp_iv needs v >= 0, got {v}")));
    }
    let alpha = c.alpha.eval(t_c)?;
    let beta = c.beta.eval(t_c)?;
    let t_k = kelvin_from_celsius(t_c);
    let exponent = Q_OVER_KB * v / (beta * t_k);
    Ok(match c.sign {
        ExpIvSign::Regulator => alpha * (-exponent).exp(),
        ExpIvSign::Load => alpha * exponent.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn device() -> DeviceParams {
        DeviceParams::new(1.0, 1e-9, 0.45, 1.3).unwrap()
    }

    #[test]
    fn thermal_voltage_constants() {
        // k_B·T/q evaluated directly from the SI constants.
        assert!((thermal_voltage(273.15).unwrap() - 0.0235382458).abs() < 1e-9);
        assert!((thermal_voltage(373.15).unwrap() - 0.0321555791).abs() < 1e-9);
        assert!(thermal_voltage(0.0).is_err());
        assert!(thermal_voltage(-1.0).is_err());
    }

    #[test]
    fn current_at_threshold_is_prefactor() {
        let p = device();
        let c = subthreshold_current(&p, p.vth, 0.2, 300.0).unwrap();
        assert!((c.amps - p.w_over_l * p.i0).abs() / p.i0 < 1e-15);
    }

    #[test]
    fn current_scales_linearly_in_sizing() {
        let p = device();
        let mut p2 = p.clone();
        p2.w_over_l *= 2.0;
        let a = subthreshold_current(&p, 0.3, 0.2, 300.0).unwrap().amps;
        let b = subthreshold_current(&p2, 0.3, 0.2, 300.0).unwrap().amps;
        assert!((b / a - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_bias_point() {
        // 1 nA device, 150 mV under threshold at 300 K.
        let p = device();
        let c = subthreshold_current(&p, 0.30, 0.2, 300.0).unwrap();
        let vt = thermal_voltage(300.0).unwrap();
        let expect = 1e-9 * (-0.15 / (1.3 * vt)).exp();
        assert!((c.amps - expect).abs() / expect < 1e-14);
        // about 0.0115 nA
        assert!((c.amps / 1e-9 - 0.0115).abs() < 2e-4);
    }

    #[test]
    fn saturation_flag_tracks_four_thermal_voltages() {
        let p = device();
        let vt = thermal_voltage(300.0).unwrap();
        assert!(
            subthreshold_current(&p, 0.3, 3.9 * vt, 300.0)
                .unwrap()
                .saturation_violated
        );
        assert!(
            !subthreshold_current(&p, 0.3, 4.1 * vt, 300.0)
                .unwrap()
                .saturation_violated
        );
    }

    #[test]
    fn log_current_is_affine_in_vgs() {
        let p = device();
        let t = 310.0;
        let slope = 1.0 / (p.n * thermal_voltage(t).unwrap());
        let i1 = subthreshold_current(&p, 0.20, 0.2, t).unwrap().amps;
        let i2 = subthreshold_current(&p, 0.35, 0.2, t).unwrap().amps;
        let measured = (i2.ln() - i1.ln()) / 0.15;
        assert!((measured - slope).abs() / slope < 1e-12);
    }

    #[test]
    fn pwl_interpolates_and_rejects_extrapolation() {
        let t = PwlTable::new(vec![0.0, 10.0, 20.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(t.eval(0.0).unwrap(), 1.0);
        assert_eq!(t.eval(5.0).unwrap(), 2.0);
        assert_eq!(t.eval(20.0).unwrap(), 2.0);
        assert!(t.eval(-0.1).is_err());
        assert!(t.eval(20.1).is_err());
    }

    fn coeffs(sign: ExpIvSign) -> ExpIvCoeffs {
        ExpIvCoeffs {
            alpha: PwlTable::constant(0.0, 100.0, 1e-6).unwrap(),
            beta: PwlTable::constant(0.0, 100.0, 3.0).unwrap(),
            sign,
        }
    }

    #[test]
    fn exp_iv_at_zero_volts_is_alpha() {
        for sign in [ExpIvSign::Regulator, ExpIvSign::Load] {
            let c = coeffs(sign);
            assert_eq!(exp_iv_current(&c, 0.0, 25.0).unwrap(), 1e-6);
        }
    }

    #[test]
    fn exp_iv_monotonicity() {
        let reg = coeffs(ExpIvSign::Regulator);
        let load = coeffs(ExpIvSign::Load);
        let mut prev_r = f64::INFINITY;
        let mut prev_l = 0.0;
        for i in 0..20 {
            let v = 0.05 * i as f64;
            let ir = exp_iv_current(&reg, v, 25.0).unwrap();
            let il = exp_iv_current(&load, v, 25.0).unwrap();
            assert!(ir < prev_r, "regulator current must fall with v");
            assert!(il > prev_l, "load current must rise with v");
            prev_r = ir;
            prev_l = il;
        }
    }

    #[test]
    fn exp_iv_domain_error_outside_table() {
        let c = coeffs(ExpIvSign::Load);
        assert!(exp_iv_current(&c, 0.1, -1.0).is_err());
        assert!(exp_iv_current(&c, 0.1, 100.5).is_err());
    }

    proptest! {
        // log(I) affine in Vgs, strictly increasing; exact linearity in i0.
        #[test]
        fn subthreshold_monotone_in_vgs(v1 in 0.0f64..0.4, dv in 1e-4f64..0.2) {
            let p = device();
            let a = subthreshold_current(&p, v1, 0.2, 300.0).unwrap().amps;
            let b = subthreshold_current(&p, v1 + dv, 0.2, 300.0).unwrap().amps;
            prop_assert!(b > a);
        }

        #[test]
        fn subthreshold_linear_in_i0(scale in 0.1f64..10.0) {
            let p = device();
            let mut q = p.clone();
            q.i0 *= scale;
            let a = subthreshold_current(&p, 0.3, 0.2, 320.0).unwrap().amps;
            let b = subthreshold_current(&q, 0.3, 0.2, 320.0).unwrap().amps;
            prop_assert!((b / a - scale).abs() / scale < 1e-14);
        }
    }
}
