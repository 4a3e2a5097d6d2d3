//! Parameter fitting: derive the canonical sensor configuration from the
//! anchor set, plus the jitter, corner and headroom calibrations.
//!
//! The anchor set pins the oscillator frequency endpoints, the regulated
//! rail at 25 degC and its drift, the supply-current endpoints, the supply
//! power at the two extreme rails and one plausible branch-current value.
//! With those fixed, the chain below is exactly determined and solved in
//! closed form; the residuals against every anchor are reported by
//! [`verify_anchors`] and are zero to rounding.
//!
//! Chain: the target code-vs-temperature curve is the straight line through
//! the frequency-ratio endpoints plus a small edge nonlinearity; inverting
//! the current-ratio exponential along that curve fixes (sizing ratio, n)
//! from the rail anchors, then the threshold from the fast-oscillator
//! temperature ratio, then I0 and the C·dV products from the absolute
//! anchors; the regulator and load tables are constructed so their crossing
//! reproduces the rail and the supply-current targets at every knot.

use serde::{Deserialize, Serialize};

use crate::cfc::{OscPair, OscParams};
use crate::config::SensorConfig;
use crate::constants::{kelvin_from_celsius, Q_OVER_KB};
use crate::device::{DeviceParams, ExpIvCoeffs, ExpIvSign, PwlTable};
use crate::error::{Error, Result};
use crate::fdc::{BackendPower, FdcConfig};
use crate::frontend::{RegulatorParams, TccParams};
use crate::metrology::{noise_resolution, two_point_calibrate};
use crate::pipeline::{calibration_codes, evaluate_point};
use crate::stats::mean;
use crate::variation::{apply_corner, Corner, CornerName, derive_seed};

/// Calibrated per-period jitter sigma of the canonical configuration.
/// Reproduced by [`calibrate_jitter_sigma`]; held constant over T and V_DD.
pub const CANONICAL_JITTER_SIGMA: f64 = 1.7299e-3;

/// Fitting anchors. Frequencies and supply currents at the range endpoints,
/// the regulated rail at 25 degC, the two power anchors at 25 degC, and the
/// nonlinearity flare of the code characteristic at the range edges.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnchorSet {
    pub f_l_at_0c_hz: f64,
    pub f_l_at_100c_hz: f64,
    pub f_h_at_0c_hz: f64,
    pub f_h_at_100c_hz: f64,
    /// Regulated rail at 25 degC (V).
    pub vvdd_at_25c: f64,
    /// v_vdd(100 degC) / v_vdd(0 degC).
    pub vvdd_drift_ratio: f64,
    /// I_H at 0 degC (A); sets the absolute current scale.
    pub i_h_at_0c: f64,
    pub i_supply_at_0c: f64,
    pub i_supply_at_100c: f64,
    /// Total power at 25 degC for the two extreme rails (W).
    pub power_at_0v6_25c: f64,
    pub power_at_1v8_25c: f64,
    /// Oscillator output swing folded into the C·dV products (V).
    pub delta_v: f64,
    /// Slope factor of the stacked native regulator devices.
    pub beta_r: f64,
    /// Calibrated-error flare at the range edges: values at 0 / 2.5 / 5 degC
    /// from the edge (mirrored at the top end), in degC.
    pub edge_flare_c: [f64; 3],
    pub jitter_rel_sigma: f64,
}

impl Default for AnchorSet {
    fn default() -> Self {
        AnchorSet {
            f_l_at_0c_hz: 17e3,
            f_l_at_100c_hz: 31.8e3,
            f_h_at_0c_hz: 4.3e6,
            f_h_at_100c_hz: 9.6e6,
            vvdd_at_25c: 0.440,
            vvdd_drift_ratio: 1.0297,
            i_h_at_0c: 0.25e-6,
            i_supply_at_0c: 0.6e-6,
            i_supply_at_100c: 4.1e-6,
            power_at_0v6_25c: 1.47e-6,
            power_at_1v8_25c: 5.61e-6,
            delta_v: 0.44,
            beta_r: 3.2,
            edge_flare_c: [1.18, 0.42, 0.11],
            jitter_rel_sigma: CANONICAL_JITTER_SIGMA,
        }
    }
}

/// Table knots: every 5 degC over [0, 100] plus refinement points at
/// 2.5 / 97.5 degC where the edge flare lives.
fn table_knots() -> Vec<f64> {
    let mut knots: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
    knots.push(2.5);
    knots.push(97.5);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots
}

/// Derive the canonical configuration from the anchors.
pub fn fit_canonical(anchors: &AnchorSet) -> Result<SensorConfig> {
    let a = anchors;
    if !(a.f_h_at_0c_hz > a.f_l_at_0c_hz && a.f_h_at_100c_hz > a.f_l_at_100c_hz) {
        return Err(Error::Config("anchors: f_h must exceed f_l".into()));
    }

    // Target code characteristic: straight line through the anchored
    // frequency-ratio endpoints, plus the edge flare.
    let window = FdcConfig::default().window_cycles as f64;
    let code_0 = window * a.f_h_at_0c_hz / a.f_l_at_0c_hz;
    let code_100 = window * a.f_h_at_100c_hz / a.f_l_at_100c_hz;
    let slope = (code_100 - code_0) / 100.0;
    let intercept = code_0 - slope * a.edge_flare_c[0];
    let flare = |t_c: f64| -> f64 {
        // knot-resolved flare: nonzero only at the first/last three knots
        let d = t_c.min(100.0 - t_c);
        if d == 0.0 {
            a.edge_flare_c[0]
        } else if d == 2.5 {
            a.edge_flare_c[1]
        } else if d == 5.0 {
            a.edge_flare_c[2]
        } else {
            0.0
        }
    };
    let code_target = |t_c: f64| intercept + slope * (t_c + flare(t_c));
    // I_H/I_L target: the frequency ratio scaled by the stage/capacitance
    // constant (13/7 with equal C·dV products).
    let ir_target = |t_c: f64| code_target(t_c) / window * (7.0 / 13.0);

    // (ln sizing-ratio, n) from the rail anchors.
    let t0k = kelvin_from_celsius(0.0);
    let t25k = kelvin_from_celsius(25.0);
    let t100k = kelvin_from_celsius(100.0);
    let l0 = ir_target(0.0).ln();
    let l25 = ir_target(25.0).ln();
    let l100 = ir_target(100.0).ln();
    let c = a.vvdd_drift_ratio * t0k / t100k;
    let g = (l100 - c * l0) / (1.0 - c);
    let sizing_ratio = g.exp();
    let n = a.vvdd_at_25c / ((6.0 * t25k / Q_OVER_KB) * (g - l25));
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::Config(format!(
            "anchors produce an invalid subthreshold factor n = {n}"
        )));
    }

    // Regulated-rail set points at each knot.
    let knots = table_knots();
    let u_of = |t_c: f64| -> f64 {
        (6.0 * n * kelvin_from_celsius(t_c) / Q_OVER_KB) * (g - ir_target(t_c).ln())
    };
    let u_0 = u_of(0.0);
    let u_100 = u_of(100.0);

    // Threshold from the fast-branch temperature ratio, then the absolute
    // current scale.
    let inv_t0 = 1.0 / t0k;
    let inv_t100 = 1.0 / t100k;
    let ln_rh = (a.f_h_at_100c_hz / a.f_h_at_0c_hz).ln();
    let vth = (ln_rh * n / Q_OVER_KB - (u_100 * inv_t100 - u_0 * inv_t0) / 3.0)
        / (inv_t0 - inv_t100);
    let i0 = a.i_h_at_0c
        / (sizing_ratio * ((u_0 / 3.0 - vth) * Q_OVER_KB / (n * t0k)).exp());
    // Same delay cell in both rings: one C·dV product.
    let k_product = a.i_h_at_0c / (7.0 * a.f_h_at_0c_hz);
    let c_load = k_product / a.delta_v;

    // Regulator/load tables: both curves pass through (u(T), i_supply(T)) at
    // every knot, so the crossing reproduces the rail and the supply current.
    let beta_l = 3.0 * n;
    let i_supply = |t_c: f64| -> f64 {
        a.i_supply_at_0c * (a.i_supply_at_100c / a.i_supply_at_0c).powf(t_c / 100.0)
    };
    let mut alpha_l_vals = Vec::with_capacity(knots.len());
    let mut alpha_r_vals = Vec::with_capacity(knots.len());
    for &t_c in &knots {
        let t_k = kelvin_from_celsius(t_c);
        let u = u_of(t_c);
        let isup = i_supply(t_c);
        alpha_l_vals.push(isup * (-u * Q_OVER_KB / (beta_l * t_k)).exp());
        alpha_r_vals.push(isup * (u * Q_OVER_KB / (a.beta_r * t_k)).exp());
    }
    let regulator = RegulatorParams {
        reg: ExpIvCoeffs {
            alpha: PwlTable::new(knots.clone(), alpha_r_vals)?,
            beta: PwlTable::new(knots.clone(), vec![a.beta_r; knots.len()])?,
            sign: ExpIvSign::Regulator,
        },
        load: ExpIvCoeffs {
            alpha: PwlTable::new(knots.clone(), alpha_l_vals)?,
            beta: PwlTable::new(knots.clone(), vec![beta_l; knots.len()])?,
            sign: ExpIvSign::Load,
        },
    };

    let tcc = TccParams {
        m1: DeviceParams::new(sizing_ratio, i0, vth, n)?,
        m2: DeviceParams::new(1.0, i0, vth, n)?,
    };
    let osc = OscPair {
        slow: OscParams {
            n_stages: 13,
            c_load,
            delta_v: a.delta_v,
            t_edge: 0.0,
        },
        fast: OscParams {
            n_stages: 7,
            c_load,
            delta_v: a.delta_v,
            t_edge: 0.0,
        },
        jitter_rel_sigma: a.jitter_rel_sigma,
    };

    let mut cfg = SensorConfig {
        tcc,
        regulator,
        osc,
        fdc: FdcConfig::default(),
        backend: BackendPower {
            intercept_w: 0.0,
            slope_w_per_v: 0.0,
        },
        headroom_coeff: 0.0,
        headroom_vref: 0.9,
    };
    cfg.validate()?;

    // Back-end power from the two power anchors, after the realized supply
    // current at 25 degC is known.
    let i25 = evaluate_point(&cfg, 0.6, 25.0)?.state.i_supply;
    let p_be_06 = a.power_at_0v6_25c - 0.6 * i25;
    let p_be_18 = a.power_at_1v8_25c - 1.8 * i25;
    let slope_w_per_v = (p_be_18 - p_be_06) / 1.2;
    cfg.backend = BackendPower {
        intercept_w: p_be_06 - 0.6 * slope_w_per_v,
        slope_w_per_v,
    };
    Ok(cfg)
}

/// One anchor residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnchorResidual {
    pub name: String,
    pub target: f64,
    pub achieved: f64,
    pub rel_err: f64,
}

/// Residual report of a configuration against the anchor set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub residuals: Vec<AnchorResidual>,
    pub worst_rel_err: f64,
}

pub fn verify_anchors(cfg: &SensorConfig, anchors: &AnchorSet) -> Result<FitReport> {
    let p0 = evaluate_point(cfg, 0.6, 0.0)?;
    let p25 = evaluate_point(cfg, 0.6, 25.0)?;
    let p100 = evaluate_point(cfg, 0.6, 100.0)?;
    let p25_18 = evaluate_point(cfg, 1.8, 25.0)?;
    let mut residuals = Vec::new();
    let mut push = |name: &str, target: f64, achieved: f64| {
        residuals.push(AnchorResidual {
            name: name.to_string(),
            target,
            achieved,
            rel_err: (achieved - target).abs() / target.abs().max(f64::MIN_POSITIVE),
        });
    };
    push("f_l(0C)", anchors.f_l_at_0c_hz, p0.f_l);
    push("f_l(100C)", anchors.f_l_at_100c_hz, p100.f_l);
    push("f_h(0C)", anchors.f_h_at_0c_hz, p0.f_h);
    push("f_h(100C)", anchors.f_h_at_100c_hz, p100.f_h);
    push("v_vdd(25C)", anchors.vvdd_at_25c, p25.state.v_vdd);
    push(
        "v_vdd drift",
        anchors.vvdd_drift_ratio,
        p100.state.v_vdd / p0.state.v_vdd,
    );
    push("i_supply(0C)", anchors.i_supply_at_0c, p0.state.i_supply);
    push(
        "i_supply(100C)",
        anchors.i_supply_at_100c,
        p100.state.i_supply,
    );
    push("power(0.6V,25C)", anchors.power_at_0v6_25c, p25.power);
    push("power(1.8V,25C)", anchors.power_at_1v8_25c, p25_18.power);
    let worst = residuals
        .iter()
        .map(|r| r.rel_err)
        .fold(0.0, f64::max);
    Ok(FitReport {
        residuals,
        worst_rel_err: worst,
    })
}

/// Calibrate the per-period jitter sigma so the code standard deviation over
/// `repeats` conversions at 25 degC / 0.6 V lands on `target_lsb`.
///
/// The sigma estimate is averaged over several seeds to suppress sampling
/// noise; a secant iteration then solves for the target. Deterministic.
pub fn calibrate_jitter_sigma(cfg: &SensorConfig, target_lsb: f64, repeats: u32) -> Result<f64> {
    let seeds: Vec<u64> = (0..8).map(|i| derive_seed(0x6A17_7E5C, &[i])).collect();
    let measure = |sigma: f64| -> Result<f64> {
        let mut trial = cfg.clone();
        trial.osc.jitter_rel_sigma = sigma;
        let mut sigmas = Vec::with_capacity(seeds.len());
        for &s in &seeds {
            sigmas.push(noise_resolution(&trial, 25.0, 0.6, repeats, s)?.sigma_lsb);
        }
        Ok(mean(&sigmas))
    };
    // Analytic start: the window variance term dominates,
    // sigma_code ~ sigma_rel·sqrt(w·rho² + w·rho).
    let p25 = evaluate_point(cfg, 0.6, 25.0)?;
    let rho = p25.f_h / p25.f_l;
    let w = cfg.fdc.window_cycles as f64;
    let mut x0 = target_lsb / (w * rho * rho + w * rho).sqrt();
    let mut y0 = measure(x0)?;
    let mut x1 = x0 * target_lsb / y0;
    for _ in 0..8 {
        let y1 = measure(x1)?;
        if (y1 - target_lsb).abs() < 0.005 {
            return Ok(x1);
        }
        let dy = y1 - y0;
        let next = if dy.abs() > 1e-12 {
            (x1 - y0 * (x1 - x0) / dy).clamp(0.2 * x1, 5.0 * x1)
        } else {
            x1
        };
        x0 = x1;
        y0 = y1;
        x1 = if next == x1 { x1 * target_lsb / y1 } else { next };
    }
    Ok(x1)
}

/// Two-point-calibrated inaccuracy at 50 degC for a corner-shifted config.
fn corner_err50(cfg: &SensorConfig, corner: &Corner) -> Result<f64> {
    let shifted = apply_corner(cfg, corner);
    let (c10, c90) = calibration_codes(&shifted, 0.6, 10.0, 90.0)?;
    let cal = two_point_calibrate(c10, c90)?;
    let p = evaluate_point(&shifted, 0.6, 50.0)?;
    Ok(cal.estimate(p.code as f64) - 50.0)
}

/// Calibrated corner set plus the realized 50 degC inaccuracies for FS/SF.
#[derive(Debug, Clone)]
pub struct CornerCalibration {
    pub corners: Vec<Corner>,
    pub fs_err50_c: f64,
    pub sf_err50_c: f64,
}

/// Re-derive the FS/SF mismatch-curvature magnitudes by bisection against
/// the -1.14 / +1.16 degC characterization points at 50 degC.
pub fn calibrate_corners(cfg: &SensorConfig) -> Result<CornerCalibration> {
    let m = crate::variation::CORNER_SHIFT_V;
    // FS: curvature magnitude alone.
    let mut lo = 0.02;
    let mut hi = 0.05;
    for _ in 0..36 {
        let mid = 0.5 * (lo + hi);
        let corner = Corner {
            name: CornerName::FS,
            dvth_p: -m,
            dvth_n: m,
            dvth_mm0: 0.0,
            dvth_mm2: -mid,
        };
        if corner_err50(cfg, &corner)? > -1.14 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fs_mm2 = -0.5 * (lo + hi);
    // SF: fixed mismatch offset, bisect the curvature.
    let sf_mm0 = crate::variation::SF_MM0_V;
    let mut lo = 0.008;
    let mut hi = 0.024;
    for _ in 0..36 {
        let mid = 0.5 * (lo + hi);
        let corner = Corner {
            name: CornerName::SF,
            dvth_p: m,
            dvth_n: -m,
            dvth_mm0: sf_mm0,
            dvth_mm2: mid,
        };
        if corner_err50(cfg, &corner)? < 1.16 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sf_mm2 = 0.5 * (lo + hi);

    let mut corners: Vec<Corner> = CornerName::ALL
        .iter()
        .map(|&nm| Corner::nominal(nm))
        .collect();
    for c in &mut corners {
        match c.name {
            CornerName::FS => c.dvth_mm2 = fs_mm2,
            CornerName::SF => c.dvth_mm2 = sf_mm2,
            _ => {}
        }
    }
    let fs = corners.iter().find(|c| c.name == CornerName::FS).unwrap();
    let sf = corners.iter().find(|c| c.name == CornerName::SF).unwrap();
    Ok(CornerCalibration {
        fs_err50_c: corner_err50(cfg, fs)?,
        sf_err50_c: corner_err50(cfg, sf)?,
        corners,
    })
}

/// Solve the headroom coefficient so the single-point-calibration line
/// sensitivity at 30 degC (calibrated at 0.9 V, swept ±200 mV) has the given
/// magnitude in degC/V.
pub fn fit_headroom(cfg: &SensorConfig, target_abs_c_per_v: f64) -> Result<f64> {
    let sweep: Vec<f64> = (0..=8).map(|i| 0.7 + 0.05 * i as f64).collect();
    let slope_for = |h: f64| -> Result<f64> {
        let mut trial = cfg.clone();
        trial.headroom_coeff = h;
        crate::metrology::line_sensitivity(&trial, 30.0, 0.9, &sweep, false)
    };
    // The response is close to linear in h; two secant steps converge.
    let mut h = 1e-2;
    for _ in 0..12 {
        let s = slope_for(h)?;
        if (s.abs() - target_abs_c_per_v).abs() < 0.02 {
            return Ok(h);
        }
        if s.abs() < 1e-12 {
            return Err(Error::Calibration(
                "headroom fit: zero response from the model".into(),
            ));
        }
        h *= target_abs_c_per_v / s.abs();
    }
    Ok(h)
}
