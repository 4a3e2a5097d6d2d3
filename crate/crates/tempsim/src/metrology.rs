//! Calibration and reported statistics: two-point/one-point calibration,
//! inaccuracy suites, counter and noise-limited resolution, line sensitivity
//! and the comparison-table arithmetic.

use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::error::{Error, Result};
use crate::pipeline::{calibration_codes, evaluate_point, noisy_conversion};
use crate::stats::{linear_fit, mean, sample_std};
use crate::variation::derive_seed;

/// Default calibration reference temperatures (degC).
pub const CAL_T_LO: f64 = 10.0;
pub const CAL_T_HI: f64 = 90.0;

/// Affine code -> temperature map from a two-point calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub code_lo: u32,
    pub code_hi: u32,
    pub t_lo_c: f64,
    pub t_hi_c: f64,
}

impl Calibration {
    /// Temperature estimate for a code.
    pub fn estimate(&self, code: f64) -> f64 {
        let span = (self.code_hi - self.code_lo) as f64;
        self.t_lo_c + (code - self.code_lo as f64) * (self.t_hi_c - self.t_lo_c) / span
    }

    /// degC per LSB of the calibrated characteristic.
    pub fn slope_c_per_lsb(&self) -> f64 {
        (self.t_hi_c - self.t_lo_c) / (self.code_hi - self.code_lo) as f64
    }
}

/// Two-point calibration with 10 degC and 90 degC references.
pub fn two_point_calibrate(code10: u32, code90: u32) -> Result<Calibration> {
    two_point_calibrate_at(code10, code90, CAL_T_LO, CAL_T_HI)
}

pub fn two_point_calibrate_at(
    code_lo: u32,
    code_hi: u32,
    t_lo_c: f64,
    t_hi_c: f64,
) -> Result<Calibration> {
    if code_hi <= code_lo {
        return Err(Error::Calibration(format!(
            "calibration codes must increase with temperature, got {code_lo} -> {code_hi}"
        )));
    }
    Ok(Calibration {
        code_lo,
        code_hi,
        t_lo_c,
        t_hi_c,
    })
}

/// One-point variant: intercept from a single reading, slope supplied from
/// the nominal characteristic.
pub fn one_point_calibrate(code_ref: u32, t_ref_c: f64, slope_c_per_lsb: f64) -> Result<OnePointCalibration> {
    if !(slope_c_per_lsb > 0.0) {
        return Err(Error::Calibration(format!(
            "one-point calibration needs a positive slope, got {slope_c_per_lsb}"
        )));
    }
    Ok(OnePointCalibration {
        code_ref,
        t_ref_c,
        slope_c_per_lsb,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnePointCalibration {
    pub code_ref: u32,
    pub t_ref_c: f64,
    pub slope_c_per_lsb: f64,
}

impl OnePointCalibration {
    pub fn estimate(&self, code: f64) -> f64 {
        self.t_ref_c + (code - self.code_ref as f64) * self.slope_c_per_lsb
    }
}

/// Per-supply calibration entries (pre-stored pairs, one per V_DD).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CalibrationTable {
    entries: Vec<(f64, Calibration)>,
}

impl CalibrationTable {
    pub fn insert(&mut self, v_dd: f64, cal: Calibration) -> Result<()> {
        if cal.code_hi <= cal.code_lo {
            return Err(Error::Calibration(
                "calibration table entry must have code_hi > code_lo".into(),
            ));
        }
        self.entries.retain(|(v, _)| *v != v_dd);
        self.entries.push((v_dd, cal));
        self.entries
            .sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(())
    }

    pub fn lookup(&self, v_dd: f64) -> Option<&Calibration> {
        self.entries
            .iter()
            .find(|(v, _)| (v - v_dd).abs() < 1e-9)
            .map(|(_, c)| c)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Descriptive statistics of a set of (true, estimated) temperature pairs.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct InaccuracyStats {
    pub min_c: f64,
    pub max_c: f64,
    pub rms_c: f64,
    /// (max − min) / evaluated range × 100.
    pub relative_pct: f64,
}

/// Min/max/RMS/relative inaccuracy over (true, estimated) pairs.
pub fn inaccuracy_stats(points: &[(f64, f64)]) -> Result<InaccuracyStats> {
    if points.len() < 2 {
        return Err(Error::Input("inaccuracy stats need at least 2 points".into()));
    }
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    let mut e_min = f64::INFINITY;
    let mut e_max = f64::NEG_INFINITY;
    let mut ss = 0.0;
    for &(truth, est) in points {
        let err = est - truth;
        t_min = t_min.min(truth);
        t_max = t_max.max(truth);
        e_min = e_min.min(err);
        e_max = e_max.max(err);
        ss += err * err;
    }
    let range = t_max - t_min;
    if !(range > 0.0) {
        return Err(Error::Input(
            "inaccuracy stats need a nonzero temperature range".into(),
        ));
    }
    Ok(InaccuracyStats {
        min_c: e_min,
        max_c: e_max,
        rms_c: (ss / points.len() as f64).sqrt(),
        relative_pct: (e_max - e_min) / range * 100.0,
    })
}

/// Calibration codes from averaged noisy readings: `reads` jittered
/// conversions at each reference temperature, rounded mean per point.
/// `reads = 1` reproduces worst-case field calibration; the default of 8
/// decouples calibration error from read noise. With jitter disabled this
/// reduces to the noiseless codes.
pub fn noisy_calibration_codes(
    cfg: &SensorConfig,
    v_dd: f64,
    reads: u32,
    seed: u64,
) -> Result<(u32, u32)> {
    if reads < 1 {
        return Err(Error::Input("calibration needs at least 1 read".into()));
    }
    let avg = |t_c: f64, lane: u64| -> Result<u32> {
        let mut acc = 0u64;
        for r in 0..reads {
            acc += noisy_conversion(cfg, v_dd, t_c, derive_seed(seed, &[lane, r as u64]))?.code
                as u64;
        }
        Ok(((acc as f64 / reads as f64).round()) as u32)
    };
    Ok((avg(CAL_T_LO, 1)?, avg(CAL_T_HI, 2)?))
}

/// Default read count for noisy calibration points.
pub const DEFAULT_CALIBRATION_READS: u32 = 8;

/// Worst 3·sigma across a die population: at each temperature take three
/// times the standard deviation of the errors over the dies, then report the
/// worst value over temperature.
pub fn population_three_sigma(per_temperature_errors: &[Vec<f64>]) -> f64 {
    per_temperature_errors
        .iter()
        .map(|errs| 3.0 * sample_std(errs))
        .fold(0.0, f64::max)
}

/// Noise-limited resolution measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseResolution {
    pub sigma_c: f64,
    pub sigma_lsb: f64,
    pub mean_code: f64,
    pub codes: Vec<u32>,
}

/// Repeated jittered conversions at a fixed point, converted to degC through
/// the calibrated slope.
pub fn noise_resolution(
    cfg: &SensorConfig,
    t_c: f64,
    v_dd: f64,
    repeats: u32,
    seed: u64,
) -> Result<NoiseResolution> {
    if repeats < 2 {
        return Err(Error::Input(format!(
            "noise resolution needs >= 2 repeats, got {repeats}"
        )));
    }
    let (c10, c90) = calibration_codes(cfg, v_dd, CAL_T_LO, CAL_T_HI)?;
    let cal = two_point_calibrate(c10, c90)?;
    let mut codes = Vec::with_capacity(repeats as usize);
    for rep in 0..repeats {
        let conv = noisy_conversion(cfg, v_dd, t_c, derive_seed(seed, &[3, rep as u64]))?;
        codes.push(conv.code);
    }
    let as_f: Vec<f64> = codes.iter().map(|&c| c as f64).collect();
    let sigma_lsb = sample_std(&as_f);
    Ok(NoiseResolution {
        sigma_c: sigma_lsb * cal.slope_c_per_lsb(),
        sigma_lsb,
        mean_code: mean(&as_f),
        codes,
    })
}

/// Line sensitivity: calibrate once at `cal_vdd` (or per supply point when
/// `per_vdd_calibration` is set), evaluate the temperature-estimate error
/// across the supply sweep, and return the least-squares slope of error vs
/// V_DD in degC/V (signed).
pub fn line_sensitivity(
    cfg: &SensorConfig,
    t_c: f64,
    cal_vdd: f64,
    sweep: &[f64],
    per_vdd_calibration: bool,
) -> Result<f64> {
    if sweep.len() < 3 {
        return Err(Error::Input(
            "line sensitivity needs at least 3 supply points".into(),
        ));
    }
    // Pre-store the calibration pairs: one per supply point in the per-V_DD
    // mode, a single entry otherwise.
    let mut table = CalibrationTable::default();
    if per_vdd_calibration {
        for &v in sweep {
            let (c10, c90) = calibration_codes(cfg, v, CAL_T_LO, CAL_T_HI)?;
            table.insert(v, two_point_calibrate(c10, c90)?)?;
        }
    } else {
        let (c10, c90) = calibration_codes(cfg, cal_vdd, CAL_T_LO, CAL_T_HI)?;
        table.insert(cal_vdd, two_point_calibrate(c10, c90)?)?;
    }
    let mut pts = Vec::with_capacity(sweep.len());
    for &v in sweep {
        let cal = table
            .lookup(if per_vdd_calibration { v } else { cal_vdd })
            .expect("calibration pre-stored above");
        let p = evaluate_point(cfg, v, t_c)?;
        pts.push((v, cal.estimate(p.code as f64) - t_c));
    }
    Ok(linear_fit(&pts)?.slope)
}

/// Resolution figure of merit in nJ·K²: energy per conversion times the
/// squared resolution.
pub fn r_fom(energy_j: f64, resolution_c: f64) -> Result<f64> {
    if !(energy_j > 0.0) || !(resolution_c > 0.0) {
        return Err(Error::Domain(format!(
            "r_fom needs positive energy and resolution, got {energy_j} J, {resolution_c} degC"
        )));
    }
    Ok(energy_j * 1e9 * resolution_c * resolution_c)
}

/// Everything reported for one die (or one sweep).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricsReport {
    pub min_inacc_c: f64,
    pub max_inacc_c: f64,
    pub rms_inacc_c: f64,
    /// Worst population 3-sigma over temperature; equal across the dies of
    /// one campaign, 0 for single-die runs.
    pub three_sigma_c: f64,
    pub relative_inacc_pct: f64,
    pub counter_resolution_c_per_lsb: f64,
    pub noise_resolution_c: f64,
    pub line_sensitivity_c_per_v: f64,
    pub energy_per_conv_j: f64,
    pub conv_time_s: f64,
    pub r_fom_nj_k2: f64,
    pub adj_r2: f64,
}

impl MetricsReport {
    /// Assemble a report; the R-FoM identity is enforced here rather than
    /// trusted from the caller.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        inacc: InaccuracyStats,
        three_sigma_c: f64,
        counter_resolution: f64,
        noise_resolution_c: f64,
        line_sensitivity_c_per_v: f64,
        energy_per_conv_j: f64,
        conv_time_s: f64,
        adj_r2: f64,
    ) -> MetricsReport {
        let r_fom_nj_k2 = if noise_resolution_c > 0.0 && energy_per_conv_j > 0.0 {
            energy_per_conv_j * 1e9 * noise_resolution_c * noise_resolution_c
        } else {
            0.0
        };
        MetricsReport {
            min_inacc_c: inacc.min_c,
            max_inacc_c: inacc.max_c,
            rms_inacc_c: inacc.rms_c,
            three_sigma_c,
            relative_inacc_pct: inacc.relative_pct,
            counter_resolution_c_per_lsb: counter_resolution,
            noise_resolution_c,
            line_sensitivity_c_per_v,
            energy_per_conv_j,
            conv_time_s,
            r_fom_nj_k2,
            adj_r2,
        }
    }

    /// Peak absolute inaccuracy.
    pub fn peak_inacc_c(&self) -> f64 {
        self.min_inacc_c.abs().max(self.max_inacc_c.abs())
    }
}

/// One externally published sensor for the comparison table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub energy_nj: f64,
    pub resolution_c: f64,
    pub range_c: f64,
    pub min_inacc_c: f64,
    pub max_inacc_c: f64,
    pub claimed_relative_pct: Option<f64>,
    pub claimed_r_fom_nj_k2: Option<f64>,
}

/// A recomputed comparison entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub name: String,
    pub energy_nj: f64,
    pub resolution_c: f64,
    pub relative_inacc_pct: f64,
    pub r_fom_nj_k2: f64,
    /// Non-empty when a supplied derived value disagrees with the
    /// recomputation by more than 5%.
    pub flags: Vec<String>,
}

/// Recompute relative inaccuracy and R-FoM for each row and flag rows whose
/// supplied derived values disagree by more than 5%.
pub fn comparison_table(rows: &[ComparisonRow]) -> Result<Vec<ComparisonEntry>> {
    rows.iter()
        .map(|row| {
            if !(row.range_c > 0.0) {
                return Err(Error::Input(format!(
                    "comparison row {:?}: temperature range must be > 0",
                    row.name
                )));
            }
            if !(row.energy_nj > 0.0) || !(row.resolution_c > 0.0) {
                return Err(Error::Input(format!(
                    "comparison row {:?}: energy and resolution must be > 0",
                    row.name
                )));
            }
            let relative = (row.max_inacc_c - row.min_inacc_c) / row.range_c * 100.0;
            let fom = row.energy_nj * row.resolution_c * row.resolution_c;
            let mut flags = Vec::new();
            if let Some(claimed) = row.claimed_relative_pct {
                if (claimed - relative).abs() / relative > 0.05 {
                    flags.push(format!(
                        "relative inaccuracy: supplied {claimed:.3}% vs recomputed {relative:.3}%"
                    ));
                }
            }
            if let Some(claimed) = row.claimed_r_fom_nj_k2 {
                if (claimed - fom).abs() / fom > 0.05 {
                    flags.push(format!(
                        "r-fom: supplied {claimed:.4} vs recomputed {fom:.4} nJ-K2"
                    ));
                }
            }
            Ok(ComparisonEntry {
                name: row.name.clone(),
                energy_nj: row.energy_nj,
                resolution_c: row.resolution_c,
                relative_inacc_pct: relative,
                r_fom_nj_k2: fom,
                flags,
            })
        })
        .collect()
}

/// Parse comparison rows from CSV with the documented header
/// `name,energy_nj,resolution_c,range_c,min_inacc_c,max_inacc_c[,claimed_relative_pct,claimed_r_fom]`.
pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("comparison csv is empty".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let expect = [
        "name",
        "energy_nj",
        "resolution_c",
        "range_c",
        "min_inacc_c",
        "max_inacc_c",
    ];
    if cols.len() < expect.len() || cols[..expect.len()] != expect {
        return Err(Error::Input(format!(
            "comparison csv header must start with {:?}",
            expect.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() < 6 {
            return Err(Error::Input(format!(
                "comparison csv line {}: expected >= 6 fields",
                lineno + 2
            )));
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse::<f64>().map_err(|_| {
                Error::Input(format!(
                    "comparison csv line {}: field {:?} is not a number",
                    lineno + 2,
                    f[i]
                ))
            })
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            match f.get(i) {
                None => Ok(None),
                Some(s) => {
                    if s.is_empty() {
                        Ok(None)
                    } else {
                        num(i).map(Some)
                    }
                }
            }
        };
        rows.push(ComparisonRow {
            name: f[0].to_string(),
            energy_nj: num(1)?,
            resolution_c: num(2)?,
            range_c: num(3)?,
            min_inacc_c: num(4)?,
            max_inacc_c: num(5)?,
            claimed_relative_pct: opt(6)?,
            claimed_r_fom_nj_k2: opt(7)?,
        });
    }
    Ok(rows)
}

/// Plain-text rendering of the comparison entries.
pub fn render_comparison(entries: &[ComparisonEntry]) -> String {
    let mut out = String::from(
        "name                     energy[nJ]  res[degC]  rel.inacc[%]  R-FoM[nJ-K2]  flags\n",
    );
    for e in entries {
        out.push_str(&format!(
            "{:<24} {:>10.3} {:>10.3} {:>13.3} {:>13.4}  {}\n",
            e.name,
            e.energy_nj,
            e.resolution_c,
            e.relative_inacc_pct,
            e.r_fom_nj_k2,
            if e.flags.is_empty() {
                "-".to_string()
            } else {
                e.flags.join("; ")
            }
        ));
    }
    out
}
