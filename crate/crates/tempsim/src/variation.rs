//! Process corners and die-to-die variation.
//!
//! Corner shifts move device thresholds and rescale the regulator/load
//! tables; die samples add per-device Gaussian mismatch on top. Either
//! produces a plain `SensorConfig`, so everything downstream is unchanged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::SensorConfig;
use crate::constants::{kelvin_from_celsius, Q_OVER_KB};
use crate::device::VTH_TC_REF_KELVIN;
use crate::error::{Error, Result};

/// Corner V_th shift magnitude (V) for the PMOS and native devices.
pub const CORNER_SHIFT_V: f64 = 0.030;
/// Calibrated branch-mismatch curvature of the FS corner (V).
pub const FS_MM2_V: f64 = -0.033147;
/// Calibrated branch-mismatch offset/curvature of the SF corner (V).
pub const SF_MM0_V: f64 = 0.010;
pub const SF_MM2_V: f64 = 0.016084;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CornerName {
    TT,
    FF,
    SS,
    FS,
    SF,
}

impl CornerName {
    pub const ALL: [CornerName; 5] = [
        CornerName::TT,
        CornerName::FF,
        CornerName::SS,
        CornerName::FS,
        CornerName::SF,
    ];
}

impl std::str::FromStr for CornerName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TT" => Ok(CornerName::TT),
            "FF" => Ok(CornerName::FF),
            "SS" => Ok(CornerName::SS),
            "FS" => Ok(CornerName::FS),
            "SF" => Ok(CornerName::SF),
            other => Err(Error::Config(format!("unknown corner name {other:?}"))),
        }
    }
}

impl std::fmt::Display for CornerName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One process corner.
///
/// `dvth_p` shifts both TCC PMOS thresholds; `dvth_n` shifts the native
/// stack and acts on the regulator table as an equivalent current scale.
/// `dvth_mm0`/`dvth_mm2` are the corner's residual branch mismatch: the
/// 3-stack and 2-stack devices sit in different drain-voltage environments,
/// so a corner displaces them slightly differently, with a component that
/// bends over temperature. The mismatch applied between M1 and M2 at
/// absolute temperature T is `mm0 + mm2·((T/298.15 K)² − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub name: CornerName,
    pub dvth_p: f64,
    pub dvth_n: f64,
    #[serde(default)]
    pub dvth_mm0: f64,
    #[serde(default)]
    pub dvth_mm2: f64,
}

impl Corner {
    pub fn tt() -> Corner {
        Corner {
            name: CornerName::TT,
            dvth_p: 0.0,
            dvth_n: 0.0,
            dvth_mm0: 0.0,
            dvth_mm2: 0.0,
        }
    }

    /// Calibrated corner set: FS/SF carry opposite-sign shift tuples, the
    /// mismatch terms sized so two-point-calibrated inaccuracy at 50 degC
    /// lands at the -1.14 / +1.16 degC characterization points.
    pub fn nominal(name: CornerName) -> Corner {
        let m = CORNER_SHIFT_V;
        match name {
            CornerName::TT => Corner::tt(),
            CornerName::FF => Corner {
                name,
                dvth_p: -m,
                dvth_n: -m,
                dvth_mm0: 0.0,
                dvth_mm2: 0.0,
            },
            CornerName::SS => Corner {
                name,
                dvth_p: m,
                dvth_n: m,
                dvth_mm0: 0.0,
                dvth_mm2: 0.0,
            },
            CornerName::FS => Corner {
                name,
                dvth_p: -m,
                dvth_n: m,
                dvth_mm0: 0.0,
                dvth_mm2: FS_MM2_V,
            },
            CornerName::SF => Corner {
                name,
                dvth_p: m,
                dvth_n: -m,
                dvth_mm0: SF_MM0_V,
                dvth_mm2: SF_MM2_V,
            },
        }
    }

    fn mismatch_at(&self, t_kelvin: f64) -> f64 {
        let r = t_kelvin / VTH_TC_REF_KELVIN;
        self.dvth_mm0 + self.dvth_mm2 * (r * r - 1.0)
    }
}

/// Shift a configuration to a process corner. TT is the identity.
pub fn apply_corner(cfg: &SensorConfig, corner: &Corner) -> SensorConfig {
    let mut out = cfg.clone();
    out.tcc.m1.vth += corner.dvth_p + 0.5 * corner.dvth_mm0;
    out.tcc.m1.vth_tc2 += 0.5 * corner.dvth_mm2;
    out.tcc.m2.vth += corner.dvth_p - 0.5 * corner.dvth_mm0;
    out.tcc.m2.vth_tc2 -= 0.5 * corner.dvth_mm2;

    // Load current tracks the dominant (M1) branch shift.
    let n = cfg.tcc.m1.n;
    let dvth_p = corner.dvth_p;
    let c = *corner;
    out.regulator.load.alpha = cfg.regulator.load.alpha.map_values(|t_c, v| {
        let t_k = kelvin_from_celsius(t_c);
        let shift = dvth_p + 0.5 * c.mismatch_at(t_k);
        v * (-shift * Q_OVER_KB / (n * t_k)).exp()
    });
    // Native-stack shift as an equivalent current scale on the regulator.
    let beta_r = cfg.regulator.reg.beta.clone();
    out.regulator.reg.alpha = cfg.regulator.reg.alpha.map_values(|t_c, v| {
        let t_k = kelvin_from_celsius(t_c);
        let n_nat = beta_r.eval(t_c).expect("knot within domain") / 2.0;
        v * (-corner.dvth_n * Q_OVER_KB / (n_nat * t_k)).exp()
    });
    out
}

/// Magnitudes of the die-to-die draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationSpec {
    /// Per-device V_th mismatch sigma (V); also used for the native stack.
    pub sigma_vth: f64,
    /// Lognormal sigma of the per-device i0 scale.
    pub sigma_i0: f64,
    /// Lognormal sigma of the per-oscillator load-capacitance scale.
    pub sigma_cap: f64,
}

impl Default for VariationSpec {
    fn default() -> Self {
        // Calibrated so a 20-die population lands on the measured
        // peak-inaccuracy envelope; see the fit module.
        VariationSpec {
            sigma_vth: 1.4e-3,
            sigma_i0: 0.06,
            sigma_cap: 0.015,
        }
    }
}

impl VariationSpec {
    pub fn zero() -> VariationSpec {
        VariationSpec {
            sigma_vth: 0.0,
            sigma_i0: 0.0,
            sigma_cap: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma_vth < 0.0 || self.sigma_i0 < 0.0 || self.sigma_cap < 0.0 {
            return Err(Error::Config("variation: sigmas must be >= 0".into()));
        }
        Ok(())
    }
}

/// One Monte Carlo die: per-device threshold offsets (M1, M2, native stack),
/// per-device i0 scales (M1, M2) and per-oscillator capacitance scales
/// (slow, fast).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DieSample {
    pub seed: u64,
    pub vth_offsets: [f64; 3],
    pub i0_scales: [f64; 2],
    pub cap_scales: [f64; 2],
    pub jitter_rel_sigma: f64,
}

impl DieSample {
    /// The die that reproduces the nominal configuration bit-exactly.
    pub fn nominal(jitter_rel_sigma: f64) -> DieSample {
        DieSample {
            seed: 0,
            vth_offsets: [0.0; 3],
            i0_scales: [1.0; 2],
            cap_scales: [1.0; 2],
            jitter_rel_sigma,
        }
    }
}

/// Draw one die. Deterministic per seed; all-zero sigmas reproduce the
/// nominal die regardless of seed.
pub fn sample_die(spec: &VariationSpec, jitter_rel_sigma: f64, seed: u64) -> DieSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |sigma: f64| -> f64 {
        if sigma == 0.0 {
            // keep the stream position moving so sigma toggles don't reshuffle
            let _ = rng.next_u64();
            0.0
        } else {
            Normal::new(0.0, sigma).expect("sigma >= 0").sample(&mut rng)
        }
    };
    let v1 = gauss(spec.sigma_vth);
    let v2 = gauss(spec.sigma_vth);
    let vn = gauss(spec.sigma_vth);
    let s1 = gauss(spec.sigma_i0).exp();
    let s2 = gauss(spec.sigma_i0).exp();
    let cs = gauss(spec.sigma_cap).exp();
    let cf = gauss(spec.sigma_cap).exp();
    DieSample {
        seed,
        vth_offsets: [v1, v2, vn],
        i0_scales: [s1, s2],
        cap_scales: [cs, cf],
        jitter_rel_sigma,
    }
}

use rand::RngCore;

/// Apply a die sample to a configuration.
pub fn apply_die(cfg: &SensorConfig, die: &DieSample) -> SensorConfig {
    let mut out = cfg.clone();
    let [dv1, dv2, dvn] = die.vth_offsets;
    let [s1, s2] = die.i0_scales;
    let [cap_slow, cap_fast] = die.cap_scales;
    out.tcc.m1.vth += dv1;
    out.tcc.m2.vth += dv2;
    out.tcc.m1.i0 *= s1;
    out.tcc.m2.i0 *= s2;
    out.osc.slow.c_load *= cap_slow;
    out.osc.fast.c_load *= cap_fast;
    out.osc.jitter_rel_sigma = die.jitter_rel_sigma;

    let n = cfg.tcc.m1.n;
    out.regulator.load.alpha = cfg.regulator.load.alpha.map_values(|t_c, v| {
        let t_k = kelvin_from_celsius(t_c);
        v * s1 * (-dv1 * Q_OVER_KB / (n * t_k)).exp()
    });
    let beta_r = cfg.regulator.reg.beta.clone();
    out.regulator.reg.alpha = cfg.regulator.reg.alpha.map_values(|t_c, v| {
        let t_k = kelvin_from_celsius(t_c);
        let n_nat = beta_r.eval(t_c).expect("knot within domain") / 2.0;
        v * (-dvn * Q_OVER_KB / (n_nat * t_k)).exp()
    });
    out
}

/// Per-die seed derivation: master xor splitmix64(lane...). Results are
/// independent of scheduling order, so parallel campaigns stay reproducible.
pub fn derive_seed(master: u64, lanes: &[u64]) -> u64 {
    let mut acc = master;
    for (i, &lane) in lanes.iter().enumerate() {
        acc ^= splitmix64(lane.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)));
    }
    acc
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
