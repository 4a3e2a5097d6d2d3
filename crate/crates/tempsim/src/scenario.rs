//! Scenario files: one TOML document describes what to run (sensor config,
//! sweep grid, Monte Carlo campaign, noise repeats, output destination).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{SensorConfig, VDD_RANGE};
use crate::error::{Error, Result};
use crate::variation::{CornerName, VariationSpec};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Sensor configuration; omitted means the canonical fitted defaults.
    #[serde(default)]
    pub sensor: SensorSource,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub campaign: Option<CampaignSpec>,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SensorSource {
    /// Path to a sensor-config TOML file, relative to the scenario file.
    #[serde(default)]
    pub config_path: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub temp_start_c: f64,
    pub temp_stop_c: f64,
    pub temp_step_c: f64,
    pub vdd_v: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            temp_start_c: 0.0,
            temp_stop_c: 100.0,
            temp_step_c: 1.0,
            vdd_v: vec![0.6],
        }
    }
}

impl SweepSpec {
    pub fn temperatures(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let steps = ((self.temp_stop_c - self.temp_start_c) / self.temp_step_c).round() as i64;
        for i in 0..=steps {
            out.push(self.temp_start_c + i as f64 * self.temp_step_c);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub n_dies: u32,
    pub master_seed: u64,
    #[serde(default)]
    pub corners: Vec<CornerName>,
    #[serde(default)]
    pub variation: VariationSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub enable: bool,
    pub repeats: u32,
    #[serde(default)]
    pub master_seed: Option<u64>,
    /// Operating point of the repeated-reading experiment.
    #[serde(default = "default_noise_temp")]
    pub temp_c: f64,
    #[serde(default = "default_noise_vdd")]
    pub vdd_v: f64,
}

fn default_noise_temp() -> f64 {
    25.0
}
fn default_noise_vdd() -> f64 {
    0.6
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: PathBuf::from("out"),
            formats: default_formats(),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Scenario> {
        let scn: Scenario =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let scn = Scenario::from_toml_str(&text)?;
        Ok(scn)
    }

    /// Resolve the sensor configuration (canonical unless a path is given).
    pub fn sensor_config(&self, scenario_dir: &Path) -> Result<SensorConfig> {
        match &self.sensor.config_path {
            None => Ok(SensorConfig::canonical().clone()),
            Some(p) => {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    scenario_dir.join(p)
                };
                let text = std::fs::read_to_string(&full)?;
                SensorConfig::from_toml_str(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if !(s.temp_step_c > 0.0) {
            return Err(Error::Config(format!(
                "sweep.temp_step_c: must be > 0, got {}",
                s.temp_step_c
            )));
        }
        if s.temp_stop_c < s.temp_start_c {
            return Err(Error::Config(
                "sweep.temp_stop_c: must be >= temp_start_c".into(),
            ));
        }
        if s.temp_start_c < 0.0 || s.temp_stop_c > 100.0 {
            return Err(Error::Config(format!(
                "sweep: temperature range [{}, {}] outside the model table domain [0, 100] degC",
                s.temp_start_c, s.temp_stop_c
            )));
        }
        if s.vdd_v.is_empty() {
            return Err(Error::Config("sweep.vdd_v: needs at least one supply".into()));
        }
        for &v in &s.vdd_v {
            if !(v > 0.0) {
                return Err(Error::Config(format!("sweep.vdd_v: must be > 0, got {v}")));
            }
        }
        if let Some(c) = &self.campaign {
            if c.n_dies < 1 {
                return Err(Error::Config("campaign.n_dies: must be >= 1".into()));
            }
            c.variation.validate()?;
        }
        if let Some(n) = &self.noise {
            if n.enable && n.repeats < 2 {
                return Err(Error::Config("noise.repeats: must be >= 2".into()));
            }
            if n.enable && n.master_seed.is_none() {
                return Err(Error::Config(
                    "noise.master_seed: required when noise is enabled".into(),
                ));
            }
        }
        for f in &self.outputs.formats {
            if f != "csv" && f != "json" {
                return Err(Error::Config(format!(
                    "outputs.formats: unknown format {f:?} (csv or json)"
                )));
            }
        }
        Ok(())
    }

    /// Out-of-range supplies are allowed but worth a warning line.
    pub fn vdd_warnings(&self) -> Vec<String> {
        self.sweep
            .vdd_v
            .iter()
            .filter(|&&v| v < VDD_RANGE.0 || v > VDD_RANGE.1)
            .map(|v| {
                format!(
                    "vdd {v} V outside the characterized range [{}, {}] V",
                    VDD_RANGE.0, VDD_RANGE.1
                )
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_validates() {
        Scenario::default().validate().unwrap();
    }

    #[test]
    fn toml_round_trip_with_campaign() {
        let text = r#"
[sweep]
temp_start_c = 0.0
temp_stop_c = 100.0
temp_step_c = 10.0
vdd_v = [0.6, 1.8]

[campaign]
n_dies = 4
master_seed = 7
corners = ["TT", "FS"]

[campaign.variation]
sigma_vth = 0.0014
sigma_i0 = 0.06
sigma_cap = 0.015

[noise]
enable = true
repeats = 200
master_seed = 9

[outputs]
directory = "results"
"#;
        let scn = Scenario::from_toml_str(text).unwrap();
        assert_eq!(scn.sweep.temperatures().len(), 11);
        assert_eq!(scn.campaign.as_ref().unwrap().corners.len(), 2);
    }

    #[test]
    fn bad_fields_report_paths() {
        let text = "[sweep]\ntemp_start_c = 0.0\ntemp_stop_c = 120.0\ntemp_step_c = 1.0\nvdd_v = [0.6]\n";
        let err = Scenario::from_toml_str(text).unwrap_err();
        assert!(err.to_string().contains("sweep"), "{err}");

        let text = "[sweep]\ntemp_start_c = 0.0\ntemp_stop_c = 100.0\ntemp_step_c = -1.0\nvdd_v = [0.6]\n";
        assert!(Scenario::from_toml_str(text).is_err());

        let text = "[campaign]\nn_dies = 0\nmaster_seed = 1\n";
        assert!(Scenario::from_toml_str(text).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Scenario::from_toml_str("[sweep]\nbogus = 1\n").is_err());
    }

    #[test]
    fn vdd_range_warning() {
        let mut scn = Scenario::default();
        scn.sweep.vdd_v = vec![0.5];
        assert_eq!(scn.vdd_warnings().len(), 1);
    }
}
