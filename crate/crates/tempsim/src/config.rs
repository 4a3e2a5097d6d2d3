//! Full sensor configuration: one value describes one sensor instance
//! end to end (TCC sizing, regulator tables, oscillators, counters,
//! back-end power and the optional headroom term).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cfc::OscPair;
use crate::error::{Error, Result};
use crate::fdc::{BackendPower, FdcConfig};
use crate::fit;
use crate::frontend::{RegulatorParams, TccParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub tcc: TccParams,
    pub regulator: RegulatorParams,
    pub osc: OscPair,
    pub fdc: FdcConfig,
    pub backend: BackendPower,
    /// Linear headroom coefficient (V per V of V_DD). 0 models an ideally
    /// screened regulator; nonzero reintroduces finite line sensitivity.
    #[serde(default)]
    pub headroom_coeff: f64,
    /// V_DD at which the headroom term vanishes (V).
    #[serde(default = "default_headroom_vref")]
    pub headroom_vref: f64,
}

fn default_headroom_vref() -> f64 {
    0.9
}

/// Supported external supply range (V). Values outside are accepted by the
/// model but flagged by scenario validation.
pub const VDD_RANGE: (f64, f64) = (0.6, 1.8);

impl SensorConfig {
    /// The canonical fitted configuration. Derived once from the anchor set
    /// and cached.
    pub fn canonical() -> &'static SensorConfig {
        use std::sync::OnceLock;
        static CANONICAL: OnceLock<SensorConfig> = OnceLock::new();
        CANONICAL.get_or_init(|| {
            fit::fit_canonical(&fit::AnchorSet::default())
                .expect("canonical anchor set must fit")
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.tcc.validate()?;
        self.regulator.validate()?;
        self.osc.validate()?;
        self.fdc.validate()?;
        if self.osc.slow.n_stages != 13 || self.osc.fast.n_stages != 7 {
            return Err(Error::Config(format!(
                "osc: canonical stage counts are 13 (slow) and 7 (fast), got {}/{}",
                self.osc.slow.n_stages, self.osc.fast.n_stages
            )));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization, hex-encoded. Embedded in
    /// every output artifact so results from different configs cannot be
    /// silently mixed.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("sensor config serialization failed: {e}")))
    }

    pub fn from_toml_str(s: &str) -> Result<SensorConfig> {
        let cfg: SensorConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("sensor config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_validates() {
        SensorConfig::canonical().validate().unwrap();
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = SensorConfig::canonical().clone();
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.headroom_coeff = 0.01;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn toml_round_trip() {
        let a = SensorConfig::canonical();
        let s = a.to_toml_string().unwrap();
        let b = SensorConfig::from_toml_str(&s).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
    }
}
