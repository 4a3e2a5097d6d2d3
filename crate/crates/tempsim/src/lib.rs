//! Behavioral simulator of a subthreshold CMOS temperature sensor.
//!
//! The model chain follows the silicon: a temperature-to-current converter
//! built from stacked diode-connected PMOS devices under a regulated rail,
//! two current-starved ring oscillators whose frequency ratio is PTAT, and a
//! counter-based frequency-to-digital back end. On top of the chain sits a
//! metrology pipeline: two-point calibration, inaccuracy statistics, noise
//! and counter resolution, line sensitivity, energy per conversion and the
//! comparison-table figures of merit, with Monte Carlo process variation and
//! corner analysis.
//!
//! Entry points:
//! * [`config::SensorConfig::canonical`] — the fitted default sensor.
//! * [`pipeline::evaluate_point`] / [`pipeline::noisy_conversion`] — one
//!   grid-point evaluation or one jittered conversion.
//! * [`campaign`] — scenario-driven sweeps, Monte Carlo campaigns and
//!   noise-resolution runs with CSV/JSON artifacts.

pub mod campaign;
pub mod cfc;
pub mod config;
pub mod constants;
pub mod device;
pub mod error;
pub mod fdc;
pub mod fit;
pub mod frontend;
pub mod metrology;
pub mod pipeline;
pub mod scenario;
pub mod stats;
pub mod variation;

pub use config::SensorConfig;
pub use error::{Error, Result};
