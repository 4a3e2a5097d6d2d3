//! Physical constants and temperature conversions.

/// Boltzmann constant (J/K), 2019 SI exact value.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Elementary charge (C), 2019 SI exact value.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// q / k_B (K/V). Handy for exponents of the form q·V / (k_B·T).
pub const Q_OVER_KB: f64 = ELEMENTARY_CHARGE / BOLTZMANN;

/// 0 degrees Celsius in kelvin.
pub const ZERO_CELSIUS_IN_KELVIN: f64 = 273.15;

/// Celsius to kelvin. The one place this conversion happens.
#[inline]
pub fn kelvin_from_celsius(temp_c: f64) -> f64 {
    temp_c + ZERO_CELSIUS_IN_KELVIN
}
