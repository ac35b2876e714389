//! Unit conventions and physical constants.
//!
//! Internally every frequency is angular, in rad/µs, and every time is in µs,
//! so that `rate * time` is dimensionless without bookkeeping. Configuration
//! files and CLI flags use linear frequencies in MHz (the convention printed
//! next to every experimental value); the functions here are the single
//! boundary between the two systems.

use std::f64::consts::TAU;

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const KB: f64 = 1.380_649e-23;
/// Mass of cesium-133 (kg).
pub const CS_MASS: f64 = 2.206_946_50e-25;
/// Cesium D2 line wavelength (m).
pub const CS_D2_WAVELENGTH: f64 = 852.347_27e-9;

/// Linear frequency in MHz -> angular frequency in rad/µs.
#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// Angular frequency in rad/µs -> linear frequency in MHz.
#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TAU
}

/// Rate in 1/µs -> 1/ms, the unit used in human-facing JSON output.
#[inline]
pub fn per_us_to_per_ms(rate: f64) -> f64 {
    rate * 1.0e3
}

/// Photon recoil frequency h/(2 m λ²) as a linear frequency in MHz.
pub fn recoil_frequency_mhz(mass_kg: f64, wavelength_m: f64) -> f64 {
    let h = HBAR * TAU;
    h / (2.0 * mass_kg * wavelength_m * wavelength_m) * 1.0e-6
}

/// Energy quantum ħω of a mode with angular frequency `omega` (rad/µs),
/// expressed as a temperature in µK.
pub fn phonon_energy_uk(omega: f64) -> f64 {
    // rad/µs -> rad/s is 1e6; K -> µK is another 1e6.
    HBAR * omega * 1.0e12 / KB
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cesium_recoil_near_two_khz() {
        // ħk²/2m for the cavity-mode wavelength, from CODATA constants.
        let f = recoil_frequency_mhz(CS_MASS, CS_D2_WAVELENGTH);
        assert_relative_eq!(f, 0.00207, max_relative = 5e-3);
    }

    #[test]
    fn phonon_energy_matches_handbook_value() {
        // ħω/k_B at ω = 2π·0.3 MHz is 14.4 µK.
        assert_relative_eq!(
            phonon_energy_uk(mhz_to_angular(0.3)),
            14.4,
            max_relative = 1e-2
        );
    }
}
