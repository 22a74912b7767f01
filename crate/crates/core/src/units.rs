//! Conversion between dimensionless soliton units and laboratory units.
//!
//! Times are measured in units of the sech width parameter `t0` (FWHM/1.7627
//! for a sech intensity profile), distances in units of the dispersion length
//! `t0^2 / |beta2|`, and angular frequencies in units of `1/t0` as offsets
//! from the carrier at `lambda0`. All physical inputs are SI.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{SolqError, SolqResult};

/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// Full width at half maximum of sech^2 intensity in units of the width
/// parameter: 2*arcosh(sqrt(2)).
pub const SECH_FWHM: f64 = 1.762_747_174_039_086;

/// Distance over which a fundamental soliton acquires a pi/2 nonlinear phase,
/// in meters: (pi/2) * t0^2 / |beta2|.
pub fn soliton_period_meters(t0: f64, beta2_abs: f64) -> SolqResult<f64> {
    if !(t0.is_finite() && t0 > 0.0) {
        return Err(SolqError::Config(format!("t0 must be positive, got {t0}")));
    }
    if !(beta2_abs.is_finite() && beta2_abs > 0.0) {
        return Err(SolqError::Config(format!(
            "beta2_abs must be positive, got {beta2_abs}"
        )));
    }
    Ok(PI / 2.0 * t0 * t0 / beta2_abs)
}

/// Anchors the dimensionless grid to a physical fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalMap {
    /// Sech width parameter, seconds.
    pub t0: f64,
    /// Carrier wavelength, meters.
    pub lambda0: f64,
    /// Magnitude of the group-velocity dispersion, s^2/m.
    pub beta2_abs: f64,
    /// Soliton period, meters; fixed by the other three fields.
    pub z0: f64,
}

impl PhysicalMap {
    pub fn new(t0: f64, lambda0: f64, beta2_abs: f64) -> SolqResult<Self> {
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(SolqError::Config(format!(
                "lambda0 must be positive, got {lambda0}"
            )));
        }
        let z0 = soliton_period_meters(t0, beta2_abs)?;
        Ok(Self { t0, lambda0, beta2_abs, z0 })
    }

    /// Dimensionless offset frequency of vacuum wavelength `lambda` (meters)
    /// relative to the carrier. Shorter wavelengths map to positive Omega.
    pub fn wavelength_to_omega(&self, lambda: f64) -> SolqResult<f64> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(SolqError::Domain(format!(
                "wavelength must be positive, got {lambda}"
            )));
        }
        Ok(2.0 * PI * C_LIGHT * (1.0 / lambda - 1.0 / self.lambda0) * self.t0)
    }

    /// Vacuum wavelength (meters) of dimensionless offset frequency `omega`.
    pub fn omega_to_wavelength(&self, omega: f64) -> SolqResult<f64> {
        let inv = omega / (2.0 * PI * C_LIGHT * self.t0) + 1.0 / self.lambda0;
        if !(inv.is_finite() && inv > 0.0) {
            return Err(SolqError::Domain(format!(
                "omega = {omega} lies beyond the zero-frequency limit"
            )));
        }
        Ok(1.0 / inv)
    }

    /// Physical distance (meters) for a dimensionless propagation length.
    pub fn xi_to_meters(&self, xi: f64) -> f64 {
        xi * self.z0 / (PI / 2.0)
    }

    /// Dimensionless propagation length for a physical distance in meters.
    pub fn meters_to_xi(&self, z: f64) -> f64 {
        z * (PI / 2.0) / self.z0
    }

    /// Physical time (seconds) for a dimensionless delay.
    pub fn tau_to_seconds(&self, tau: f64) -> f64 {
        tau * self.t0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Values from a 150-fs (FWHM) sech pulse at 1500 nm in fiber with
    // |beta2| = 8.14e-27 s^2/m.
    const T0: f64 = 85.2e-15;
    const LAMBDA0: f64 = 1.5e-6;
    const BETA2: f64 = 8.14e-27;

    fn map() -> PhysicalMap {
        PhysicalMap::new(T0, LAMBDA0, BETA2).unwrap()
    }

    #[test]
    fn soliton_period_near_1_4_m() {
        let z0 = soliton_period_meters(T0, BETA2).unwrap();
        assert!((z0 - 1.4).abs() < 0.01, "z0 = {z0}");
        // Cross-check: invert the period formula from z0 = 1.4 m and a 150-fs
        // FWHM pulse; the implied beta2 must agree with the input within 1%.
        let t0_from_fwhm = 150.0e-15 / SECH_FWHM;
        let beta2_implied = PI / 2.0 * t0_from_fwhm * t0_from_fwhm / 1.4;
        assert!((beta2_implied - BETA2).abs() / BETA2 < 0.01);
    }

    #[test]
    fn z0_consistent_with_fields() {
        let m = map();
        assert!((m.z0 - PI / 2.0 * m.t0 * m.t0 / m.beta2_abs).abs() / m.z0 < 1e-12);
        assert!((m.xi_to_meters(PI / 2.0) - m.z0).abs() < 1e-12 * m.z0);
    }

    #[test]
    fn wavelength_offsets_match_rounded_light_speed_oracle() {
        let m = map();
        // Same expression evaluated with c rounded to 2.998e8 m/s.
        let oracle = |lambda: f64| 2.0 * PI * 2.998e8 * (1.0 / lambda - 1.0 / LAMBDA0) * T0;
        let blue = m.wavelength_to_omega(1490.0e-9).unwrap();
        let red = m.wavelength_to_omega(1510.0e-9).unwrap();
        assert!((blue - oracle(1490.0e-9)).abs() < 5e-4);
        assert!((red - oracle(1510.0e-9)).abs() < 5e-4);
        // Blue side of the carrier is positive and slightly larger in
        // magnitude than the red side at equal nm offset.
        assert!((blue - 0.72).abs() < 0.01, "blue = {blue}");
        assert!((red + 0.71).abs() < 0.01, "red = {red}");
        assert!(blue > 0.0 && red < 0.0);
        assert!(blue.abs() > red.abs());
    }

    #[test]
    fn wavelength_round_trip() {
        let m = map();
        for k in 0..=40 {
            let lambda = 1.40e-6 + k as f64 * 5.0e-9;
            let omega = m.wavelength_to_omega(lambda).unwrap();
            let back = m.omega_to_wavelength(omega).unwrap();
            assert!((back - lambda).abs() / lambda < 1e-12);
        }
        let omega = 1.2;
        let lambda = m.omega_to_wavelength(omega).unwrap();
        assert!((m.wavelength_to_omega(lambda).unwrap() - omega).abs() < 1e-12);
    }

    #[test]
    fn rejects_unphysical_inputs() {
        assert!(soliton_period_meters(0.0, BETA2).is_err());
        assert!(soliton_period_meters(T0, -1.0).is_err());
        assert!(PhysicalMap::new(T0, 0.0, BETA2).is_err());
        assert!(map().wavelength_to_omega(-1.0e-6).is_err());
        // Far below the carrier frequency there is no wavelength to return.
        let huge_red = -2.0 * PI * C_LIGHT * T0 / LAMBDA0;
        assert!(map().omega_to_wavelength(2.0 * huge_red).is_err());
    }
}
