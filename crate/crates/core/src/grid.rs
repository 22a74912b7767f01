//! Periodic time/frequency grid for the dimensionless envelope equation.
//!
//! Time tau spans `[-t_window/2, t_window/2)` with `n_points` uniform samples.
//! The conjugate frequency axis Omega_k = 2*pi*k/t_window is kept in natural
//! FFT order (k = 0..n/2-1, then k = -n/2..-1), so spectral arrays line up
//! with transform output without shifting. The single unpaired bin sits at
//! -Omega_nyquist.

use std::f64::consts::PI;

use crate::error::{SolqError, SolqResult};

/// Sampling geometry shared by envelopes, spectra, and the propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n_points: usize,
    t_window: f64,
    dt: f64,
    d_omega: f64,
    time: Vec<f64>,
    omega: Vec<f64>,
}

impl Grid {
    /// Build a grid with `n_points` samples (power of two, at least 64) over
    /// a window of `t_window` time units.
    pub fn new(n_points: usize, t_window: f64) -> SolqResult<Self> {
        if n_points < 64 || !n_points.is_power_of_two() {
            return Err(SolqError::Config(format!(
                "n_points must be a power of two >= 64, got {n_points}"
            )));
        }
        if !(t_window.is_finite() && t_window > 0.0) {
            return Err(SolqError::Config(format!(
                "t_window must be finite and positive, got {t_window}"
            )));
        }
        let n = n_points;
        let dt = t_window / n as f64;
        let d_omega = 2.0 * PI / t_window;
        let time = (0..n).map(|j| (j as f64 - n as f64 / 2.0) * dt).collect();
        let omega = (0..n)
            .map(|k| {
                let k_signed = if k < n / 2 { k as isize } else { k as isize - n as isize };
                k_signed as f64 * d_omega
            })
            .collect();
        Ok(Self { n_points, t_window, dt, d_omega, time, omega })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn t_window(&self) -> f64 {
        self.t_window
    }

    /// Sample spacing in time.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Bin spacing in angular frequency.
    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    /// Largest resolvable |Omega|; the bin at exactly -nyquist is unpaired.
    pub fn omega_nyquist(&self) -> f64 {
        self.d_omega * (self.n_points as f64 / 2.0)
    }

    /// Time samples, monotonically increasing.
    pub fn time(&self) -> &[f64] {
        &self.time
    }

    /// Frequency samples in natural FFT order.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Frequency samples in monotonically increasing order.
    pub fn omega_sorted(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_points);
        out.extend_from_slice(&self.omega[self.n_points / 2..]);
        out.extend_from_slice(&self.omega[..self.n_points / 2]);
        out
    }

    /// Natural-order index of the s-th bin in increasing-frequency order.
    pub fn sorted_to_natural(&self, s: usize) -> usize {
        debug_assert!(s < self.n_points);
        (s + self.n_points / 2) % self.n_points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_geometry() {
        let g = Grid::new(2048, 60.0).unwrap();
        assert!((g.dt() - 60.0 / 2048.0).abs() < 1e-15);
        assert!((g.d_omega() - 2.0 * PI / 60.0).abs() < 1e-15);
        // Nyquist = pi * n / window, about 107.2 for the default grid.
        assert!((g.omega_nyquist() - 107.233).abs() < 1e-3);
        assert_eq!(g.time().len(), 2048);
        assert!((g.time()[0] + 30.0).abs() < 1e-12);
    }

    #[test]
    fn small_grid_bin_spacing() {
        let g = Grid::new(64, 16.0).unwrap();
        assert!((g.d_omega() - PI / 8.0).abs() < 1e-15);
        assert!((g.omega_nyquist() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn omega_axis_pairs_cancel() {
        let g = Grid::new(256, 20.0).unwrap();
        let n = g.n_points();
        let w = g.omega();
        // k and n-k carry opposite frequencies; only -nyquist is unpaired.
        for k in 1..n / 2 {
            assert_eq!(w[k], -w[n - k]);
        }
        assert_eq!(w[n / 2], -g.omega_nyquist());
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn sorted_axis_is_monotone_and_complete() {
        let g = Grid::new(128, 10.0).unwrap();
        let sorted = g.omega_sorted();
        for pair in sorted.windows(2) {
            assert!(pair[0] < pair[1]);
        }
        for (s, &val) in sorted.iter().enumerate() {
            assert_eq!(g.omega()[g.sorted_to_natural(s)], val);
        }
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(Grid::new(100, 60.0).is_err());
        assert!(Grid::new(32, 60.0).is_err());
        assert!(Grid::new(2048, 0.0).is_err());
        assert!(Grid::new(2048, -1.0).is_err());
    }
}
