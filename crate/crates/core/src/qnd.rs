//! Semiclassical photon-number noise bench around the collision.
//!
//! Vacuum fluctuations enter as symmetric-ordered Gaussian field noise on
//! top of the mean field, every realization is propagated by the full
//! nonlinear equation, and detection integrates band-limited spectral power
//! into photon-number estimators (minus half a photon per mode). Detector
//! efficiencies are folded into the ensemble moments analytically, which
//! keeps shot-noise inputs exactly shot-noise outputs.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::collision::{collision_initial, CollisionSpec};
use crate::error::{SolqError, SolqResult};
use crate::field::{band_energy_from_power, Band, Envelope};
use crate::grid::Grid;
use crate::nlse::{PropagationConfig, Propagator};
use crate::stats;

/// Smallest photon number for which the linearized noise picture holds.
pub const MIN_PHOTONS: f64 = 1e6;

/// Monte Carlo noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Mean photon number of the unmodulated signal soliton.
    pub photons_per_soliton: f64,
    pub realizations: usize,
    pub seed: u64,
    /// Fractional amplitude offset for transfer-gain runs.
    pub modulation_depth: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { photons_per_soliton: 1e8, realizations: 1000, seed: 1, modulation_depth: 1e-3 }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> SolqResult<()> {
        if !(self.photons_per_soliton.is_finite() && self.photons_per_soliton >= MIN_PHOTONS) {
            return Err(SolqError::Config(format!(
                "photons_per_soliton must be at least {MIN_PHOTONS:.0e}, got {}",
                self.photons_per_soliton
            )));
        }
        if self.realizations < 2 {
            return Err(SolqError::Config(format!(
                "need at least 2 realizations, got {}",
                self.realizations
            )));
        }
        if !(0.0..=1e-2).contains(&self.modulation_depth) {
            return Err(SolqError::Config(format!(
                "modulation_depth must lie in [0, 1e-2], got {}",
                self.modulation_depth
            )));
        }
        Ok(())
    }
}

/// Detection chain geometry and efficiencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSetup {
    /// Boundary between the signal band below and the probe band above.
    pub omega_sep: f64,
    /// Knife edge: bins at or above this frequency are absorbed.
    pub omega_cut: f64,
    pub eta_signal: f64,
    pub eta_probe: f64,
}

impl DetectionSetup {
    pub fn validate(&self) -> SolqResult<()> {
        if !(self.omega_sep.is_finite() && self.omega_cut.is_finite() && self.omega_sep < self.omega_cut)
        {
            return Err(SolqError::Config(format!(
                "need omega_sep < omega_cut, got {} and {}",
                self.omega_sep, self.omega_cut
            )));
        }
        for (name, eta) in [("eta_signal", self.eta_signal), ("eta_probe", self.eta_probe)] {
            if !(0.0..=1.0).contains(&eta) {
                return Err(SolqError::Config(format!("{name} must lie in [0,1], got {eta}")));
            }
        }
        Ok(())
    }
}

/// One realization of symmetric-ordered vacuum noise: independent complex
/// Gaussian per sample with per-quadrature variance e0 / (4 N_ph dt).
pub fn sample_vacuum_noise(
    grid: &Arc<Grid>,
    photons: f64,
    e0: f64,
    rng: &mut impl Rng,
) -> Envelope {
    let sigma = (e0 / (4.0 * photons * grid.dt())).sqrt();
    let samples = (0..grid.n_points())
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect();
    Envelope::new(grid.clone(), samples).expect("sample count matches grid")
}

/// Bins whose frequency falls in `band`.
pub fn band_bin_count(grid: &Grid, band: &Band) -> usize {
    grid.omega().iter().filter(|&&w| band.contains(w)).count()
}

/// Photon-number estimator over a band: energy scaled to photons minus half
/// a photon per contributing mode.
pub fn detect_photon_number(u: &Envelope, band: &Band, photons: f64, e0: f64) -> SolqResult<f64> {
    let power = u.spectrum().power();
    detect_from_power(u.grid(), &power, band, photons, e0)
}

/// As `detect_photon_number` on a precomputed spectral power vector.
pub fn detect_from_power(
    grid: &Grid,
    power: &[f64],
    band: &Band,
    photons: f64,
    e0: f64,
) -> SolqResult<f64> {
    let energy = band_energy_from_power(grid, power, band)?;
    let modes = band_bin_count(grid, band) as f64;
    Ok(photons / e0 * energy - modes / 2.0)
}

/// Beam-splitter loss applied to photon-number moments. Shot-limited input
/// (variance == mean) stays exactly shot limited.
pub fn apply_efficiency(mean: f64, variance: f64, eta: f64) -> (f64, f64) {
    (eta * mean, eta * eta * (variance - mean) + eta * mean)
}

/// First and second moments of the two detected photon-number streams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean_signal: f64,
    pub mean_probe: f64,
    pub var_signal: f64,
    pub var_probe: f64,
    pub covariance: f64,
}

impl MomentSet {
    pub fn from_samples(n_signal: &[f64], n_probe: &[f64]) -> Self {
        Self {
            mean_signal: stats::mean(n_signal),
            mean_probe: stats::mean(n_probe),
            var_signal: stats::variance(n_signal),
            var_probe: stats::variance(n_probe),
            covariance: stats::covariance(n_signal, n_probe),
        }
    }

    pub fn with_efficiency(&self, eta_signal: f64, eta_probe: f64) -> Self {
        let (mean_signal, var_signal) =
            apply_efficiency(self.mean_signal, self.var_signal, eta_signal);
        let (mean_probe, var_probe) = apply_efficiency(self.mean_probe, self.var_probe, eta_probe);
        Self {
            mean_signal,
            mean_probe,
            var_signal,
            var_probe,
            covariance: eta_signal * eta_probe * self.covariance,
        }
    }
}

/// Detected ensemble: raw detector-plane samples, their moments, and the
/// same moments after the efficiency model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_signal: Vec<f64>,
    pub n_probe: Vec<f64>,
    pub raw: MomentSet,
    pub detected: MomentSet,
    pub eta_signal: f64,
    pub eta_probe: f64,
    /// Mean probe-band energy fraction removed by the knife edge.
    pub filtered_fraction: f64,
}

impl EnsembleStats {
    pub fn realizations(&self) -> usize {
        self.n_signal.len()
    }
}

/// Per-realization propagated spectral power, reusable across detection
/// geometries (every band/knife choice reads the same stored spectra).
#[derive(Debug, Clone)]
pub struct PropagatedEnsemble {
    pub power_spectra: Vec<Vec<f64>>,
    pub photons: f64,
    pub e0: f64,
}

/// Propagate mean field plus fresh vacuum noise for every realization.
///
/// Realization r draws from stream r of a counter-based generator seeded by
/// `noise.seed`, so results are independent of thread count and schedule.
pub fn propagate_ensemble(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    noise: &NoiseConfig,
    cfg: &PropagationConfig,
) -> SolqResult<PropagatedEnsemble> {
    noise.validate()?;
    cfg.validate()?;
    let mean_field = collision_initial(grid, spec)?;
    let e0 = 2.0 * spec.signal.amplitude;
    let propagator = Propagator::new(grid.clone());

    let results: Vec<SolqResult<Vec<f64>>> = (0..noise.realizations)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
            rng.set_stream(r as u64);
            let perturbation = sample_vacuum_noise(grid, noise.photons_per_soliton, e0, &mut rng);
            let mut samples = mean_field.samples().to_vec();
            for (s, p) in samples.iter_mut().zip(perturbation.samples()) {
                *s += p;
            }
            let u = Envelope::new(grid.clone(), samples).expect("length matches grid");
            let out = propagator.propagate(&u, cfg).map_err(|e| match e {
                SolqError::Propagation { xi, msg } => SolqError::Propagation {
                    xi,
                    msg: format!("realization {r}: {msg}"),
                },
                SolqError::Numeric(msg) => SolqError::Numeric(format!("realization {r}: {msg}")),
                other => other,
            })?;
            Ok(out.field.spectrum().power())
        })
        .collect();

    let mut power_spectra = Vec::with_capacity(noise.realizations);
    for res in results {
        power_spectra.push(res?);
    }
    Ok(PropagatedEnsemble { power_spectra, photons: noise.photons_per_soliton, e0 })
}

/// Measurement bands implied by a detection setup on a grid: signal below
/// the separation, probe from the separation to the knife, absorbed beyond.
/// A knife at or past the Nyquist edge absorbs nothing.
fn detection_bands(grid: &Grid, setup: &DetectionSetup) -> SolqResult<(Band, Band, Option<Band>)> {
    let nyq = grid.omega_nyquist();
    if setup.omega_sep <= -nyq || setup.omega_sep >= nyq {
        return Err(SolqError::Config(format!(
            "omega_sep {} outside the resolvable range +-{nyq}",
            setup.omega_sep
        )));
    }
    let cut = setup.omega_cut.min(nyq);
    if cut <= setup.omega_sep {
        return Err(SolqError::Config(format!(
            "knife position {} leaves no probe band above omega_sep {}",
            cut, setup.omega_sep
        )));
    }
    let signal = Band::new(-nyq, setup.omega_sep)?;
    let probe = Band::new(setup.omega_sep, cut)?;
    let absorbed = if cut < nyq { Some(Band::new(cut, nyq)?) } else { None };
    Ok((signal, probe, absorbed))
}

/// Detect every stored realization through one detection geometry.
pub fn detect_ensemble(
    grid: &Grid,
    ensemble: &PropagatedEnsemble,
    setup: &DetectionSetup,
) -> SolqResult<EnsembleStats> {
    setup.validate()?;
    let (signal_band, probe_band, absorbed_band) = detection_bands(grid, setup)?;
    let r = ensemble.power_spectra.len();
    let mut n_signal = Vec::with_capacity(r);
    let mut n_probe = Vec::with_capacity(r);
    let mut kept = stats::CompensatedSum::new();
    let mut absorbed = stats::CompensatedSum::new();
    for power in &ensemble.power_spectra {
        n_signal.push(detect_from_power(grid, power, &signal_band, ensemble.photons, ensemble.e0)?);
        n_probe.push(detect_from_power(grid, power, &probe_band, ensemble.photons, ensemble.e0)?);
        kept.add(band_energy_from_power(grid, power, &probe_band)?);
        if let Some(band) = &absorbed_band {
            absorbed.add(band_energy_from_power(grid, power, band)?);
        }
    }
    let pre_knife = kept.value() + absorbed.value();
    let filtered_fraction = if pre_knife > 0.0 { absorbed.value() / pre_knife } else { 0.0 };
    let raw = MomentSet::from_samples(&n_signal, &n_probe);
    let detected = raw.with_efficiency(setup.eta_signal, setup.eta_probe);
    Ok(EnsembleStats {
        n_signal,
        n_probe,
        raw,
        detected,
        eta_signal: setup.eta_signal,
        eta_probe: setup.eta_probe,
        filtered_fraction,
    })
}

/// Propagate and detect one noisy ensemble.
pub fn run_ensemble(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    setup: &DetectionSetup,
    noise: &NoiseConfig,
    cfg: &PropagationConfig,
) -> SolqResult<EnsembleStats> {
    let ensemble = propagate_ensemble(grid, spec, noise, cfg)?;
    detect_ensemble(grid, &ensemble, setup)
}

/// Conditional variance of the signal given the probe readout, normalized to
/// detected signal shot noise, with the minimizing attenuation.
pub fn conditional_variance(stats: &EnsembleStats) -> SolqResult<(f64, f64)> {
    if stats.realizations() < 10 {
        return Err(SolqError::Measurement(format!(
            "need at least 10 realizations for a conditional variance, got {}",
            stats.realizations()
        )));
    }
    let m = &stats.detected;
    if m.var_probe <= 0.0 {
        return Err(SolqError::Measurement("degenerate probe variance".into()));
    }
    if m.mean_signal <= 0.0 {
        return Err(SolqError::Measurement(format!(
            "nonpositive detected signal mean {}",
            m.mean_signal
        )));
    }
    let a_opt = -m.covariance / m.var_probe;
    let v = (m.var_signal - m.covariance * m.covariance / m.var_probe) / m.mean_signal;
    Ok((v, a_opt))
}

/// Pearson correlation of the two detected photon-number streams.
pub fn correlation_coefficient(stats: &EnsembleStats) -> SolqResult<f64> {
    let m = &stats.detected;
    if m.var_signal <= 0.0 || m.var_probe <= 0.0 {
        return Err(SolqError::Measurement("zero variance in a detection band".into()));
    }
    Ok(m.covariance / (m.var_signal.sqrt() * m.var_probe.sqrt()))
}

/// Var(n_S + a n_P) / <n_S> for each attenuation in `a_values`.
pub fn noise_parabola(stats: &EnsembleStats, a_values: &[f64]) -> SolqResult<Vec<f64>> {
    if a_values.is_empty() {
        return Err(SolqError::Config("need at least one attenuation value".into()));
    }
    let m = &stats.detected;
    if m.mean_signal <= 0.0 {
        return Err(SolqError::Measurement(format!(
            "nonpositive detected signal mean {}",
            m.mean_signal
        )));
    }
    Ok(a_values
        .iter()
        .map(|a| (m.var_signal + 2.0 * a * m.covariance + a * a * m.var_probe) / m.mean_signal)
        .collect())
}

/// Band-mean photon numbers of the two noiseless amplitude-offset runs, for
/// transfer-gain finite differences.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulatedOutputs {
    pub power_minus: Vec<f64>,
    pub power_plus: Vec<f64>,
    /// Input signal photon-number difference between the two runs.
    pub delta_n_in: f64,
}

/// Run the mean field with signal amplitude scaled by (1 -+ mu), no noise.
pub fn modulated_outputs(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    noise: &NoiseConfig,
    cfg: &PropagationConfig,
) -> SolqResult<ModulatedOutputs> {
    noise.validate()?;
    let mu = noise.modulation_depth;
    if mu <= 0.0 {
        return Err(SolqError::Measurement(
            "modulation depth must be positive to measure transfer gains".into(),
        ));
    }
    let a = spec.signal.amplitude;
    let e0 = 2.0 * a;
    let propagator = Propagator::new(grid.clone());
    let run = |scale: f64| -> SolqResult<Vec<f64>> {
        let s = spec.clone().with_signal_amplitude(a * scale);
        let u = collision_initial(grid, &s)?;
        let out = propagator.propagate(&u, &PropagationConfig { length: spec.fiber_length, ..*cfg })?;
        Ok(out.field.spectrum().power())
    };
    let power_minus = run(1.0 - mu)?;
    let power_plus = run(1.0 + mu)?;
    // Launch signal energy is 2 A (1 +- mu): the photon difference is exact.
    let delta_n_in = noise.photons_per_soliton / e0 * (4.0 * a * mu);
    Ok(ModulatedOutputs { power_minus, power_plus, delta_n_in })
}

/// Transfer coefficients and the gains behind them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TransferCoefficients {
    /// Output photons per input signal photon, per band, before efficiency.
    pub gain_signal: f64,
    pub gain_probe: f64,
    /// SNR transfer with the measured output noise in the denominator.
    pub t_signal: f64,
    pub t_probe: f64,
    /// Alternate normalization: output shot noise in the denominator.
    pub t_signal_shot: f64,
    pub t_probe_shot: f64,
}

/// SNR transfer at efficiency eta for one band.
///
/// Input SNR is shot limited: SNR_in = n_in. All stated quantities sit at
/// the detector plane: gain and input mean scale by eta, the output noise is
/// the efficiency-folded band variance.
fn transfer_at(eta: f64, gain: f64, n_in: f64, raw_mean: f64, raw_var: f64) -> (f64, f64) {
    let (mean, var) = apply_efficiency(raw_mean, raw_var, eta);
    let numerator = (eta * gain) * (eta * gain) * (eta * n_in);
    (numerator / var, numerator / mean)
}

/// Transfer coefficients from modulated mean-field outputs plus the
/// unmodulated ensemble's noise.
///
/// Both coefficients are evaluated at the signal-chain efficiency: the
/// signal channel is measured in and out on the same detector, and the probe
/// channel is corrected for the signal/probe efficiency difference by
/// folding its moments at eta_signal as well.
pub fn transfer_from_outputs(
    grid: &Grid,
    outputs: &ModulatedOutputs,
    setup: &DetectionSetup,
    photons: f64,
    e0: f64,
    stats: &EnsembleStats,
) -> SolqResult<TransferCoefficients> {
    setup.validate()?;
    let (signal_band, probe_band, _) = detection_bands(grid, setup)?;
    let band_delta = |band: &Band| -> SolqResult<f64> {
        let minus = detect_from_power(grid, &outputs.power_minus, band, photons, e0)?;
        let plus = detect_from_power(grid, &outputs.power_plus, band, photons, e0)?;
        Ok(plus - minus)
    };
    let gain_signal = band_delta(&signal_band)? / outputs.delta_n_in;
    let gain_probe = band_delta(&probe_band)? / outputs.delta_n_in;
    let n_in = photons;
    let eta = setup.eta_signal;
    let (t_signal, t_signal_shot) =
        transfer_at(eta, gain_signal, n_in, stats.raw.mean_signal, stats.raw.var_signal);
    let (t_probe, t_probe_shot) =
        transfer_at(eta, gain_probe, n_in, stats.raw.mean_probe, stats.raw.var_probe);
    Ok(TransferCoefficients {
        gain_signal,
        gain_probe,
        t_signal,
        t_probe,
        t_signal_shot,
        t_probe_shot,
    })
}

/// Transfer coefficients for a spec, running the two modulated mean fields.
pub fn transfer_coefficients(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    setup: &DetectionSetup,
    noise: &NoiseConfig,
    cfg: &PropagationConfig,
    stats: &EnsembleStats,
) -> SolqResult<TransferCoefficients> {
    let outputs = modulated_outputs(grid, spec, noise, cfg)?;
    transfer_from_outputs(grid, &outputs, setup, noise.photons_per_soliton, 2.0 * spec.signal.amplitude, stats)
}

/// Every bench metric with batch-mean standard errors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QndReport {
    pub v_conditional: f64,
    pub v_conditional_error: f64,
    pub a_opt: f64,
    pub a_opt_error: f64,
    pub correlation: f64,
    pub correlation_error: f64,
    pub t_signal: f64,
    pub t_signal_error: f64,
    pub t_probe: f64,
    pub t_probe_error: f64,
    pub t_signal_shot: f64,
    pub t_probe_shot: f64,
    pub gain_signal: f64,
    pub gain_probe: f64,
    pub mean_signal: f64,
    pub mean_probe: f64,
    pub var_signal: f64,
    pub var_probe: f64,
    pub covariance: f64,
    pub filtered_fraction: f64,
    pub realizations: usize,
}

const ERROR_BATCHES: usize = 10;

/// Assemble the full report from one detected ensemble and its matching
/// modulated outputs.
pub fn qnd_report(
    grid: &Grid,
    stats: &EnsembleStats,
    outputs: &ModulatedOutputs,
    setup: &DetectionSetup,
    photons: f64,
    e0: f64,
) -> SolqResult<QndReport> {
    if stats.realizations() < 2 * ERROR_BATCHES {
        return Err(SolqError::Measurement(format!(
            "batch error estimates need at least {} realizations, got {}",
            2 * ERROR_BATCHES,
            stats.realizations()
        )));
    }
    let (v, a_opt) = conditional_variance(stats)?;
    let correlation = correlation_coefficient(stats)?;
    let transfer = transfer_from_outputs(grid, outputs, setup, photons, e0, stats)?;

    let eta_s = stats.eta_signal;
    let eta_p = stats.eta_probe;
    let folded = move |xs: &[f64], ys: &[f64]| MomentSet::from_samples(xs, ys).with_efficiency(eta_s, eta_p);
    let v_err = stats::batch_standard_error(&stats.n_signal, &stats.n_probe, ERROR_BATCHES, |x, y| {
        let m = folded(x, y);
        (m.var_signal - m.covariance * m.covariance / m.var_probe) / m.mean_signal
    });
    let a_err = stats::batch_standard_error(&stats.n_signal, &stats.n_probe, ERROR_BATCHES, |x, y| {
        let m = folded(x, y);
        -m.covariance / m.var_probe
    });
    let c_err = stats::batch_standard_error(&stats.n_signal, &stats.n_probe, ERROR_BATCHES, |x, y| {
        let m = folded(x, y);
        m.covariance / (m.var_signal.sqrt() * m.var_probe.sqrt())
    });
    let n_in = photons;
    let gain_s = transfer.gain_signal;
    let gain_p = transfer.gain_probe;
    let eta = setup.eta_signal;
    let ts_err = stats::batch_standard_error(&stats.n_signal, &stats.n_probe, ERROR_BATCHES, move |x, y| {
        let m = MomentSet::from_samples(x, y);
        transfer_at(eta, gain_s, n_in, m.mean_signal, m.var_signal).0
    });
    let tp_err = stats::batch_standard_error(&stats.n_signal, &stats.n_probe, ERROR_BATCHES, move |x, y| {
        let m = MomentSet::from_samples(x, y);
        transfer_at(eta, gain_p, n_in, m.mean_probe, m.var_probe).0
    });

    Ok(QndReport {
        v_conditional: v,
        v_conditional_error: v_err,
        a_opt,
        a_opt_error: a_err,
        correlation,
        correlation_error: c_err,
        t_signal: transfer.t_signal,
        t_signal_error: ts_err,
        t_probe: transfer.t_probe,
        t_probe_error: tp_err,
        t_signal_shot: transfer.t_signal_shot,
        t_probe_shot: transfer.t_probe_shot,
        gain_signal: transfer.gain_signal,
        gain_probe: transfer.gain_probe,
        mean_signal: stats.detected.mean_signal,
        mean_probe: stats.detected.mean_probe,
        var_signal: stats.detected.var_signal,
        var_probe: stats.detected.var_probe,
        covariance: stats.detected.covariance,
        filtered_fraction: stats.filtered_fraction,
        realizations: stats.realizations(),
    })
}

/// Place the knife so that it absorbs `fraction` of the mean energy above
/// `omega_sep`, as closely as single bins allow. Returns the cut frequency
/// and the achieved fraction.
pub fn knife_position_for_fraction(
    grid: &Grid,
    power: &[f64],
    omega_sep: f64,
    fraction: f64,
) -> SolqResult<(f64, f64)> {
    if !(0.0..1.0).contains(&fraction) || fraction <= 0.0 {
        return Err(SolqError::Config(format!(
            "target fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let nyq = grid.omega_nyquist();
    let band = Band::new(omega_sep, nyq)?;
    let total = band_energy_from_power(grid, power, &band)?;
    if total <= 0.0 {
        return Err(SolqError::Measurement(
            "no energy above the separation frequency to place a knife in".into(),
        ));
    }
    // Walk bins downward from the Nyquist edge, accumulating absorbed energy.
    let n = grid.n_points();
    let omega = grid.omega();
    let scale = grid.d_omega() / std::f64::consts::TAU;
    let mut best = (nyq, 0.0f64);
    let mut acc = 0.0;
    for s in (0..n).rev() {
        let k = grid.sorted_to_natural(s);
        let w = omega[k];
        if w < omega_sep {
            break;
        }
        let f_before = acc / total;
        acc += power[k] * scale;
        let f_after = acc / total;
        // A cut just below this bin absorbs everything accumulated so far.
        if (f_after - fraction).abs() < (best.1 - fraction).abs() {
            best = (w, f_after);
        }
        if f_before > fraction {
            break;
        }
    }
    Ok(best)
}
