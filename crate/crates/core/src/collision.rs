//! Two-soliton collision geometry, frequency-shift measurement, and the
//! closed-form estimates used to cross-check it.
//!
//! A collision is arranged so that the free-flight trajectories of a red
//! "signal" soliton and a blue "probe" soliton cross exactly at the fiber
//! end. Measuring the probe's band centroid there captures the largest
//! cross-phase-modulation frequency shift; `tune_collision_center` adjusts
//! the launch separation for the interaction-induced timing advance.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{SolqError, SolqResult};
use crate::field::{Band, Envelope};
use crate::grid::Grid;
use crate::nlse::{PropagationConfig, Propagator};
use crate::units::{PhysicalMap, SECH_FWHM};

/// One fundamental-soliton parameter set: samples follow
/// A sech(A(tau - center)) exp(-i velocity tau + i phase).
///
/// `velocity` is also the spectral center frequency; the envelope drifts at
/// d center / d xi = -velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub amplitude: f64,
    pub velocity: f64,
    pub center: f64,
    pub phase: f64,
}

impl SolitonParams {
    pub fn validate(&self) -> SolqResult<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(SolqError::Config(format!(
                "soliton amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.velocity.is_finite() && self.center.is_finite() && self.phase.is_finite()) {
            return Err(SolqError::Config("soliton parameters must be finite".into()));
        }
        Ok(())
    }

    /// Half width at half maximum of the power profile.
    pub fn half_width(&self) -> f64 {
        SECH_FWHM / (2.0 * self.amplitude)
    }
}

/// Sampled fundamental soliton.
pub fn fundamental_soliton(grid: &Arc<Grid>, p: &SolitonParams) -> SolqResult<Envelope> {
    p.validate()?;
    if p.amplitude * grid.t_window() <= 20.0 {
        return Err(SolqError::Config(format!(
            "window {} too small for amplitude {}: wings would wrap",
            grid.t_window(),
            p.amplitude
        )));
    }
    Ok(Envelope::from_fn(grid.clone(), |t| {
        let env = p.amplitude / (p.amplitude * (t - p.center)).cosh();
        Complex64::from_polar(env, -p.velocity * t + p.phase)
    }))
}

/// Head-on collision whose free-flight trajectories cross at the fiber end.
///
/// Launch centers sit at -+(half_velocity_gap * fiber_length + launch_offset):
/// a positive offset adds separation, delaying the crossing past the exit.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionSpec {
    pub signal: SolitonParams,
    pub probe: SolitonParams,
    half_velocity_gap: f64,
    pub fiber_length: f64,
    pub relative_phase: f64,
    drift: f64,
    launch_offset: f64,
    pub probe_on: bool,
}

impl CollisionSpec {
    pub fn head_on(
        signal_amplitude: f64,
        probe_amplitude: f64,
        half_velocity_gap: f64,
        fiber_length: f64,
    ) -> SolqResult<Self> {
        if !(half_velocity_gap.is_finite() && half_velocity_gap > 0.0) {
            return Err(SolqError::Config(format!(
                "half velocity gap must be positive, got {half_velocity_gap}"
            )));
        }
        if !(fiber_length.is_finite() && fiber_length > 0.0) {
            return Err(SolqError::Config(format!(
                "fiber length must be positive, got {fiber_length}"
            )));
        }
        let mut spec = Self {
            signal: SolitonParams { amplitude: signal_amplitude, velocity: 0.0, center: 0.0, phase: 0.0 },
            probe: SolitonParams { amplitude: probe_amplitude, velocity: 0.0, center: 0.0, phase: 0.0 },
            half_velocity_gap,
            fiber_length,
            relative_phase: 0.0,
            drift: 0.0,
            launch_offset: 0.0,
            probe_on: true,
        };
        spec.rebuild();
        spec.signal.validate()?;
        spec.probe.validate()?;
        Ok(spec)
    }

    fn rebuild(&mut self) {
        let tau_launch = self.half_velocity_gap * self.fiber_length + self.launch_offset;
        self.signal.velocity = -self.half_velocity_gap + self.drift;
        self.probe.velocity = self.half_velocity_gap + self.drift;
        self.signal.center = -tau_launch;
        self.probe.center = tau_launch;
        self.probe.phase = self.relative_phase;
    }

    pub fn with_relative_phase(mut self, phase: f64) -> Self {
        self.relative_phase = phase;
        self.rebuild();
        self
    }

    pub fn with_drift(mut self, drift: f64) -> Self {
        self.drift = drift;
        self.rebuild();
        self
    }

    pub fn with_launch_offset(mut self, offset: f64) -> Self {
        self.launch_offset = offset;
        self.rebuild();
        self
    }

    pub fn with_signal_amplitude(mut self, amplitude: f64) -> Self {
        self.signal.amplitude = amplitude;
        self
    }

    pub fn with_probe_on(mut self, on: bool) -> Self {
        self.probe_on = on;
        self
    }

    pub fn half_velocity_gap(&self) -> f64 {
        self.half_velocity_gap
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn launch_offset(&self) -> f64 {
        self.launch_offset
    }

    /// Free-flight xi span over which the center separation stays within the
    /// mean full width at half maximum.
    pub fn collision_length(&self) -> f64 {
        let mean_fwhm = SECH_FWHM * (1.0 / self.signal.amplitude + 1.0 / self.probe.amplitude) / 2.0;
        mean_fwhm / self.half_velocity_gap
    }

    /// Cross-phase shift the signal accumulates from the free-flying probe
    /// over the fiber, in radians (frozen-trajectory estimate).
    pub fn xpm_phase_estimate(&self) -> f64 {
        let a = self.probe.amplitude;
        let half_sep = (self.probe.center - self.signal.center) / 2.0;
        // 2 int A^2 sech^2(A(2 Omega0 xi - 2 C)) dxi over [0, fiber_length].
        let end = tanh_arg(a, self.half_velocity_gap * self.fiber_length - half_sep);
        let start = tanh_arg(a, -half_sep);
        (a / self.half_velocity_gap) * (end - start)
    }
}

fn tanh_arg(a: f64, x: f64) -> f64 {
    (2.0 * a * x).tanh()
}

/// Superpose the launch solitons.
pub fn collision_initial(grid: &Arc<Grid>, spec: &CollisionSpec) -> SolqResult<Envelope> {
    spec.signal.validate()?;
    spec.probe.validate()?;
    if !spec.probe_on {
        return fundamental_soliton(grid, &spec.signal);
    }
    let separation = spec.probe.center - spec.signal.center;
    let clearance = 2.0 * (spec.signal.half_width() + spec.probe.half_width());
    if separation <= clearance {
        return Err(SolqError::Config(format!(
            "launch separation {separation:.3} overlaps: need more than {clearance:.3}"
        )));
    }
    let signal = fundamental_soliton(grid, &spec.signal)?;
    let probe = fundamental_soliton(grid, &spec.probe)?;
    let samples = signal
        .samples()
        .iter()
        .zip(probe.samples())
        .map(|(s, p)| s + p)
        .collect();
    Envelope::new(grid.clone(), samples)
}

/// First-order estimate of the probe frequency shift for a half collision
/// ending at the crossing point, with a signal amplitude excursion `da_s`
/// around the common amplitude `a`.
pub fn predicted_probe_shift(a: f64, omega0: f64, da_s: f64) -> SolqResult<f64> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(SolqError::Domain(format!(
            "velocity gap must be positive, got {omega0}"
        )));
    }
    if !(a.is_finite() && a > 0.0) {
        return Err(SolqError::Domain(format!("amplitude must be positive, got {a}")));
    }
    Ok(2.0 * a * a / (3.0 * omega0) * (1.0 + da_s / (2.0 * a)))
}

/// Measured outcome of one collision run.
#[derive(Debug, Clone)]
pub struct CollisionResult {
    pub final_field: Envelope,
    /// Probe band centroid minus launch velocity; None without a probe.
    pub probe_shift: Option<f64>,
    /// Signal band centroid minus launch velocity.
    pub signal_shift: f64,
    /// Omega separating the signal and probe measurement bands.
    pub band_split: f64,
    pub collision_length: f64,
    pub collision_length_meters: Option<f64>,
    pub xpm_phase: Option<f64>,
}

/// Propagate the launch state over the fiber and measure both band shifts.
///
/// `cfg.length` is ignored in favor of `spec.fiber_length`. The band split
/// starts at the common drift and is refined once to the midpoint of the two
/// measured centroids, which keeps amplitude-biased collisions classified.
pub fn run_collision(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    cfg: &PropagationConfig,
    map: Option<&PhysicalMap>,
) -> SolqResult<CollisionResult> {
    let propagator = Propagator::new(grid.clone());
    run_collision_with(&propagator, spec, cfg, map)
}

/// As `run_collision`, reusing a caller-held propagator.
pub fn run_collision_with(
    propagator: &Propagator,
    spec: &CollisionSpec,
    cfg: &PropagationConfig,
    map: Option<&PhysicalMap>,
) -> SolqResult<CollisionResult> {
    let grid = propagator.grid();
    let initial = collision_initial(grid, spec)?;
    let run_cfg = PropagationConfig {
        length: spec.fiber_length,
        snapshot_every: None,
        ..*cfg
    };
    let out = propagator.propagate(&initial, &run_cfg)?;
    let spectrum = out.field.spectrum();
    let nyq = grid.omega_nyquist();

    let collision_length = spec.collision_length();
    let collision_length_meters = map.map(|m| m.xi_to_meters(collision_length));

    if !spec.probe_on {
        let full = Band::full(grid);
        let centroid = spectrum.center_frequency(&full)?;
        return Ok(CollisionResult {
            final_field: out.field,
            probe_shift: None,
            signal_shift: centroid - spec.signal.velocity,
            band_split: -nyq,
            collision_length,
            collision_length_meters,
            xpm_phase: None,
        });
    }

    let centroids_at = |split: f64| -> SolqResult<(f64, f64)> {
        let signal_band = Band::new(-nyq, split)?;
        let probe_band = Band::new(split, nyq)?;
        Ok((
            spectrum.center_frequency(&signal_band)?,
            spectrum.center_frequency(&probe_band)?,
        ))
    };
    let (c_s, c_p) = centroids_at(spec.drift)?;
    let split = (c_s + c_p) / 2.0;
    let (c_s, c_p) = centroids_at(split)?;

    Ok(CollisionResult {
        final_field: out.field,
        probe_shift: Some(c_p - spec.probe.velocity),
        signal_shift: c_s - spec.signal.velocity,
        band_split: split,
        collision_length,
        collision_length_meters,
        xpm_phase: Some(spec.xpm_phase_estimate()),
    })
}

/// Bisect the launch-offset derivative of |probe shift| to find the offset
/// that maximizes it, i.e. the launch separation that puts the true
/// collision center at the fiber end. Returns the adjusted spec and the
/// achieved offset.
///
/// The attraction between approaching solitons advances the crossing, so the
/// optimum adds separation (positive offset) for strongly coupled runs.
pub fn tune_collision_center(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    cfg: &PropagationConfig,
) -> SolqResult<(CollisionSpec, f64)> {
    const BRACKET: (f64, f64) = (-1.5, 1.5);
    const MAX_ITERS: usize = 30;
    const WIDTH_TOL: f64 = 2e-3;
    const FD_STEP: f64 = 2e-2;

    if !spec.probe_on {
        return Err(SolqError::Tuning("cannot tune a collision without a probe".into()));
    }
    let propagator = Propagator::new(grid.clone());
    let shift_mag = |offset: f64| -> SolqResult<f64> {
        let s = spec.clone().with_launch_offset(offset);
        let r = run_collision_with(&propagator, &s, cfg, None)?;
        Ok(r.probe_shift.expect("probe is on").abs())
    };
    let slope_sign = |offset: f64| -> SolqResult<f64> {
        Ok(shift_mag(offset + FD_STEP)? - shift_mag(offset - FD_STEP)?)
    };

    // Keep every probed offset on the launchable side of the overlap guard.
    let min_launchable = spec.signal.half_width() + spec.probe.half_width()
        - spec.half_velocity_gap * spec.fiber_length;
    let (lo_edge, hi_edge) = (BRACKET.0.max(min_launchable + 2.0 * FD_STEP), BRACKET.1);
    if lo_edge >= hi_edge {
        return Err(SolqError::Tuning(format!(
            "launchable offset range [{lo_edge}, {hi_edge}] is empty for this geometry"
        )));
    }

    // Coarse scan to locate the peak cell: the far tails of the curve carry
    // interference wiggles that defeat local slope tests, the peak does not.
    const COARSE: usize = 13;
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut points = Vec::with_capacity(COARSE);
    for i in 0..COARSE {
        let x = lo_edge + (hi_edge - lo_edge) * i as f64 / (COARSE - 1) as f64;
        let v = shift_mag(x)?;
        if v > best.1 {
            best = (i, v);
        }
        points.push(x);
    }
    if best.0 == 0 || best.0 == COARSE - 1 {
        return Err(SolqError::Tuning(format!(
            "no interior maximum of |probe shift| in offset bracket [{lo_edge}, {hi_edge}]: \
             largest value sits at the edge {}",
            points[best.0]
        )));
    }

    // Bisection on the slope sign inside the bracketing cells.
    let (mut lo, mut hi) = (points[best.0 - 1], points[best.0 + 1]);
    for _ in 0..MAX_ITERS {
        if hi - lo < WIDTH_TOL {
            break;
        }
        let mid = (lo + hi) / 2.0;
        if slope_sign(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let offset = (lo + hi) / 2.0;
    Ok((spec.clone().with_launch_offset(offset), offset))
}

/// Temporal and spectral power histories on an evenly spaced xi ladder.
#[derive(Debug, Clone)]
pub struct EvolutionMap {
    pub xi: Vec<f64>,
    /// tau axis for the temporal rows.
    pub tau: Vec<f64>,
    /// Ascending omega axis for the spectral rows.
    pub omega: Vec<f64>,
    /// |u(tau)|^2 per row.
    pub temporal: Vec<Vec<f64>>,
    /// |spectrum(omega)|^2 / 2 pi per row, in ascending omega order.
    pub spectral: Vec<Vec<f64>>,
}

/// Record `rows` evenly spaced snapshots of a collision, endpoints included.
pub fn evolution_map(
    grid: &Arc<Grid>,
    spec: &CollisionSpec,
    cfg: &PropagationConfig,
    rows: usize,
) -> SolqResult<EvolutionMap> {
    if rows < 2 {
        return Err(SolqError::Config(format!("need at least 2 rows, got {rows}")));
    }
    let propagator = Propagator::new(grid.clone());
    let mut field = collision_initial(grid, spec)?;
    let n = grid.n_points();
    let mut map = EvolutionMap {
        xi: Vec::with_capacity(rows),
        tau: grid.time().to_vec(),
        omega: grid.omega_sorted(),
        temporal: Vec::with_capacity(rows),
        spectral: Vec::with_capacity(rows),
    };
    let record = |map: &mut EvolutionMap, xi: f64, field: &Envelope| {
        map.xi.push(xi);
        map.temporal.push(field.samples().iter().map(|s| s.norm_sqr()).collect());
        let power = field.spectrum().power();
        let mut row = Vec::with_capacity(n);
        for s in 0..n {
            row.push(power[grid.sorted_to_natural(s)] / std::f64::consts::TAU);
        }
        map.spectral.push(row);
    };
    record(&mut map, 0.0, &field);
    for k in 1..rows {
        let target = spec.fiber_length * k as f64 / (rows - 1) as f64;
        let leg = PropagationConfig {
            length: target - map.xi[k - 1],
            snapshot_every: None,
            ..*cfg
        };
        field = propagator.propagate(&field, &leg)?.field;
        record(&mut map, target, &field);
    }
    Ok(map)
}
