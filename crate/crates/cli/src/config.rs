//! Run configuration: a single TOML file resolved against built-in defaults.
//!
//! Every field defaults to the bundled `paper_regime` preset, so an empty
//! file is a valid, complete run description. The scenario and output
//! location come from the command line, never from the file.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use solq_core::collision::CollisionSpec;
use solq_core::nlse::PropagationConfig;
use solq_core::qnd::NoiseConfig;
use solq_core::{Grid, PhysicalMap, SolqError, SolqResult};

/// What the run computes; selected by subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Evolve,
    Collide,
    Noise,
    Transfer,
    Sweep,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Evolve => "evolve",
            Scenario::Collide => "collide",
            Scenario::Noise => "noise",
            Scenario::Transfer => "transfer",
            Scenario::Sweep => "sweep",
        }
    }
}

fn default_fiber_length() -> f64 {
    // 3.2 soliton periods of pi/2 each.
    1.6 * std::f64::consts::PI
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_points: usize,
    pub t_window: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n_points: 2048, t_window: 60.0 }
    }
}

/// Carrier and dispersion scales tying the dimensionless run to hardware.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalSection {
    pub t0_seconds: f64,
    pub lambda0_meters: f64,
    /// Magnitude of the group-velocity dispersion, s^2/m.
    pub beta2_s2_per_m: f64,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        Self {
            t0_seconds: 85.2e-15,
            lambda0_meters: 1.5e-6,
            beta2_s2_per_m: 8.14e-27,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollisionSection {
    pub signal_amplitude: f64,
    pub probe_amplitude: f64,
    /// Half the velocity gap between the counter-moving pulses.
    pub half_velocity_gap: f64,
    pub fiber_length: f64,
    pub relative_phase: f64,
    /// Common velocity added to both pulses.
    pub drift: f64,
    /// Extra launch separation beyond the free-flight crossing distance.
    pub launch_offset: f64,
    /// Search for the launch offset that maximizes the probe shift;
    /// replaces `launch_offset` when set.
    pub tune_launch: bool,
    pub probe_on: bool,
}

impl Default for CollisionSection {
    fn default() -> Self {
        Self {
            signal_amplitude: 1.0,
            probe_amplitude: 1.0,
            half_velocity_gap: 1.2,
            fiber_length: default_fiber_length(),
            relative_phase: 0.0,
            drift: 0.0,
            launch_offset: 0.0,
            tune_launch: false,
            probe_on: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSection {
    pub step: f64,
    /// Rows in the evolution matrices, launch and final states included.
    pub snapshots: usize,
}

impl Default for PropagationSection {
    fn default() -> Self {
        Self { step: 1e-3, snapshots: 33 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    /// Band separation frequency; exclusive with `lambda_sep_nm`.
    pub omega_sep: Option<f64>,
    /// Band separation as a vacuum wavelength in nanometers.
    pub lambda_sep_nm: Option<f64>,
    /// Knife position; when absent it is placed so that `filter_fraction`
    /// of the mean probe-band energy is absorbed.
    pub omega_cut: Option<f64>,
    pub filter_fraction: f64,
    pub eta_signal: f64,
    pub eta_probe: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            omega_sep: None,
            lambda_sep_nm: None,
            omega_cut: None,
            filter_fraction: 0.18,
            eta_signal: 0.745,
            eta_probe: 0.698,
        }
    }
}

/// Default band separation when neither form is given, nanometers.
const DEFAULT_LAMBDA_SEP_NM: f64 = 1506.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub photons_per_soliton: f64,
    pub realizations: usize,
    pub seed: u64,
    pub modulation_depth: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let d = NoiseConfig::default();
        Self {
            photons_per_soliton: d.photons_per_soliton,
            realizations: d.realizations,
            seed: d.seed,
            modulation_depth: d.modulation_depth,
        }
    }
}

/// Sweep axes; an empty list means the axis is pinned at its base value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub omega_cut: Vec<f64>,
    pub relative_phase: Vec<f64>,
    pub half_velocity_gap: Vec<f64>,
}

/// The on-disk schema with paper-regime defaults in every section.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub grid: GridSection,
    pub physical: PhysicalSection,
    pub collision: CollisionSection,
    pub propagation: PropagationSection,
    pub detection: DetectionSection,
    pub noise: NoiseSection,
    pub sweep: SweepSection,
}

/// A validated run: every nested object constructed, the seed override and
/// band separation resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub file: FileConfig,
    pub grid: Arc<Grid>,
    pub map: PhysicalMap,
    pub spec: CollisionSpec,
    pub prop: PropagationConfig,
    pub noise: NoiseConfig,
    pub omega_sep: f64,
    pub omega_cut: Option<f64>,
    pub filter_fraction: f64,
    pub eta_signal: f64,
    pub eta_probe: f64,
    pub tune_launch: bool,
    pub snapshots: usize,
    pub output_dir: PathBuf,
    pub config_sha256: String,
    pub seed_overridden: bool,
}

impl RunConfig {
    pub fn resolve(
        scenario: Scenario,
        raw: &[u8],
        output_dir: PathBuf,
        seed_override: Option<u64>,
    ) -> SolqResult<Self> {
        let text = std::str::from_utf8(raw)
            .map_err(|e| SolqError::Config(format!("config is not UTF-8: {e}")))?;
        let file: FileConfig = toml::from_str(text)
            .map_err(|e| SolqError::Config(format!("config parse failed: {e}")))?;

        let grid = Arc::new(Grid::new(file.grid.n_points, file.grid.t_window)?);
        let p = &file.physical;
        let map = PhysicalMap::new(p.t0_seconds, p.lambda0_meters, p.beta2_s2_per_m)?;
        let spec = build_spec(
            &file.collision,
            file.collision.half_velocity_gap,
            file.collision.relative_phase,
        )?;
        let prop = PropagationConfig::new(file.collision.fiber_length)
            .with_step(file.propagation.step);
        prop.validate()?;

        let mut noise = NoiseConfig {
            photons_per_soliton: file.noise.photons_per_soliton,
            realizations: file.noise.realizations,
            seed: file.noise.seed,
            modulation_depth: file.noise.modulation_depth,
        };
        let seed_overridden = seed_override.is_some();
        if let Some(seed) = seed_override {
            noise.seed = seed;
        }
        noise.validate()?;

        let d = &file.detection;
        let omega_sep = match (d.omega_sep, d.lambda_sep_nm) {
            (Some(_), Some(_)) => {
                return Err(SolqError::Config(
                    "give the band separation as omega_sep or lambda_sep_nm, not both".into(),
                ))
            }
            (Some(w), None) => w,
            (None, Some(nm)) => map.wavelength_to_omega(nm * 1e-9)?,
            (None, None) => map.wavelength_to_omega(DEFAULT_LAMBDA_SEP_NM * 1e-9)?,
        };
        if !(0.0 < d.filter_fraction && d.filter_fraction < 1.0) {
            return Err(SolqError::Config(format!(
                "filter_fraction must lie in (0, 1), got {}",
                d.filter_fraction
            )));
        }
        for (name, eta) in [("eta_signal", d.eta_signal), ("eta_probe", d.eta_probe)] {
            if !(0.0..=1.0).contains(&eta) || !eta.is_finite() {
                return Err(SolqError::Config(format!(
                    "{name} must lie in [0, 1], got {eta}"
                )));
            }
        }

        if matches!(scenario, Scenario::Noise | Scenario::Transfer | Scenario::Sweep)
            && noise.modulation_depth <= 0.0
        {
            return Err(SolqError::Config(format!(
                "{} needs a positive modulation_depth to measure transfer gains",
                scenario.name()
            )));
        }
        let s = &file.sweep;
        if scenario == Scenario::Sweep
            && s.omega_cut.is_empty()
            && s.relative_phase.is_empty()
            && s.half_velocity_gap.is_empty()
        {
            return Err(SolqError::Config(
                "sweep needs at least one nonempty axis under [sweep]".into(),
            ));
        }
        if file.propagation.snapshots < 2 {
            return Err(SolqError::Config(format!(
                "snapshots must be at least 2, got {}",
                file.propagation.snapshots
            )));
        }

        let mut hasher = <sha2::Sha256 as sha2::Digest>::new();
        sha2::Digest::update(&mut hasher, raw);
        let config_sha256 = hex(&sha2::Digest::finalize(hasher));

        Ok(Self {
            scenario,
            grid,
            map,
            spec,
            prop,
            noise,
            omega_sep,
            omega_cut: d.omega_cut,
            filter_fraction: d.filter_fraction,
            eta_signal: d.eta_signal,
            eta_probe: d.eta_probe,
            tune_launch: file.collision.tune_launch,
            snapshots: file.propagation.snapshots,
            output_dir,
            config_sha256,
            seed_overridden,
            file,
        })
    }

    /// Rebuild the collision for a sweep point; other sections unchanged.
    pub fn spec_at(&self, half_velocity_gap: f64, relative_phase: f64) -> SolqResult<CollisionSpec> {
        build_spec(&self.file.collision, half_velocity_gap, relative_phase)
    }
}

fn build_spec(
    c: &CollisionSection,
    half_velocity_gap: f64,
    relative_phase: f64,
) -> SolqResult<CollisionSpec> {
    Ok(CollisionSpec::head_on(
        c.signal_amplitude,
        c.probe_amplitude,
        half_velocity_gap,
        c.fiber_length,
    )?
    .with_relative_phase(relative_phase)
    .with_drift(c.drift)
    .with_launch_offset(c.launch_offset)
    .with_probe_on(c.probe_on))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
