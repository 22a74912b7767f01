//! Scenario bodies: each takes a resolved run, writes its files into the
//! output directory, and reports what it resolved along the way.

use serde::Serialize;
use solq_core::collision::{
    collision_initial, evolution_map, predicted_probe_shift, run_collision,
    tune_collision_center, CollisionSpec,
};
use solq_core::nlse::Propagator;
use solq_core::qnd::{
    detect_ensemble, knife_position_for_fraction, modulated_outputs, propagate_ensemble,
    qnd_report, DetectionSetup, NoiseConfig, QndReport,
};
use solq_core::SolqResult;

use crate::config::{RunConfig, Scenario};
use crate::output::{write_matrix_csv, write_rows_csv, write_json, ResolvedMeta};
use crate::CliError;

pub struct Outcome {
    pub resolved: ResolvedMeta,
    /// Sweep cells that errored; zero for every other scenario.
    pub partial_failures: usize,
}

pub fn execute(run: &RunConfig) -> Result<Outcome, CliError> {
    match run.scenario {
        Scenario::Evolve => evolve(run),
        Scenario::Collide => collide(run),
        Scenario::Noise => bench(run, true),
        Scenario::Transfer => bench(run, false),
        Scenario::Sweep => sweep(run),
    }
}

fn base_resolved(run: &RunConfig) -> ResolvedMeta {
    ResolvedMeta {
        omega_sep: run.omega_sep,
        omega_cut: run.omega_cut,
        filter_fraction_achieved: None,
        tuned_offset: None,
        fiber_length_meters: run.map.xi_to_meters(run.spec.fiber_length),
    }
}

/// The collision to run: the configured one, or the center-tuned variant.
fn effective_spec(run: &RunConfig, spec: &CollisionSpec) -> SolqResult<(CollisionSpec, Option<f64>)> {
    if run.tune_launch {
        let (tuned, offset) = tune_collision_center(&run.grid, spec, &run.prop)?;
        Ok((tuned, Some(offset)))
    } else {
        Ok((spec.clone(), None))
    }
}

/// Knife position for a spec: configured, or placed on the noiseless end
/// spectrum to absorb the requested probe-energy fraction.
fn resolve_cut(run: &RunConfig, spec: &CollisionSpec) -> SolqResult<(f64, Option<f64>)> {
    if let Some(cut) = run.omega_cut {
        return Ok((cut, None));
    }
    let u = collision_initial(&run.grid, spec)?;
    let out = Propagator::new(run.grid.clone()).propagate(&u, &run.prop)?;
    let power = out.field.spectrum().power();
    let (cut, achieved) =
        knife_position_for_fraction(&run.grid, &power, run.omega_sep, run.filter_fraction)?;
    Ok((cut, Some(achieved)))
}

fn evolve(run: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, tuned_offset) = effective_spec(run, &run.spec)?;
    let map = evolution_map(&run.grid, &spec, &run.prop, run.snapshots)?;
    let dir = &run.output_dir;
    write_matrix_csv(&dir.join("evolution_time.csv"), "xi", &map.tau, &map.xi, &map.temporal)?;
    write_matrix_csv(
        &dir.join("evolution_spectrum.csv"),
        "xi",
        &map.omega,
        &map.xi,
        &map.spectral,
    )?;
    let resolved = ResolvedMeta { tuned_offset, ..base_resolved(run) };
    Ok(Outcome { resolved, partial_failures: 0 })
}

/// One collision's measured numbers.
#[derive(Debug, Clone, Serialize)]
struct CollideReport {
    signal_amplitude: f64,
    probe_amplitude: f64,
    half_velocity_gap: f64,
    fiber_length: f64,
    relative_phase: f64,
    launch_offset: f64,
    probe_shift: Option<f64>,
    predicted_probe_shift: f64,
    signal_shift: f64,
    band_split: f64,
    collision_length: f64,
    collision_length_meters: Option<f64>,
    xpm_phase: Option<f64>,
}

fn collide(run: &RunConfig) -> Result<Outcome, CliError> {
    let (spec, tuned_offset) = effective_spec(run, &run.spec)?;
    let result = run_collision(&run.grid, &spec, &run.prop, Some(&run.map))?;
    let report = CollideReport {
        signal_amplitude: spec.signal.amplitude,
        probe_amplitude: spec.probe.amplitude,
        half_velocity_gap: spec.half_velocity_gap(),
        fiber_length: spec.fiber_length,
        relative_phase: spec.relative_phase,
        launch_offset: spec.launch_offset(),
        probe_shift: result.probe_shift,
        predicted_probe_shift: predicted_probe_shift(
            spec.probe.amplitude,
            spec.half_velocity_gap(),
            spec.signal.amplitude - spec.probe.amplitude,
        )?,
        signal_shift: result.signal_shift,
        band_split: result.band_split,
        collision_length: result.collision_length,
        collision_length_meters: result.collision_length_meters,
        xpm_phase: result.xpm_phase,
    };
    write_json(&run.output_dir.join("report.json"), &report)?;
    let resolved = ResolvedMeta { tuned_offset, ..base_resolved(run) };
    Ok(Outcome { resolved, partial_failures: 0 })
}

/// Shared noise/transfer chain; the noise scenario adds the parabola scan.
fn bench(run: &RunConfig, with_parabola: bool) -> Result<Outcome, CliError> {
    let (spec, tuned_offset) = effective_spec(run, &run.spec)?;
    let (cut, achieved) = resolve_cut(run, &spec)?;
    let setup = DetectionSetup {
        omega_sep: run.omega_sep,
        omega_cut: cut,
        eta_signal: run.eta_signal,
        eta_probe: run.eta_probe,
    };
    let (report, stats) = bench_point(run, &spec, &setup, &run.noise)?;
    write_json(&run.output_dir.join("report.json"), &report)?;
    if with_parabola {
        let a_values: Vec<f64> = (0..=80).map(|i| -2.0 + 0.05 * i as f64).collect();
        let noise_levels = solq_core::qnd::noise_parabola(&stats, &a_values)?;
        let rows: Vec<Vec<f64>> = a_values
            .iter()
            .zip(&noise_levels)
            .map(|(&a, &n)| vec![a, n])
            .collect();
        write_rows_csv(&run.output_dir.join("parabola.csv"), "a,combined_noise", &rows)?;
    }
    let resolved = ResolvedMeta {
        omega_cut: Some(cut),
        filter_fraction_achieved: achieved,
        tuned_offset,
        ..base_resolved(run)
    };
    Ok(Outcome { resolved, partial_failures: 0 })
}

fn bench_point(
    run: &RunConfig,
    spec: &CollisionSpec,
    setup: &DetectionSetup,
    noise: &NoiseConfig,
) -> SolqResult<(QndReport, solq_core::qnd::EnsembleStats)> {
    let ensemble = propagate_ensemble(&run.grid, spec, noise, &run.prop)?;
    let stats = detect_ensemble(&run.grid, &ensemble, setup)?;
    let outputs = modulated_outputs(&run.grid, spec, noise, &run.prop)?;
    let report = qnd_report(
        &run.grid,
        &stats,
        &outputs,
        setup,
        noise.photons_per_soliton,
        2.0 * spec.signal.amplitude,
    )?;
    Ok((report, stats))
}

const SWEEP_HEADER: &str = "half_velocity_gap,relative_phase,omega_cut,v_conditional,v_conditional_error,a_opt,correlation,correlation_error,t_signal,t_signal_error,t_probe,t_probe_error,t_sum,filtered_fraction";

fn sweep(run: &RunConfig) -> Result<Outcome, CliError> {
    let axes = &run.file.sweep;
    let gaps = axis_or(&axes.half_velocity_gap, run.spec.half_velocity_gap());
    let phases = axis_or(&axes.relative_phase, run.spec.relative_phase);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut failures = 0usize;
    let mut achieved_any = None;

    for &gap in &gaps {
        for &phase in &phases {
            // One propagation per collision geometry, re-detected per cut.
            let point = (|| -> SolqResult<_> {
                let spec = run.spec_at(gap, phase)?;
                let (spec, _) = effective_spec(run, &spec)?;
                let cuts = if axes.omega_cut.is_empty() {
                    let (cut, achieved) = resolve_cut(run, &spec)?;
                    (vec![cut], achieved)
                } else {
                    (axes.omega_cut.clone(), None)
                };
                let ensemble = propagate_ensemble(&run.grid, &spec, &run.noise, &run.prop)?;
                let outputs = modulated_outputs(&run.grid, &spec, &run.noise, &run.prop)?;
                Ok((spec, cuts, ensemble, outputs))
            })();
            let (spec, (cuts, achieved), ensemble, outputs) = match point {
                Ok(p) => p,
                Err(e) => {
                    let n = axes.omega_cut.len().max(1);
                    eprintln!("sweep point gap={gap} phase={phase}: {e} ({n} cells skipped)");
                    failures += n;
                    continue;
                }
            };
            achieved_any = achieved_any.or(achieved);
            for &cut in &cuts {
                let cell = (|| -> SolqResult<QndReport> {
                    let setup = DetectionSetup {
                        omega_sep: run.omega_sep,
                        omega_cut: cut,
                        eta_signal: run.eta_signal,
                        eta_probe: run.eta_probe,
                    };
                    let stats = detect_ensemble(&run.grid, &ensemble, &setup)?;
                    qnd_report(
                        &run.grid,
                        &stats,
                        &outputs,
                        &setup,
                        run.noise.photons_per_soliton,
                        2.0 * spec.signal.amplitude,
                    )
                })();
                match cell {
                    Ok(r) => rows.push(vec![
                        gap,
                        phase,
                        cut,
                        r.v_conditional,
                        r.v_conditional_error,
                        r.a_opt,
                        r.correlation,
                        r.correlation_error,
                        r.t_signal,
                        r.t_signal_error,
                        r.t_probe,
                        r.t_probe_error,
                        r.t_signal + r.t_probe,
                        r.filtered_fraction,
                    ]),
                    Err(e) => {
                        eprintln!("sweep cell gap={gap} phase={phase} cut={cut}: {e}");
                        failures += 1;
                    }
                }
            }
        }
    }

    write_rows_csv(&run.output_dir.join("sweep.csv"), SWEEP_HEADER, &rows)?;
    let resolved = ResolvedMeta {
        filter_fraction_achieved: achieved_any,
        ..base_resolved(run)
    };
    Ok(Outcome { resolved, partial_failures: failures })
}

fn axis_or(values: &[f64], base: f64) -> Vec<f64> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}
