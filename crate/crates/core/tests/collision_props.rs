//! Collision-level properties: conservation laws, linear response of the
//! probe shift, phase dependence, recovery after a complete crossing, and
//! launch-tuning behavior.

use std::sync::Arc;

use solq_core::collision::{
    run_collision, tune_collision_center, CollisionSpec,
};
use solq_core::nlse::{PropagationConfig, Propagator};
use solq_core::{Band, Grid};

const PAPER_GAP: f64 = 1.2;
const PAPER_LENGTH: f64 = 3.2 * std::f64::consts::FRAC_PI_2;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::new(2048, 60.0).unwrap())
}

fn cfg(length: f64) -> PropagationConfig {
    PropagationConfig::new(length)
}

/// Least-squares affine fit y = a + b x returning (a, b, max residual).
fn affine_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let resid = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - a - b * x).abs())
        .fold(0.0, f64::max);
    (a, b, resid)
}

#[test]
fn probe_shift_linear_response_at_weak_coupling() {
    let g = grid();
    let offsets = [-0.02, -0.01, 0.01, 0.02];
    let mut shifts = Vec::new();
    for da in offsets {
        let spec = CollisionSpec::head_on(1.0 + da, 1.0, 5.0, 1.0).unwrap();
        let r = run_collision(&g, &spec, &cfg(1.0), None).unwrap();
        shifts.push(r.probe_shift.unwrap());
    }
    let (_, slope, resid) = affine_fit(&offsets, &shifts);
    // Quadratic remainder stays below a tenth of the linear term.
    let linear_term = slope.abs() * 0.02;
    assert!(
        resid < 0.1 * linear_term,
        "affine residual {resid} vs linear term {linear_term}"
    );
    // The separation-based estimate puts the slope at A/(3 omega0); the
    // measured self-amplitude response is close to A/omega0 instead, three
    // times larger, so this bound records the estimate's breakdown.
    let expected = 1.0 / (3.0 * 5.0);
    assert!(
        (slope - expected).abs() <= 0.15 * expected,
        "measured response slope {slope} is not within 15% of A/(3*omega0) = {expected}; \
         it tracks A/omega0 = {} instead",
        1.0 / 5.0
    );
}

#[test]
fn relative_phase_barely_moves_the_shift() {
    let g = grid();
    let propagator = Propagator::new(g.clone());
    let run = |phase: f64| -> f64 {
        let spec = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, PAPER_LENGTH)
            .unwrap()
            .with_relative_phase(phase);
        solq_core::collision::run_collision_with(&propagator, &spec, &cfg(PAPER_LENGTH), None)
            .unwrap()
            .probe_shift
            .unwrap()
    };
    let phases: Vec<f64> = (0..8).map(|k| k as f64 * std::f64::consts::TAU / 8.0).collect();
    let shifts: Vec<f64> = phases.iter().map(|&p| run(p)).collect();
    let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
    let spread = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - shifts.iter().cloned().fold(f64::INFINITY, f64::min);
    // The gross shift is phase-insensitive only relative to the full band
    // separation; relative to its own mean the interference undulations
    // move it by roughly 30%, so this strict bound documents the gap.
    assert!(
        spread < 0.05 * mean.abs(),
        "shift spread over relative phase is {spread} ({}% of mean {mean}), above the 5% bound",
        (100.0 * spread / mean.abs()).round()
    );
}

#[test]
fn collision_conserves_energy_and_spectral_momentum() {
    let g = grid();
    let spec = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, PAPER_LENGTH).unwrap();
    let u = solq_core::collision::collision_initial(&g, &spec).unwrap();
    let propagator = Propagator::new(g.clone());
    let mut c = cfg(PAPER_LENGTH);
    c.snapshot_every = Some(1000);
    let out = propagator.propagate(&u, &c).unwrap();

    let moment = |e: &solq_core::Envelope| -> (f64, f64) {
        let power = e.spectrum().power();
        let mut num = 0.0;
        let mut scale = 0.0;
        for (&w, &p) in g.omega().iter().zip(&power) {
            num += w * p;
            scale += w.abs() * p;
        }
        (num, scale)
    };
    let e0 = u.energy();
    let (m0, scale0) = moment(&u);
    for snap in &out.snapshots {
        let e = snap.field.energy();
        assert!((e - e0).abs() / e0 < 1e-12, "energy drift at xi {}", snap.xi);
        let (m, _) = moment(&snap.field);
        assert!(
            (m - m0).abs() <= 1e-10 * scale0,
            "spectral momentum drift {} at xi {}",
            (m - m0).abs() / scale0,
            snap.xi
        );
    }
}

/// Amplitude (half the windowed energy) and velocity (windowed spectral
/// centroid) of the pulse on one side of tau = 0.
fn windowed_pulse(g: &Arc<Grid>, field: &solq_core::Envelope, right: bool) -> (f64, f64) {
    let samples: Vec<_> = g
        .time()
        .iter()
        .zip(field.samples())
        .map(|(&t, &s)| if (t >= 0.0) == right { s } else { num_complex::Complex64::default() })
        .collect();
    let piece = solq_core::Envelope::new(g.clone(), samples).unwrap();
    let amplitude = piece.energy() / 2.0;
    let velocity = piece.spectrum().center_frequency(&Band::full(g)).unwrap();
    (amplitude, velocity)
}

#[test]
fn complete_collision_restores_amplitudes_and_velocities() {
    let g = grid();
    // Launch aimed at a crossing at half the run: the full run covers the
    // complete collision with symmetric lead-in and lead-out.
    let spec = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, PAPER_LENGTH).unwrap();
    let u = solq_core::collision::collision_initial(&g, &spec).unwrap();
    let propagator = Propagator::new(g.clone());
    let out = propagator.propagate(&u, &cfg(2.0 * PAPER_LENGTH)).unwrap();
    // The red pulse starts on the left and exits on the right; compare each
    // pulse to its launch parameters by carrier, not by side.
    let (a_red0, v_red0) = windowed_pulse(&g, &u, false);
    let (a_blue0, v_blue0) = windowed_pulse(&g, &u, true);
    let (a_red, v_red) = windowed_pulse(&g, &out.field, true);
    let (a_blue, v_blue) = windowed_pulse(&g, &out.field, false);
    // Window truncation and the far pulse's tail move the windowed centroid
    // at the few-1e-5 level, so the launch sanity check sits at 1e-4.
    assert!((v_red0 + PAPER_GAP).abs() < 1e-4 && (v_blue0 - PAPER_GAP).abs() < 1e-4);
    assert!((a_red - a_red0).abs() < 1e-3, "red amplitude {a_red} vs {a_red0}");
    assert!((a_blue - a_blue0).abs() < 1e-3, "blue amplitude {a_blue} vs {a_blue0}");
    assert!((v_red - v_red0).abs() < 1e-3, "red velocity {v_red} vs {v_red0}");
    assert!((v_blue - v_blue0).abs() < 1e-3, "blue velocity {v_blue} vs {v_blue0}");
}

#[test]
fn tuner_correction_is_small_at_weak_coupling() {
    let g = grid();
    let spec = CollisionSpec::head_on(1.0, 1.0, 5.0, 1.0).unwrap();
    let (tuned, offset) = tune_collision_center(&g, &spec, &cfg(1.0)).unwrap();
    assert!(offset.abs() < 0.05, "offset {offset}");
    assert_eq!(tuned.launch_offset(), offset);
    // The tuned shift cannot be smaller than the untuned one.
    let base = run_collision(&g, &spec, &cfg(1.0), None).unwrap().probe_shift.unwrap();
    let best = run_collision(&g, &tuned, &cfg(1.0), None).unwrap().probe_shift.unwrap();
    assert!(best.abs() >= base.abs() - 1e-6, "tuned {best} vs untuned {base}");
}

#[test]
fn tuned_end_profile_survives_doubling_the_fiber() {
    let g = grid();
    let short = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, 2.5).unwrap();
    let long = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, 5.0).unwrap();
    let (short_tuned, short_offset) = tune_collision_center(&g, &short, &cfg(2.5)).unwrap();
    let (long_tuned, long_offset) = tune_collision_center(&g, &long, &cfg(5.0)).unwrap();
    // Attraction advances the crossing, so the tuner adds separation.
    assert!(short_offset > 0.0, "short offset {short_offset}");
    assert!(long_offset > 0.0, "long offset {long_offset}");
    let short_end = run_collision(&g, &short_tuned, &cfg(2.5), None).unwrap().final_field;
    let long_end = run_collision(&g, &long_tuned, &cfg(5.0), None).unwrap().final_field;
    let peak = short_end
        .samples()
        .iter()
        .map(|s| s.norm_sqr())
        .fold(0.0, f64::max);
    let diff = short_end
        .samples()
        .iter()
        .zip(long_end.samples())
        .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
        .fold(0.0, f64::max);
    assert!(diff < 0.02 * peak, "profile difference {diff} vs peak {peak}");
    eprintln!(
        "tuned offsets: {short_offset:.4} at length 2.5, {long_offset:.4} at 5.0; \
         end-profile difference {:.2e} of peak",
        diff / peak
    );
}
