//! Detection-chain properties that ride on mean-field runs: knife placement,
//! monotone signal-to-probe anticorrelation, and the efficiency ordering of
//! the conditional variance.

use std::sync::Arc;

use solq_core::collision::{collision_initial, CollisionSpec};
use solq_core::nlse::{PropagationConfig, Propagator};
use solq_core::qnd::{
    apply_efficiency, conditional_variance, detect_from_power, knife_position_for_fraction,
    EnsembleStats, MomentSet,
};
use solq_core::{Band, Grid};

const PAPER_GAP: f64 = 1.2;
const PAPER_LENGTH: f64 = 3.2 * std::f64::consts::FRAC_PI_2;
const OMEGA_SEP: f64 = -0.426;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::new(2048, 60.0).unwrap())
}

fn mean_output_power(g: &Arc<Grid>, signal_amplitude: f64) -> Vec<f64> {
    let spec = CollisionSpec::head_on(1.0, 1.0, PAPER_GAP, PAPER_LENGTH)
        .unwrap()
        .with_signal_amplitude(signal_amplitude);
    let u = collision_initial(g, &spec).unwrap();
    let propagator = Propagator::new(g.clone());
    let out = propagator.propagate(&u, &PropagationConfig::new(PAPER_LENGTH)).unwrap();
    out.field.spectrum().power()
}

#[test]
fn stronger_signal_pushes_probe_photons_past_the_knife() {
    let g = grid();
    let base = mean_output_power(&g, 1.0);
    let (cut, achieved) = knife_position_for_fraction(&g, &base, OMEGA_SEP, 0.18).unwrap();
    assert!((achieved - 0.18).abs() < 0.03, "achieved fraction {achieved}");
    assert!(cut > PAPER_GAP, "knife at {cut} should sit above the probe carrier");

    let probe_band = Band::new(OMEGA_SEP, cut).unwrap();
    let photons = 1e8;
    let e0 = 2.0;
    let n_base = detect_from_power(&g, &base, &probe_band, photons, e0).unwrap();
    let bumped = mean_output_power(&g, 1.01);
    let n_bumped = detect_from_power(&g, &bumped, &probe_band, photons, e0).unwrap();
    // A stronger signal deepens the probe's frequency shift, carrying more
    // probe energy past the knife: the kept photon number must drop.
    assert!(
        n_bumped < n_base,
        "probe photons rose from {n_base} to {n_bumped} under a +1% signal"
    );
    let relative = (n_base - n_bumped) / n_base;
    assert!(relative > 1e-4, "anticorrelation too weak to be physical: {relative}");
}

/// Conditional variance against detector efficiency on synthetic
/// anticorrelated moments: losses can only pull it toward shot noise.
#[test]
fn losses_never_improve_the_conditional_variance() {
    let mean = 1e8;
    // Anticorrelated, signal slightly above shot, probe well above.
    let raw = MomentSet {
        mean_signal: mean,
        mean_probe: 0.4 * mean,
        var_signal: 1.3 * mean,
        var_probe: 2.0 * mean,
        covariance: -0.9 * mean,
    };
    let stats_at = |eta_s: f64, eta_p: f64| -> EnsembleStats {
        let (ms, vs) = apply_efficiency(raw.mean_signal, raw.var_signal, eta_s);
        let (mp, vp) = apply_efficiency(raw.mean_probe, raw.var_probe, eta_p);
        let detected = MomentSet {
            mean_signal: ms,
            mean_probe: mp,
            var_signal: vs,
            var_probe: vp,
            covariance: eta_s * eta_p * raw.covariance,
        };
        EnsembleStats {
            n_signal: vec![0.0; 16],
            n_probe: vec![0.0; 16],
            raw,
            detected,
            eta_signal: eta_s,
            eta_probe: eta_p,
            filtered_fraction: 0.0,
        }
    };
    let (v_ideal, _) = conditional_variance(&stats_at(1.0, 1.0)).unwrap();
    assert!(v_ideal < 1.0, "construction should be squeezed, got {v_ideal}");
    for i in 1..=10 {
        let eta_s = i as f64 / 10.0;
        let mut previous = f64::INFINITY;
        for j in 1..=10 {
            let eta_p = j as f64 / 10.0;
            let (v, _) = conditional_variance(&stats_at(eta_s, eta_p)).unwrap();
            assert!(
                v >= v_ideal - 1e-12,
                "v {v} at eta ({eta_s}, {eta_p}) beat the ideal {v_ideal}"
            );
            // A better probe detector always helps the subtraction.
            assert!(v <= previous + 1e-12, "v rose with probe efficiency at ({eta_s}, {eta_p})");
            previous = v;
        }
    }
}
