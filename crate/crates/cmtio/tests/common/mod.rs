//! Shared fixtures for the integration suites: synthetic three-cut data at
//! the flip-chip reference parameters with realistic fit bounds.

use cmtio::fit::{Bounds, CutTrace, FitProblem, GaSettings, PerCutBounds, ResidualSpace, SharedBounds};
use cmtio::model::SystemParams;
use cmtio::presets;
use cmtio::scattering::simulate_trace;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use std::f64::consts::TAU;

/// Microwave frequencies of the three synthetic cuts (rad/s): the reference
/// device's cut currents are unknown, so the fixture places its cuts where
/// an experimenter would, near the avoided crossings of the first, third,
/// and fifth mechanical modes; far-detuned cuts leave the weaker couplings
/// nearly unidentifiable.
pub fn cut_omega_a() -> [f64; 3] {
    [TAU * 2.490e9, TAU * 2.559e9, TAU * 2.648e9]
}

/// Coil currents assigned to the three cuts (mA), consistent with the
/// preset tuning model at the cut microwave frequencies.
pub fn cut_currents_ma() -> [f64; 3] {
    let tuning = presets::flip_chip_tuning();
    cut_omega_a().map(|omega| {
        tuning.i_star_eff * ((tuning.omega_a0 / omega).powi(2) - 1.0).sqrt()
            / tuning.alpha_k.sqrt()
    })
}

/// Truth parameter sets for the three cuts: shared mechanical/coupling
/// values with the per-cut microwave mode, c_offset = 0.8.
pub fn three_cut_truth() -> Vec<SystemParams> {
    let kappa_ai = [TAU * 295e3, TAU * 346e3, TAU * 339e3];
    cut_omega_a()
        .iter()
        .zip(kappa_ai)
        .map(|(&omega_a, kappa)| SystemParams {
            microwave: cmtio::model::ModeParams::new(omega_a, kappa),
            c_offset: 0.8,
            ..presets::flip_chip_bonded()
        })
        .collect()
}

/// Probe grid shared by all three cuts: 2.46-2.68 GHz, covering every
/// hybridized feature of every cut. The step should resolve the narrowest
/// dressed linewidth (~90 kHz), so n_points around 8000 (28 kHz step) keeps
/// peak shapes faithful; coarser grids alias the heights and widths.
pub fn cut_freqs(n_points: usize) -> Vec<f64> {
    let (lo, hi) = (2.46e9, 2.68e9);
    (0..n_points).map(|k| lo + (hi - lo) * k as f64 / (n_points - 1) as f64).collect()
}

/// Synthetic three-cut fit problem. `amplitude_noise` multiplies each data
/// magnitude by `1 + sigma * N(0,1)` with the given seed.
pub fn three_cut_problem(
    n_points: usize,
    ga: GaSettings,
    amplitude_noise: Option<(f64, u64)>,
) -> FitProblem {
    let truth = three_cut_truth();
    let freqs = cut_freqs(n_points);
    let mut noise_rng = amplitude_noise.map(|(sigma, seed)| {
        (Normal::new(0.0, sigma).unwrap(), ChaCha8Rng::seed_from_u64(seed))
    });

    let cuts: Vec<CutTrace> = truth
        .iter()
        .enumerate()
        .map(|(k, params)| {
            let mut trace = simulate_trace(params, &freqs).unwrap();
            if let Some((dist, rng)) = noise_rng.as_mut() {
                for v in &mut trace.values {
                    *v *= 1.0 + dist.sample(rng);
                }
            }
            CutTrace {
                cut_id: format!("cut{k}"),
                trace,
                current_ma: Some(cut_currents_ma()[k]),
            }
        })
        .collect();

    let shared = SharedBounds {
        omega_m: truth[0]
            .mechanical
            .iter()
            .map(|m| Bounds::linear(m.omega - TAU * 5e6, m.omega + TAU * 5e6).unwrap())
            .collect(),
        gamma: vec![Bounds::log(TAU * 10e3, TAU * 3e6).unwrap(); 5],
        g_ab: vec![Bounds::log(TAU * 5e6, TAU * 30e6).unwrap(); 5],
        g_ac: Bounds::log(TAU * 40e6, TAU * 160e6).unwrap(),
        c_offset: Bounds::log(0.2, 3.0).unwrap(),
    };
    let per_cut = truth
        .iter()
        .map(|p| PerCutBounds {
            omega_a: Bounds::linear(p.microwave.omega - TAU * 10e6, p.microwave.omega + TAU * 10e6)
                .unwrap(),
            kappa_ai: Bounds::log(TAU * 50e3, TAU * 2e6).unwrap(),
        })
        .collect();

    FitProblem {
        cuts,
        fixed: truth[0].cavity,
        shared,
        per_cut,
        residual: ResidualSpace::Magnitude,
        ga,
    }
}

/// Largest relative error over all six couplings (g_ac and the five g_ab).
pub fn worst_coupling_error(fitted: &SystemParams, truth: &SystemParams) -> f64 {
    let mut worst: f64 = (fitted.g_ac - truth.g_ac).abs() / truth.g_ac;
    for (f, t) in fitted.g_ab.iter().zip(&truth.g_ab) {
        worst = worst.max((f - t).abs() / t);
    }
    worst
}
