//! Cross-checks against independent batch solutions.

use flicker_core::adaline::{basis_vector, AdalineConfig, AdalineState};
use flicker_core::baseline::goertzel;
use flicker_core::grid::BASIS_LEN;
use flicker_core::hinf::{structure_row, HinfConfig, HinfState};
use flicker_core::scenarios;
use flicker_core::signal::{synthesize, WaveformSpec};
use nalgebra::{DMatrix, DVector};

const TAU_S: f64 = 1.0 / 1200.0;

fn batch_least_squares(rows: &[Vec<f64>], z: &[f64]) -> DVector<f64> {
    let n = rows[0].len();
    let a = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(z);
    a.svd(true, true).solve(&b, 1e-12).unwrap()
}

fn carriers_only() -> WaveformSpec {
    let mut spec = scenarios::distorted();
    spec.flickers.clear();
    spec.noise.sigma = 0.0;
    spec.sampling.duration = 2.0;
    spec
}

#[test]
fn hinf_state_matches_batch_least_squares() {
    let spec = carriers_only();
    let series = synthesize(&spec).unwrap();
    let orders = spec.harmonic_orders();
    let cfg = HinfConfig::new(orders.clone());
    let mut state = HinfState::new(&cfg).unwrap();
    let mut rows = Vec::new();
    for (k, &z) in series.samples.iter().enumerate() {
        let h = structure_row(k as i64, 50.0, TAU_S, &orders);
        state.step(&cfg, z, &h).unwrap();
        rows.push(h);
    }
    let ls = batch_least_squares(&rows, &series.samples);
    for (i, x) in state.x_hat.iter().enumerate() {
        assert!((x - ls[i]).abs() < 1e-6, "component {i}: {x} vs {}", ls[i]);
    }
}

#[test]
fn hinf_settles_on_a_plain_cosine_in_48_steps() {
    let mut spec = scenarios::single_flicker(5.0, 0.0, 0.0);
    spec.noise.sigma = 0.0;
    let series = synthesize(&spec).unwrap();
    let cfg = HinfConfig::new(vec![1]);
    let mut state = HinfState::new(&cfg).unwrap();
    for k in 0..48 {
        let h = structure_row(k, 50.0, TAU_S, &[1]);
        state.step(&cfg, series.samples[k as usize], &h).unwrap();
    }
    let env = state.envelopes().envelopes[0];
    assert!((env - 1.5).abs() < 1e-3, "{env}");
}

#[test]
fn adaline_matches_batch_least_squares_on_stationary_envelope() {
    // an envelope made only of grid tones, with a few arbitrary coefficients
    let mut truth = vec![0.0; BASIS_LEN];
    truth[0] = 1.2;
    for (i, v) in [
        (2, 0.01),
        (3, -0.004),
        (11, 0.006),
        (20, 0.003),
        (21, 0.002),
        (73, -0.005),
    ] {
        truth[i] = v;
    }
    let cfg = AdalineConfig::default();
    let mut unit = AdalineState::new(&cfg).unwrap();
    let (mut rows, mut targets) = (Vec::new(), Vec::new());
    for k in 0..72_000i64 {
        let x = basis_vector(k, TAU_S);
        let target: f64 = x.iter().zip(&truth).map(|(a, b)| a * b).sum();
        unit.update(&cfg, target, &x).unwrap();
        if k % 7 == 0 {
            rows.push(x);
            targets.push(target);
        }
    }
    // drop the always-zero column before solving
    let reduced: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != 1)
                .map(|(_, v)| *v)
                .collect()
        })
        .collect();
    let ls = batch_least_squares(&reduced, &targets);
    let weights: Vec<f64> = unit
        .weights
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != 1)
        .map(|(_, v)| *v)
        .collect();
    for (i, w) in weights.iter().enumerate() {
        assert!((w - ls[i]).abs() < 1e-3, "weight {i}: {w} vs {}", ls[i]);
    }
}

#[test]
fn goertzel_matches_direct_summation() {
    let series = synthesize(&scenarios::distorted()).unwrap();
    let x = &series.samples[..2400];
    for f in [0.5, 8.8, 25.0, 50.0, 550.0] {
        let (gr, gi) = goertzel(x, f, 1200.0);
        let w = std::f64::consts::TAU * f / 1200.0;
        let (mut nr, mut ni) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            nr += v * (w * j as f64).cos();
            ni -= v * (w * j as f64).sin();
        }
        let mag = nr.hypot(ni);
        assert!((gr - nr).hypot(gi - ni) <= 1e-9 * mag, "{f} Hz");
    }
}
