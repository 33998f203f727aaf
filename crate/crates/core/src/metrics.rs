//! Flicker sensation, envelope reconstruction and error statistics.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{GRID_LEN, IEC_FREQUENCIES, IEC_UNITY_AMPLITUDES};
use crate::signal::SampleSeries;

/// Label carried by every [`SensationReport`]. The value is a per-frequency
/// ratio sum, not the output of a full IEC flickermeter.
pub const SENSATION_LABEL: &str = "S (amplitude-ratio proxy, IEC 61000-4-15 unity table)";

#[derive(Debug, Clone, PartialEq)]
pub struct SensationReport {
    pub contributions: Vec<f64>,
    pub total: f64,
    pub reference_table: &'static str,
}

/// `S_i = est_i / ref_i` against the unity-sensation table, `S = sum S_i`.
pub fn sensation(estimated: &[f64]) -> Result<SensationReport> {
    if estimated.len() != GRID_LEN {
        return Err(Error::Shape {
            expected: GRID_LEN,
            found: estimated.len(),
        });
    }
    if estimated.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NumericInput("relative amplitude"));
    }
    let contributions: Vec<f64> = estimated
        .iter()
        .zip(IEC_UNITY_AMPLITUDES.iter())
        .map(|(e, r)| e / r)
        .collect();
    let total = contributions.iter().sum();
    Ok(SensationReport {
        contributions,
        total,
        reference_table: SENSATION_LABEL,
    })
}

/// `V (1 + sum_i (a_i / 2) cos(2 pi F_i k ts + phase_i))` at absolute index `k`.
pub fn envelope_value(
    harmonic_amplitude: f64,
    amplitudes: &[f64],
    phases: &[f64],
    k: i64,
    tau_s: f64,
) -> f64 {
    let t = k as f64 * tau_s;
    let modulation: f64 = IEC_FREQUENCIES
        .iter()
        .zip(amplitudes)
        .zip(phases)
        .map(|((f, a), p)| 0.5 * a * libm::cos(TAU * f * t + p))
        .sum();
    harmonic_amplitude * (1.0 + modulation)
}

/// Envelope over `len` samples starting at absolute index `start_index`.
pub fn reconstruct_envelope(
    harmonic_amplitude: f64,
    amplitudes: &[f64],
    phases: &[f64],
    start_index: i64,
    len: usize,
    rate: f64,
) -> Result<SampleSeries> {
    if amplitudes.len() != GRID_LEN || phases.len() != GRID_LEN {
        return Err(Error::Shape {
            expected: GRID_LEN,
            found: amplitudes.len().min(phases.len()),
        });
    }
    if !(harmonic_amplitude > 0.0) {
        return Err(Error::InvalidSpec("harmonic amplitude must be > 0".into()));
    }
    let tau = 1.0 / rate;
    let samples = (0..len as i64)
        .map(|i| envelope_value(harmonic_amplitude, amplitudes, phases, start_index + i, tau))
        .collect();
    SampleSeries::new(start_index, rate, samples)
}

/// Statistics of `estimated - truth`. Variance is the population variance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorStats {
    pub mean: f64,
    pub variance: f64,
    pub mse: f64,
    pub max_abs: f64,
}

pub fn error_stats(estimated: &[f64], truth: &[f64]) -> Result<ErrorStats> {
    if estimated.len() != truth.len() {
        return Err(Error::Shape {
            expected: truth.len(),
            found: estimated.len(),
        });
    }
    if estimated.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let n = estimated.len() as f64;
    let errors = || estimated.iter().zip(truth).map(|(e, t)| e - t);
    let mean = errors().sum::<f64>() / n;
    let variance = errors().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
    let mse = errors().map(|e| e * e).sum::<f64>() / n;
    let max_abs = errors().fold(0.0f64, |m, e| m.max(e.abs()));
    Ok(ErrorStats {
        mean,
        variance,
        mse,
        max_abs,
    })
}

/// First index `i >= window` from which the trace stays settled: every
/// trailing window ending at or after `i` has `max - min <= tol * |value|`.
/// `None` if the trace never settles for good.
pub fn first_settled_index(trace: &[f64], window: usize, tol: f64) -> Option<usize> {
    if window == 0 || trace.len() <= window {
        return None;
    }
    let mut settled_from = None;
    for end in window..trace.len() {
        let w = &trace[end - window..=end];
        let (lo, hi) = w
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let ok = hi - lo <= tol * trace[end].abs();
        match (ok, settled_from) {
            (true, None) => settled_from = Some(end),
            (false, Some(_)) => settled_from = None,
            _ => {}
        }
    }
    settled_from
}
