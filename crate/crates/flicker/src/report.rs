//! Running the estimator with timing, and the JSON report it produces.

use std::time::Instant;

use flicker_core::grid::{FlickerGrid, GRID_LEN, IEC_FREQUENCIES};
use flicker_core::metrics::{error_stats, reconstruct_envelope, sensation, ErrorStats};
use flicker_core::pipeline::{run_observed, PipelineOutput};
use flicker_core::{FrequencyMode, PipelineConfig, SampleSeries, WaveformSpec};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Length of the trailing window used for timing and error statistics.
pub const FINAL_WINDOW_S: f64 = 2.0;

/// `S_true` below this switches the S error from relative to absolute.
pub const S_ABSOLUTE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    /// Keep every step's envelopes.
    pub full_trace: bool,
}

#[derive(Debug, Clone)]
pub struct Estimation {
    pub output: PipelineOutput,
    pub sample_rate: f64,
    pub samples: usize,
    /// Absolute index of the first sample in `window_envelopes`.
    pub window_start: i64,
    /// Envelopes of every harmonic over the final window, one row per step.
    pub window_envelopes: Vec<Vec<f64>>,
    /// `(k, envelopes)` for every step when requested.
    pub trace: Vec<(i64, Vec<f64>)>,
    pub timing: TimingReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub estimation_s: f64,
    pub final_window_s: f64,
    pub final_window_estimation_s: f64,
}

pub fn final_window_len(series: &SampleSeries) -> usize {
    ((FINAL_WINDOW_S * series.rate).round() as usize).clamp(1, series.len())
}

/// Runs the two-stage estimator over `series`, timing the whole run and
/// the final window separately.
pub fn estimate(
    series: &SampleSeries,
    config: &PipelineConfig,
    options: RunOptions,
) -> Result<Estimation> {
    let window = final_window_len(series);
    let window_from = series.len() - window;
    let mut window_envelopes = Vec::with_capacity(window);
    let mut trace = Vec::new();
    let started = Instant::now();
    let mut window_started = None;
    let output = run_observed(series, config, |i, p| {
        if i + 1 == window_from {
            window_started = Some(Instant::now());
        }
        let env = &p.envelopes().envelopes;
        if i >= window_from {
            window_envelopes.push(env.clone());
        }
        if options.full_trace {
            trace.push((series.index(i), env.clone()));
        }
    })?;
    let finished = Instant::now();
    let window_started = window_started.unwrap_or(started);
    Ok(Estimation {
        output,
        sample_rate: series.rate,
        samples: series.len(),
        window_start: series.index(window_from),
        window_envelopes,
        trace,
        timing: TimingReport {
            estimation_s: (finished - started).as_secs_f64(),
            final_window_s: window as f64 / series.rate,
            final_window_estimation_s: (finished - window_started).as_secs_f64(),
        },
    })
}

/// Relative amplitudes per grid bin implied by a waveform. Off-grid
/// components are ignored.
pub fn true_relative_amplitudes(spec: &WaveformSpec) -> Vec<f64> {
    let mut out = vec![0.0; GRID_LEN];
    for f in &spec.flickers {
        if let Ok(i) = FlickerGrid::iec().index_of(f.frequency) {
            out[i] += f.relative_amplitude;
        }
    }
    out
}

pub fn true_envelope(spec: &WaveformSpec, order: u32, k: i64) -> f64 {
    spec.harmonics
        .iter()
        .position(|h| h.order == order)
        .map_or(0.0, |i| spec.envelope(i, k))
}

/// `(error, absolute)`: percent error of `estimated` against `truth`, or the
/// absolute difference when `truth` is too small to divide by.
pub fn sensation_error(estimated: f64, truth: f64) -> (f64, bool) {
    if truth < S_ABSOLUTE_THRESHOLD {
        ((estimated - truth).abs(), true)
    } else {
        (100.0 * (estimated - truth).abs() / truth, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStatsDoc {
    pub mean: f64,
    pub variance: f64,
    pub mse: f64,
    pub max_abs: f64,
}

impl From<ErrorStats> for ErrorStatsDoc {
    fn from(s: ErrorStats) -> Self {
        ErrorStatsDoc {
            mean: s.mean,
            variance: s.variance,
            mse: s.mse,
            max_abs: s.max_abs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub mode: String,
    pub used_hz: f64,
    pub tracked_hz: Option<f64>,
    pub confidence_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub order: u32,
    pub amplitude_pu: f64,
    pub phase_deg: f64,
    pub final_envelope_pu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlickerRow {
    pub frequency_hz: f64,
    pub relative_amplitude: f64,
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeAmplitudes {
    pub order: u32,
    pub harmonic_amplitude_pu: f64,
    pub relative_amplitudes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensationDoc {
    pub label: String,
    pub total: f64,
    pub contributions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDoc {
    pub step: u64,
    pub envelopes: Vec<f64>,
    pub phases_deg: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthErrors {
    pub window_s: f64,
    /// Tracked envelope 1 minus the true envelope 1.
    pub envelope_1: ErrorStatsDoc,
    pub envelope_1_relative_rms_pct: f64,
    /// Envelope 1 rebuilt from the final amplitudes minus the true envelope 1.
    pub reconstruction_1: ErrorStatsDoc,
    pub relative_amplitudes: ErrorStatsDoc,
    pub sensation_true: f64,
    pub sensation_error: f64,
    pub sensation_error_absolute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlickerReport {
    pub sample_rate_hz: f64,
    pub samples: usize,
    pub frequency: FrequencyReport,
    pub harmonics: Vec<HarmonicReport>,
    pub relative_amplitudes: Vec<FlickerRow>,
    pub per_envelope: Vec<EnvelopeAmplitudes>,
    pub sensation: SensationDoc,
    pub errors: Option<TruthErrors>,
    pub variance_convention: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub envelope_frames: Option<Vec<FrameDoc>>,
    pub timing: TimingReport,
}

fn mode_name(mode: FrequencyMode) -> String {
    match mode {
        FrequencyMode::Fixed(_) => "fixed".into(),
        FrequencyMode::Tracked => "tracked".into(),
        FrequencyMode::TrackedWithOffset(d) => format!("tracked_with_offset({d})"),
    }
}

/// Envelope-1 errors against a known waveform over the final window.
pub fn truth_errors(est: &Estimation, spec: &WaveformSpec) -> Result<TruthErrors> {
    let out = &est.output;
    let order = out.harmonic_orders[0];
    let window = est.window_envelopes.len();
    let truth: Vec<f64> = (0..window as i64)
        .map(|j| true_envelope(spec, order, est.window_start + j))
        .collect();
    let tracked: Vec<f64> = est.window_envelopes.iter().map(|e| e[0]).collect();
    let envelope_1 = error_stats(&tracked, &truth)?;
    let truth_ms = truth.iter().map(|v| v * v).sum::<f64>() / window as f64;

    let rebuilt = reconstruct_envelope(
        out.harmonic_amplitudes[0],
        &out.relative_amplitudes,
        &out.phases,
        est.window_start,
        window,
        est.sample_rate,
    )?;
    let reconstruction_1 = error_stats(&rebuilt.samples, &truth)?;

    let true_amps = true_relative_amplitudes(spec);
    let relative_amplitudes = error_stats(&out.relative_amplitudes, &true_amps)?;
    let sensation_true = sensation(&true_amps)?.total;
    let (sensation_error, sensation_error_absolute) =
        sensation_error(out.sensation.total, sensation_true);
    Ok(TruthErrors {
        window_s: window as f64 / est.sample_rate,
        envelope_1: envelope_1.into(),
        envelope_1_relative_rms_pct: 100.0 * (envelope_1.mse / truth_ms).sqrt(),
        reconstruction_1: reconstruction_1.into(),
        relative_amplitudes: relative_amplitudes.into(),
        sensation_true,
        sensation_error,
        sensation_error_absolute,
    })
}

pub fn build_report(
    est: &Estimation,
    config: &PipelineConfig,
    truth: Option<&WaveformSpec>,
) -> Result<FlickerReport> {
    let out = &est.output;
    let errors = truth.map(|spec| truth_errors(est, spec)).transpose()?;
    let frames = (config.report_stride > 0).then(|| {
        out.frames
            .iter()
            .map(|f| FrameDoc {
                step: f.step,
                envelopes: f.envelopes.clone(),
                phases_deg: f.phases.iter().map(|p| p.to_degrees()).collect(),
            })
            .collect()
    });
    Ok(FlickerReport {
        sample_rate_hz: est.sample_rate,
        samples: est.samples,
        frequency: FrequencyReport {
            mode: mode_name(config.frequency_mode),
            used_hz: out.frequency,
            tracked_hz: out.frequency_estimate.map(|e| e.frequency),
            confidence_hz: out.frequency_estimate.map(|e| e.confidence_window),
        },
        harmonics: out
            .harmonic_orders
            .iter()
            .enumerate()
            .map(|(i, &order)| HarmonicReport {
                order,
                amplitude_pu: out.harmonic_amplitudes[i],
                phase_deg: out.harmonic_phases[i].to_degrees(),
                final_envelope_pu: out.final_envelopes.envelopes[i],
            })
            .collect(),
        relative_amplitudes: IEC_FREQUENCIES
            .iter()
            .zip(out.relative_amplitudes.iter().zip(&out.phases))
            .map(|(&f, (&a, &p))| FlickerRow {
                frequency_hz: f,
                relative_amplitude: a,
                phase_deg: p.to_degrees(),
            })
            .collect(),
        per_envelope: out
            .harmonic_orders
            .iter()
            .zip(&out.per_envelope)
            .map(|(&order, a)| EnvelopeAmplitudes {
                order,
                harmonic_amplitude_pu: a.harmonic_amplitude,
                relative_amplitudes: a.relative_amplitudes.clone(),
            })
            .collect(),
        sensation: SensationDoc {
            label: out.sensation.reference_table.into(),
            total: out.sensation.total,
            contributions: out.sensation.contributions.clone(),
        },
        errors,
        variance_convention: "population".into(),
        envelope_frames: frames,
        timing: est.timing,
    })
}
