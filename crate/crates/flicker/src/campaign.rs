//! Monte Carlo campaigns and the head-to-head comparison with the spectral
//! baseline.

use std::time::Instant;

use flicker_core::baseline::fft_estimate;
use flicker_core::grid::{GRID_LEN, IEC_FREQUENCIES};
use flicker_core::metrics::{error_stats, reconstruct_envelope, sensation};
use flicker_core::{
    BaselineConfig, FlickerComponent, HarmonicComponent, PipelineConfig, SampleSeries, WaveformSpec,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::{
    estimate, final_window_len, true_envelope, true_relative_amplitudes, truth_errors,
    ErrorStatsDoc, RunOptions, TruthErrors,
};

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSpec {
    pub runs: usize,
    pub seed: u64,
    pub harmonic_range: (f64, f64),
    pub flicker_range: (f64, f64),
    /// Harmonic orders, sampling and noise level come from here; amplitudes,
    /// phases and the noise seed are redrawn per run.
    pub base_spec: WaveformSpec,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl MonteCarloSpec {
    pub fn new(base_spec: WaveformSpec, runs: usize, seed: u64) -> Self {
        MonteCarloSpec {
            runs,
            seed,
            harmonic_range: (0.8, 1.2),
            flicker_range: (0.0, 0.02),
            base_spec,
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        for (name, (lo, hi)) in [
            ("harmonic", self.harmonic_range),
            ("flicker", self.flicker_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} range [{lo}, {hi}] is not ordered and >= 0"
                )));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        self.base_spec
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_id: usize,
    pub s_error_pct: Option<f64>,
    pub envelope_error_pct: Option<f64>,
    pub s_error_absolute: bool,
    pub failure: Option<String>,
}

/// Draws the waveform for run `run_id`. Every run has its own ChaCha stream
/// on the campaign seed, so runs are independent of scheduling.
pub fn draw_run_spec(spec: &MonteCarloSpec, run_id: usize) -> WaveformSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(run_id as u64);
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| {
        if hi > lo {
            rng.random_range(lo..=hi)
        } else {
            lo
        }
    };
    let mut out = spec.base_spec.clone();
    out.harmonics = spec
        .base_spec
        .harmonics
        .iter()
        .map(|h| {
            let amplitude = uniform(&mut rng, spec.harmonic_range);
            let phase = uniform(&mut rng, (0.0, 90.0));
            HarmonicComponent::from_degrees(h.order, amplitude, phase)
        })
        .collect();
    out.flickers = IEC_FREQUENCIES
        .iter()
        .map(|&f| {
            let amplitude = uniform(&mut rng, spec.flicker_range);
            let phase = uniform(&mut rng, (0.0, 90.0));
            FlickerComponent::from_degrees(f, amplitude, phase)
        })
        .collect();
    out.noise.seed = rng.random();
    out
}

fn run_one(spec: &MonteCarloSpec, config: &PipelineConfig, run_id: usize) -> RunResult {
    let attempt = || -> Result<(f64, bool, f64)> {
        let wave = draw_run_spec(spec, run_id);
        let series = flicker_core::signal::synthesize(&wave)?;
        let est = estimate(&series, config, RunOptions::default())?;
        let errors = truth_errors(&est, &wave)?;
        Ok((
            errors.sensation_error,
            errors.sensation_error_absolute,
            errors.envelope_1_relative_rms_pct,
        ))
    };
    match attempt() {
        Ok((s, absolute, env)) => RunResult {
            run_id,
            s_error_pct: Some(s),
            envelope_error_pct: Some(env),
            s_error_absolute: absolute,
            failure: None,
        },
        Err(e) => RunResult {
            run_id,
            s_error_pct: None,
            envelope_error_pct: None,
            s_error_absolute: false,
            failure: Some(e.to_string()),
        },
    }
}

/// Runs the campaign. Failed runs are reported, not propagated.
pub fn monte_carlo(spec: &MonteCarloSpec, config: &PipelineConfig) -> Result<Vec<RunResult>> {
    spec.validate()?;
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = spec.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        (0..spec.runs)
            .into_par_iter()
            .map(|i| run_one(spec, config, i))
            .collect()
    }))
}

pub const MC_HEADER: [&str; 5] = [
    "run_id",
    "s_error_pct",
    "envelope_error_pct",
    "s_error_absolute",
    "failure",
];

pub fn format_results(results: &[RunResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(MC_HEADER).map_err(err)?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for r in results {
        w.write_record([
            r.run_id.to_string(),
            opt(r.s_error_pct),
            opt(r.envelope_error_pct),
            r.s_error_absolute.to_string(),
            r.failure.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Data(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub frequency_hz: f64,
    pub hefs: f64,
    pub fft: f64,
    pub truth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub fundamental_amplitude_pu: f64,
    pub sensation: f64,
    /// Estimation wall-clock for the final window (HEFS) or the window
    /// analysis (FFT).
    pub time_s: f64,
    pub reconstruction_1: Option<ErrorStatsDoc>,
    pub relative_amplitudes: Option<ErrorStatsDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub window_s: f64,
    pub rows: Vec<ComparisonRow>,
    pub hefs: MethodSummary,
    pub fft: MethodSummary,
    pub hefs_truth: Option<TruthErrors>,
    pub sensation_true: Option<f64>,
    pub variance_convention: String,
}

/// Runs both estimators on `series`. With `truth`, envelope 1 is rebuilt
/// from each method's final amplitudes and scored over the final window.
pub fn compare(
    series: &SampleSeries,
    config: &PipelineConfig,
    baseline: &BaselineConfig,
    truth: Option<&WaveformSpec>,
) -> Result<ComparisonReport> {
    let est = estimate(series, config, RunOptions::default())?;
    let out = &est.output;
    let started = Instant::now();
    let fft = fft_estimate(series, out.frequency, &out.harmonic_orders, baseline)?;
    let fft_time = started.elapsed().as_secs_f64();

    let window = final_window_len(series);
    let start = series.index(series.len() - window);
    let score =
        |v: f64, amps: &[f64], phases: &[f64], spec: &WaveformSpec| -> Result<ErrorStatsDoc> {
            let rebuilt = reconstruct_envelope(v, amps, phases, start, window, series.rate)?;
            let truth: Vec<f64> = (0..window as i64)
                .map(|j| true_envelope(spec, out.harmonic_orders[0], start + j))
                .collect();
            Ok(error_stats(&rebuilt.samples, &truth)?.into())
        };
    let true_amps = truth.map(true_relative_amplitudes);
    let amp_stats = |est: &[f64]| -> Result<Option<ErrorStatsDoc>> {
        true_amps
            .as_ref()
            .map(|t| error_stats(est, t).map(Into::into))
            .transpose()
            .map_err(Into::into)
    };

    let hefs = MethodSummary {
        fundamental_amplitude_pu: out.harmonic_amplitudes[0],
        sensation: out.sensation.total,
        time_s: est.timing.final_window_estimation_s,
        reconstruction_1: truth
            .map(|s| {
                score(
                    out.harmonic_amplitudes[0],
                    &out.relative_amplitudes,
                    &out.phases,
                    s,
                )
            })
            .transpose()?,
        relative_amplitudes: amp_stats(&out.relative_amplitudes)?,
    };
    let fft_v1 = fft.harmonic_amplitudes[0];
    let fft_summary = MethodSummary {
        fundamental_amplitude_pu: fft_v1,
        sensation: sensation(&fft.relative_amplitudes)?.total,
        time_s: fft_time,
        reconstruction_1: truth
            .map(|s| score(fft_v1, &fft.relative_amplitudes, &fft.phases, s))
            .transpose()?,
        relative_amplitudes: amp_stats(&fft.relative_amplitudes)?,
    };
    let rows = (0..GRID_LEN)
        .map(|i| ComparisonRow {
            frequency_hz: IEC_FREQUENCIES[i],
            hefs: out.relative_amplitudes[i],
            fft: fft.relative_amplitudes[i],
            truth: true_amps.as_ref().map(|t| t[i]),
        })
        .collect();
    Ok(ComparisonReport {
        window_s: window as f64 / series.rate,
        rows,
        hefs,
        fft: fft_summary,
        hefs_truth: truth.map(|s| truth_errors(&est, s)).transpose()?,
        sensation_true: true_amps
            .as_ref()
            .map(|t| sensation(t).map(|r| r.total))
            .transpose()?,
        variance_convention: "population".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use flicker_core::scenarios;

    fn short_spec(runs: usize) -> MonteCarloSpec {
        let mut base = scenarios::distorted();
        base.sampling.duration = 0.5;
        MonteCarloSpec::new(base, runs, 42)
    }

    #[test]
    fn draws_are_in_range_and_reproducible() {
        let spec = short_spec(3);
        let a = draw_run_spec(&spec, 1);
        assert_eq!(a, draw_run_spec(&spec, 1));
        assert_ne!(a, draw_run_spec(&spec, 2));
        assert!(a
            .harmonics
            .iter()
            .all(|h| (0.8..=1.2).contains(&h.amplitude)));
        assert!(a
            .harmonics
            .iter()
            .all(|h| h.phase <= std::f64::consts::FRAC_PI_2));
        assert!(a
            .flickers
            .iter()
            .all(|f| (0.0..=0.02).contains(&f.relative_amplitude)));
        assert_eq!(a.flickers.len(), GRID_LEN);
        assert_eq!(a.harmonic_orders(), spec.base_spec.harmonic_orders());
    }

    #[test]
    fn campaign_is_independent_of_worker_count() {
        let cfg = PipelineConfig::new(scenarios::DISTORTED_ORDERS.to_vec());
        let mut spec = short_spec(4);
        spec.workers = Some(1);
        let serial = monte_carlo(&spec, &cfg).unwrap();
        spec.workers = Some(3);
        let parallel = monte_carlo(&spec, &cfg).unwrap();
        assert_eq!(serial, parallel);
        assert_eq!(
            format_results(&serial).unwrap(),
            format_results(&parallel).unwrap()
        );
    }

    #[test]
    fn zero_flicker_run_uses_absolute_s_error() {
        let cfg = PipelineConfig::new(scenarios::DISTORTED_ORDERS.to_vec());
        let mut spec = short_spec(1);
        spec.flicker_range = (0.0, 0.0);
        let r = monte_carlo(&spec, &cfg).unwrap();
        assert!(r[0].s_error_absolute);
        assert!(r[0].failure.is_none());
    }

    #[test]
    fn failures_are_recorded_per_run() {
        let mut cfg = PipelineConfig::new(scenarios::DISTORTED_ORDERS.to_vec());
        cfg.hinf = flicker_core::HinfConfig::table2(scenarios::DISTORTED_ORDERS.to_vec());
        let r = monte_carlo(&short_spec(2), &cfg).unwrap();
        assert_eq!(r.len(), 2);
        assert!(
            r.iter()
                .all(|r| r.failure.as_deref().is_some_and(|f| f.contains("step 1"))),
            "{r:?}"
        );
        let csv = String::from_utf8(format_results(&r).unwrap()).unwrap();
        assert!(csv.starts_with("run_id,s_error_pct,envelope_error_pct"));
    }

    #[test]
    fn invalid_specs() {
        let mut spec = short_spec(0);
        assert!(spec.validate().is_err());
        spec.runs = 1;
        spec.flicker_range = (0.02, 0.0);
        assert_eq!(spec.validate().unwrap_err().exit_code(), 2);
    }
}
