//! The two-stage estimator: H-infinity envelope tracking feeding one ADALINE
//! unit per harmonic.

use alloc::vec;
use alloc::vec::Vec;

use crate::adaline::{basis_vector_into, AdalineConfig, AdalineState, FlickerAmplitudes};
use crate::error::{Error, Result};
use crate::frequency::{track_frequency_biased, FrequencyEstimate};
use crate::grid::{FlickerGrid, BASIS_LEN, GRID_LEN};
use crate::hinf::{extract_envelopes, structure_row_into, EnvelopeFrame, HinfConfig, HinfState};
use crate::metrics::{sensation, SensationReport};
use crate::signal::{wrap_phase_symmetric, SampleSeries};

/// Where the power frequency used by the structure row comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyMode {
    Fixed(f64),
    Tracked,
    /// Tracked, then shifted by the given Hz (a biased tracker).
    TrackedWithOffset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub hinf: HinfConfig,
    pub adaline: AdalineConfig,
    pub grid: FlickerGrid,
    pub frequency_mode: FrequencyMode,
    /// Steps between recorded envelope frames; 0 records none.
    pub report_stride: usize,
    /// Starting point for the frequency tracker.
    pub nominal_frequency: f64,
}

impl PipelineConfig {
    pub fn new(harmonic_orders: Vec<u32>) -> Self {
        PipelineConfig {
            hinf: HinfConfig::new(harmonic_orders),
            adaline: AdalineConfig::default(),
            grid: FlickerGrid::iec(),
            frequency_mode: FrequencyMode::Tracked,
            report_stride: 0,
            nominal_frequency: 50.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.hinf.validate()?;
        self.adaline.validate()?;
        if !(self.nominal_frequency > 0.0 && self.nominal_frequency.is_finite()) {
            return Err(Error::InvalidSpec("nominal frequency must be > 0".into()));
        }
        match self.frequency_mode {
            FrequencyMode::Fixed(f) if !(f > 0.0 && f.is_finite()) => {
                Err(Error::InvalidSpec("fixed frequency must be > 0".into()))
            }
            FrequencyMode::TrackedWithOffset(d) if !d.is_finite() => {
                Err(Error::InvalidSpec("frequency offset must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Streaming estimator state. Samples must be pushed in order.
#[derive(Debug, Clone)]
pub struct Pipeline {
    hinf_config: HinfConfig,
    adaline_config: AdalineConfig,
    frequency: f64,
    tau: f64,
    hinf: HinfState,
    units: Vec<AdalineState>,
    row: Vec<f64>,
    basis: Vec<f64>,
    envelopes: EnvelopeFrame,
}

impl Pipeline {
    /// `frequency` is the power frequency the structure row is built with.
    pub fn new(config: &PipelineConfig, rate: f64, frequency: f64) -> Result<Self> {
        config.validate()?;
        if !(rate > 0.0 && rate.is_finite()) || !(frequency > 0.0 && frequency.is_finite()) {
            return Err(Error::InvalidSpec("rate and frequency must be > 0".into()));
        }
        let top = config
            .hinf
            .harmonic_orders
            .iter()
            .copied()
            .max()
            .unwrap_or(1) as f64;
        if rate <= 2.0 * top * frequency {
            return Err(Error::InvalidSpec(alloc::format!(
                "sample rate {rate} Hz cannot carry harmonic {top} of {frequency} Hz"
            )));
        }
        let hinf = HinfState::new(&config.hinf)?;
        let unit = AdalineState::new(&config.adaline)?;
        let envelopes = extract_envelopes(&hinf);
        Ok(Pipeline {
            hinf_config: config.hinf.clone(),
            adaline_config: config.adaline.clone(),
            frequency,
            tau: 1.0 / rate,
            units: vec![unit; config.hinf.harmonic_orders.len()],
            row: vec![0.0; hinf.dim()],
            basis: vec![0.0; BASIS_LEN],
            hinf,
            envelopes,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn steps(&self) -> u64 {
        self.hinf.step
    }

    /// Absorbs the sample taken at absolute index `k`.
    pub fn push(&mut self, k: i64, z: f64) -> Result<()> {
        structure_row_into(
            k,
            self.frequency,
            self.tau,
            &self.hinf_config.harmonic_orders,
            &mut self.row,
        );
        self.hinf.step(&self.hinf_config, z, &self.row)?;
        self.envelopes = extract_envelopes(&self.hinf);
        basis_vector_into(k, self.tau, &mut self.basis);
        for (unit, &e) in self.units.iter_mut().zip(&self.envelopes.envelopes) {
            unit.update(&self.adaline_config, e, &self.basis)?;
        }
        Ok(())
    }

    pub fn envelopes(&self) -> &EnvelopeFrame {
        &self.envelopes
    }

    pub fn hinf_state(&self) -> &HinfState {
        &self.hinf
    }

    pub fn units(&self) -> &[AdalineState] {
        &self.units
    }

    pub fn amplitudes(&self) -> Result<Vec<FlickerAmplitudes>> {
        self.units.iter().map(|u| u.amplitudes()).collect()
    }
}

/// Combines per-envelope estimates into one set of relative amplitudes and
/// phases. Every envelope carries the same modulation, and the noise on a
/// relative amplitude scales as `1 / V_n`, so the complex coefficients are
/// averaged with weights `V_n^2`.
pub fn pool_amplitudes(per_envelope: &[FlickerAmplitudes]) -> (Vec<f64>, Vec<f64>) {
    let total: f64 = per_envelope
        .iter()
        .map(|a| a.harmonic_amplitude * a.harmonic_amplitude)
        .sum();
    let mut amplitudes = Vec::with_capacity(GRID_LEN);
    let mut phases = Vec::with_capacity(GRID_LEN);
    for i in 0..GRID_LEN {
        let (mut re, mut im) = (0.0, 0.0);
        for a in per_envelope {
            let w = a.harmonic_amplitude * a.harmonic_amplitude / total;
            let (s, c) = libm::sincos(a.phases[i]);
            re += w * a.relative_amplitudes[i] * c;
            im += w * a.relative_amplitudes[i] * s;
        }
        amplitudes.push(libm::hypot(re, im));
        phases.push(wrap_phase_symmetric(libm::atan2(im, re)));
    }
    (amplitudes, phases)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Frequency the structure row was built with.
    pub frequency: f64,
    /// Tracker result when the frequency was tracked.
    pub frequency_estimate: Option<FrequencyEstimate>,
    pub harmonic_orders: Vec<u32>,
    /// From the ADALINE DC weights.
    pub harmonic_amplitudes: Vec<f64>,
    /// From the final H-infinity state, radians.
    pub harmonic_phases: Vec<f64>,
    pub per_envelope: Vec<FlickerAmplitudes>,
    /// Pooled `dV_i / V_t`.
    pub relative_amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub sensation: SensationReport,
    pub frames: Vec<EnvelopeFrame>,
    pub final_envelopes: EnvelopeFrame,
    pub steps: u64,
}

/// Resolves the structure-row frequency for `series` under `config`.
pub fn resolve_frequency(
    series: &SampleSeries,
    config: &PipelineConfig,
) -> Result<(f64, Option<FrequencyEstimate>)> {
    let offset = match config.frequency_mode {
        FrequencyMode::Fixed(f) => return Ok((f, None)),
        FrequencyMode::Tracked => 0.0,
        FrequencyMode::TrackedWithOffset(d) => d,
    };
    let est = track_frequency_biased(series, config.nominal_frequency, offset)?;
    Ok((est.frequency, Some(est)))
}

/// Runs the estimator over a whole series.
pub fn run(series: &SampleSeries, config: &PipelineConfig) -> Result<PipelineOutput> {
    run_observed(series, config, |_, _| {})
}

/// Like [`run`], calling `observe(i, &pipeline)` after sample `i` is absorbed.
pub fn run_observed<F>(
    series: &SampleSeries,
    config: &PipelineConfig,
    mut observe: F,
) -> Result<PipelineOutput>
where
    F: FnMut(usize, &Pipeline),
{
    config.validate()?;
    if series.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            available: 0,
        });
    }
    let (frequency, frequency_estimate) = resolve_frequency(series, config)?;
    let mut pipeline = Pipeline::new(config, series.rate, frequency)?;
    let mut frames = Vec::new();
    for (i, &z) in series.samples.iter().enumerate() {
        pipeline.push(series.index(i), z)?;
        observe(i, &pipeline);
        if config.report_stride > 0 && (i + 1) % config.report_stride == 0 {
            frames.push(pipeline.envelopes().clone());
        }
    }
    let per_envelope = pipeline.amplitudes()?;
    let (relative_amplitudes, phases) = pool_amplitudes(&per_envelope);
    let final_envelopes = pipeline.envelopes().clone();
    Ok(PipelineOutput {
        frequency,
        frequency_estimate,
        harmonic_orders: config.hinf.harmonic_orders.clone(),
        harmonic_amplitudes: per_envelope.iter().map(|a| a.harmonic_amplitude).collect(),
        harmonic_phases: final_envelopes.phases.clone(),
        sensation: sensation(&relative_amplitudes)?,
        relative_amplitudes,
        phases,
        per_envelope,
        frames,
        final_envelopes,
        steps: pipeline.steps(),
    })
}
