//! Generative model for modulated, harmonic-rich, noisy voltage waveforms.
//!
//! A sample at index `k` is
//!
//! ```text
//! z_k = sum_n V_n cos(2 pi n f k ts + phi_n) * (1 + sum_i (dV_i / 2V_t) cos(2 pi F_i k ts + theta_i))
//!       + sigma * g_k
//! ```
//!
//! with `V_t = sqrt(sum_n V_n^2)` and `g_k` seeded standard-normal draws. Every
//! harmonic shares the same modulation term. Flicker amplitudes are stored as
//! `dV_i / V_t`; the factor one half is applied here.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicComponent {
    /// Multiple of the power frequency.
    pub order: u32,
    /// Per-unit amplitude `V_n`.
    pub amplitude: f64,
    /// Radians.
    pub phase: f64,
}

impl HarmonicComponent {
    pub fn new(order: u32, amplitude: f64, phase: f64) -> Self {
        HarmonicComponent {
            order,
            amplitude,
            phase: wrap_phase_positive(phase),
        }
    }

    pub fn from_degrees(order: u32, amplitude: f64, phase_deg: f64) -> Self {
        Self::new(order, amplitude, phase_deg.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlickerComponent {
    /// Hz.
    pub frequency: f64,
    /// `dV_i / V_t`.
    pub relative_amplitude: f64,
    /// Radians.
    pub phase: f64,
}

impl FlickerComponent {
    pub fn new(frequency: f64, relative_amplitude: f64, phase: f64) -> Self {
        FlickerComponent {
            frequency,
            relative_amplitude,
            phase,
        }
    }

    pub fn from_degrees(frequency: f64, relative_amplitude: f64, phase_deg: f64) -> Self {
        Self::new(frequency, relative_amplitude, phase_deg.to_radians())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingSpec {
    /// Samples per second.
    pub rate: f64,
    /// Seconds.
    pub duration: f64,
    /// Hz.
    pub power_frequency: f64,
}

impl SamplingSpec {
    pub fn new(rate: f64, duration: f64, power_frequency: f64) -> Self {
        SamplingSpec {
            rate,
            duration,
            power_frequency,
        }
    }

    pub fn period(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn sample_count(&self) -> usize {
        libm::round(self.duration * self.rate) as usize
    }
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec {
            rate: 1200.0,
            duration: 1.0,
            power_frequency: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSpec {
    pub harmonics: Vec<HarmonicComponent>,
    pub flickers: Vec<FlickerComponent>,
    pub sampling: SamplingSpec,
    pub noise: NoiseSpec,
}

impl WaveformSpec {
    pub fn validate(&self) -> Result<()> {
        if self.harmonics.is_empty() {
            return Err(Error::InvalidSpec(
                "at least one harmonic is required".into(),
            ));
        }
        let mut orders = BTreeSet::new();
        for h in &self.harmonics {
            if h.order == 0 {
                return Err(Error::InvalidSpec("harmonic order must be >= 1".into()));
            }
            if !orders.insert(h.order) {
                return Err(Error::InvalidSpec(format!(
                    "duplicate harmonic order {}",
                    h.order
                )));
            }
            if !(h.amplitude >= 0.0) || !h.amplitude.is_finite() || !h.phase.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "harmonic {} needs a finite amplitude >= 0",
                    h.order
                )));
            }
        }
        if !(base_voltage(self)? > 0.0) {
            return Err(Error::InvalidSpec("base voltage V_t must be > 0".into()));
        }
        for fl in &self.flickers {
            if !(fl.frequency > 0.0) || !fl.frequency.is_finite() {
                return Err(Error::InvalidSpec("flicker frequency must be > 0".into()));
            }
            if !(fl.relative_amplitude >= 0.0)
                || !fl.relative_amplitude.is_finite()
                || !fl.phase.is_finite()
            {
                return Err(Error::InvalidSpec(
                    "flicker relative amplitude must be finite and >= 0".into(),
                ));
            }
        }
        let s = &self.sampling;
        if !(s.power_frequency > 0.0) || !(s.duration > 0.0) || !(s.rate > 0.0) {
            return Err(Error::InvalidSpec(
                "rate, duration and power frequency must be > 0".into(),
            ));
        }
        let top = self.harmonics.iter().map(|h| h.order).max().unwrap_or(1) as f64;
        if s.rate <= 2.0 * top * s.power_frequency {
            return Err(Error::InvalidSpec(format!(
                "sample rate {} Hz violates Nyquist for harmonic {} of {} Hz",
                s.rate, top, s.power_frequency
            )));
        }
        if !(self.noise.sigma >= 0.0) || !self.noise.sigma.is_finite() {
            return Err(Error::InvalidSpec("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// `1 + sum_i (dV_i / 2V_t) cos(2 pi F_i k ts + theta_i)`.
    pub fn modulation(&self, k: i64) -> f64 {
        let t = k as f64 / self.sampling.rate;
        1.0 + self
            .flickers
            .iter()
            .map(|fl| 0.5 * fl.relative_amplitude * libm::cos(TAU * fl.frequency * t + fl.phase))
            .sum::<f64>()
    }

    /// Ground-truth envelope of the harmonic at position `index` in `harmonics`.
    pub fn envelope(&self, index: usize, k: i64) -> f64 {
        self.harmonics[index].amplitude * self.modulation(k)
    }

    /// Noise-free sample at index `k`.
    pub fn clean_sample(&self, k: i64) -> f64 {
        let t = k as f64 / self.sampling.rate;
        let f = self.sampling.power_frequency;
        let carrier: f64 = self
            .harmonics
            .iter()
            .map(|h| h.amplitude * libm::cos(TAU * h.order as f64 * f * t + h.phase))
            .sum();
        carrier * self.modulation(k)
    }

    pub fn harmonic_orders(&self) -> Vec<u32> {
        self.harmonics.iter().map(|h| h.order).collect()
    }
}

/// `V_t = sqrt(sum V_n^2)`.
pub fn base_voltage(spec: &WaveformSpec) -> Result<f64> {
    if spec.harmonics.is_empty() {
        return Err(Error::InvalidSpec(
            "at least one harmonic is required".into(),
        ));
    }
    Ok(libm::sqrt(
        spec.harmonics
            .iter()
            .map(|h| h.amplitude * h.amplitude)
            .sum(),
    ))
}

/// Timestamped per-unit voltage samples. Sample `i` sits at absolute index
/// `start_index + i`, i.e. at time `(start_index + i) / rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub start_index: i64,
    pub rate: f64,
    pub samples: Vec<f64>,
}

impl SampleSeries {
    pub fn new(start_index: i64, rate: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientData {
                needed: 1,
                available: 0,
            });
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidSpec("sample rate must be > 0".into()));
        }
        Ok(SampleSeries {
            start_index,
            rate,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn period(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn index(&self, i: usize) -> i64 {
        self.start_index + i as i64
    }

    pub fn time(&self, i: usize) -> f64 {
        self.index(i) as f64 / self.rate
    }

    /// The last `len` samples as a new series.
    pub fn tail(&self, len: usize) -> SampleSeries {
        let len = len.min(self.samples.len());
        let skip = self.samples.len() - len;
        SampleSeries {
            start_index: self.start_index + skip as i64,
            rate: self.rate,
            samples: self.samples[skip..].to_vec(),
        }
    }
}

/// Synthesizes the waveform described by `spec`. The Gaussian stream comes
/// from ChaCha8 seeded with `spec.noise.seed`; draws are taken even when
/// `sigma == 0` so the realization only scales with sigma.
pub fn synthesize(spec: &WaveformSpec) -> Result<SampleSeries> {
    spec.validate()?;
    let count = spec.sampling.sample_count();
    if count == 0 {
        return Err(Error::InvalidSpec(
            "duration shorter than one sample".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise.seed);
    let sigma = spec.noise.sigma;
    let samples = (0..count as i64)
        .map(|k| {
            let g: f64 = StandardNormal.sample(&mut rng);
            spec.clean_sample(k) + sigma * g
        })
        .collect();
    SampleSeries::new(0, spec.sampling.rate, samples)
}

/// Maps an angle to `[0, 2 pi)`.
pub fn wrap_phase_positive(phase: f64) -> f64 {
    let r = libm::fmod(phase, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_phase_symmetric(phase: f64) -> f64 {
    let r = wrap_phase_positive(phase);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
