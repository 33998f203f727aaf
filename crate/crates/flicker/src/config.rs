//! JSON documents accepted on the command line.
//!
//! Phases are given in degrees here and converted to radians on the way in.

use std::path::Path;

use flicker_core::adaline::WeightInit;
use flicker_core::grid::BASIS_LEN;
use flicker_core::{
    AdalineConfig, BaselineConfig, FlickerComponent, FrequencyMode, HarmonicComponent, HinfConfig,
    NoiseSpec, PipelineConfig, SamplingSpec, WaveformSpec,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigFile {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::ConfigFile {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicDoc {
    pub order: u32,
    pub amplitude_pu: f64,
    pub phase_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlickerDoc {
    pub frequency_hz: f64,
    pub relative_amplitude: f64,
    #[serde(default)]
    pub phase_deg: f64,
}

/// A waveform description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformDoc {
    #[serde(default = "default_power_frequency")]
    pub power_frequency_hz: f64,
    #[serde(default = "default_rate")]
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
    pub harmonics: Vec<HarmonicDoc>,
    #[serde(default)]
    pub flickers: Vec<FlickerDoc>,
}

fn default_power_frequency() -> f64 {
    50.0
}

fn default_rate() -> f64 {
    1200.0
}

impl WaveformDoc {
    pub fn to_spec(&self) -> Result<WaveformSpec> {
        let spec = WaveformSpec {
            harmonics: self
                .harmonics
                .iter()
                .map(|h| HarmonicComponent::from_degrees(h.order, h.amplitude_pu, h.phase_deg))
                .collect(),
            flickers: self
                .flickers
                .iter()
                .map(|f| {
                    FlickerComponent::from_degrees(
                        f.frequency_hz,
                        f.relative_amplitude,
                        f.phase_deg,
                    )
                })
                .collect(),
            sampling: SamplingSpec::new(
                self.sample_rate_hz,
                self.duration_s,
                self.power_frequency_hz,
            ),
            noise: NoiseSpec {
                sigma: self.noise_sigma,
                seed: self.seed,
            },
        };
        spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(spec)
    }

    pub fn from_spec(spec: &WaveformSpec) -> Self {
        WaveformDoc {
            power_frequency_hz: spec.sampling.power_frequency,
            sample_rate_hz: spec.sampling.rate,
            duration_s: spec.sampling.duration,
            noise_sigma: spec.noise.sigma,
            seed: spec.noise.seed,
            harmonics: spec
                .harmonics
                .iter()
                .map(|h| HarmonicDoc {
                    order: h.order,
                    amplitude_pu: h.amplitude,
                    phase_deg: h.phase.to_degrees(),
                })
                .collect(),
            flickers: spec
                .flickers
                .iter()
                .map(|f| FlickerDoc {
                    frequency_hz: f.frequency,
                    relative_amplitude: f.relative_amplitude,
                    phase_deg: f.phase.to_degrees(),
                })
                .collect(),
        }
    }
}

/// Which parameter set the omitted fields fall back to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Tracking defaults (finite process noise, stable ADALINE step).
    #[default]
    Tracking,
    /// The reference parameter set verbatim (not H-infinity feasible).
    Table2,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HinfDoc {
    pub alpha: Option<f64>,
    pub measurement_noise: Option<f64>,
    pub initial_covariance_scale: Option<f64>,
    pub process_noise: Option<f64>,
    pub initial_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightInitDoc {
    DcOnly,
    Ones,
    Random { seed: u64, scale: f64 },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdalineDoc {
    pub initial_rate: Option<f64>,
    pub decay: Option<f64>,
    pub regularizer: Option<f64>,
    pub initial_weights: Option<WeightInitDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrequencyDoc {
    Fixed {
        hz: f64,
    },
    #[default]
    Tracked,
    TrackedWithOffset {
        offset_hz: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineDoc {
    #[serde(default)]
    pub preset: Preset,
    pub harmonic_orders: Vec<u32>,
    #[serde(default)]
    pub hinf: HinfDoc,
    #[serde(default)]
    pub adaline: AdalineDoc,
    #[serde(default)]
    pub frequency: FrequencyDoc,
    #[serde(default = "default_power_frequency")]
    pub nominal_frequency_hz: f64,
    #[serde(default)]
    pub report_stride: usize,
}

impl PipelineDoc {
    pub fn new(harmonic_orders: Vec<u32>) -> Self {
        PipelineDoc {
            preset: Preset::Tracking,
            harmonic_orders,
            hinf: HinfDoc::default(),
            adaline: AdalineDoc::default(),
            frequency: FrequencyDoc::Tracked,
            nominal_frequency_hz: 50.0,
            report_stride: 0,
        }
    }

    pub fn to_config(&self) -> Result<PipelineConfig> {
        let orders = self.harmonic_orders.clone();
        let (mut hinf, mut adaline) = match self.preset {
            Preset::Tracking => (HinfConfig::new(orders.clone()), AdalineConfig::default()),
            Preset::Table2 => (HinfConfig::table2(orders.clone()), AdalineConfig::table2()),
        };
        let h = &self.hinf;
        if let Some(v) = h.alpha {
            hinf.alpha = v;
        }
        if let Some(v) = h.measurement_noise {
            hinf.measurement_noise = v;
        }
        if let Some(v) = h.initial_covariance_scale {
            hinf.initial_covariance_scale = v;
        }
        if let Some(v) = h.process_noise {
            hinf.process_noise = v;
        }
        if let Some(v) = &h.initial_state {
            hinf.initial_state = v.clone();
        }
        let a = &self.adaline;
        if let Some(v) = a.initial_rate {
            adaline.initial_rate = v;
        }
        if let Some(v) = a.decay {
            adaline.decay = v;
        }
        if let Some(v) = a.regularizer {
            adaline.regularizer = v;
        }
        if let Some(w) = &a.initial_weights {
            adaline.initial_weights = match w {
                WeightInitDoc::DcOnly => WeightInit::DcOnly,
                WeightInitDoc::Ones => WeightInit::Ones,
                WeightInitDoc::Random { seed, scale } => WeightInit::Random {
                    seed: *seed,
                    scale: *scale,
                },
                WeightInitDoc::Explicit(v) if v.len() == BASIS_LEN => {
                    WeightInit::Explicit(v.clone())
                }
                WeightInitDoc::Explicit(v) => {
                    return Err(Error::Config(format!(
                        "explicit ADALINE weights need {BASIS_LEN} entries, got {}",
                        v.len()
                    )))
                }
            };
        }
        let frequency_mode = match self.frequency {
            FrequencyDoc::Fixed { hz } => FrequencyMode::Fixed(hz),
            FrequencyDoc::Tracked => FrequencyMode::Tracked,
            FrequencyDoc::TrackedWithOffset { offset_hz } => {
                FrequencyMode::TrackedWithOffset(offset_hz)
            }
        };
        let config = PipelineConfig {
            hinf,
            adaline,
            grid: flicker_core::FlickerGrid::iec(),
            frequency_mode,
            report_stride: self.report_stride,
            nominal_frequency: self.nominal_frequency_hz,
        };
        config
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineDoc {
    #[serde(default = "default_window")]
    pub window_s: f64,
    #[serde(default = "default_cutoff")]
    pub demodulation_cutoff_hz: f64,
    #[serde(default = "default_order")]
    pub filter_order: u32,
}

fn default_window() -> f64 {
    2.0
}

fn default_cutoff() -> f64 {
    35.0
}

fn default_order() -> u32 {
    4
}

impl Default for BaselineDoc {
    fn default() -> Self {
        BaselineDoc {
            window_s: default_window(),
            demodulation_cutoff_hz: default_cutoff(),
            filter_order: default_order(),
        }
    }
}

impl BaselineDoc {
    pub fn to_config(&self) -> Result<BaselineConfig> {
        let config = BaselineConfig {
            window_seconds: self.window_s,
            demodulation_cutoff: self.demodulation_cutoff_hz,
            filter_order: self.filter_order,
        };
        config
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }
}
