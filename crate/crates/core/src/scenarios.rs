//! Waveform presets used by the validation campaigns.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{IEC_FREQUENCIES, IEC_UNITY_AMPLITUDES};
use crate::signal::{FlickerComponent, HarmonicComponent, NoiseSpec, SamplingSpec, WaveformSpec};

pub const SAMPLE_RATE: f64 = 1200.0;
pub const POWER_FREQUENCY: f64 = 50.0;
pub const NOISE_SIGMA: f64 = 0.02;

/// Orders, amplitudes and phases (degrees) of the distorted test waveform.
pub const DISTORTED_ORDERS: [u32; 5] = [1, 3, 5, 7, 11];
pub const DISTORTED_AMPLITUDES: [f64; 5] = [1.5, 0.5, 0.2, 0.15, 0.1];
pub const DISTORTED_PHASES_DEG: [f64; 5] = [80.0, 60.0, 45.0, 36.0, 30.0];

/// `1.5 cos(2 pi 50 k ts + 80 deg)` with one flicker component, 1 s at
/// 1200 Hz, sigma 0.02 and noise seed 0.
pub fn single_flicker(frequency: f64, relative_amplitude: f64, phase_deg: f64) -> WaveformSpec {
    WaveformSpec {
        harmonics: vec![HarmonicComponent::from_degrees(1, 1.5, 80.0)],
        flickers: vec![FlickerComponent::from_degrees(
            frequency,
            relative_amplitude,
            phase_deg,
        )],
        sampling: SamplingSpec::new(SAMPLE_RATE, 1.0, POWER_FREQUENCY),
        noise: NoiseSpec {
            sigma: NOISE_SIGMA,
            seed: 0,
        },
    }
}

/// Five harmonics modulated by every grid frequency at its unity-sensation
/// amplitude with zero phase; 6 s at 1200 Hz, sigma 0.02, noise seed 0.
pub fn distorted() -> WaveformSpec {
    WaveformSpec {
        harmonics: distorted_harmonics(),
        flickers: unity_flickers(),
        sampling: SamplingSpec::new(SAMPLE_RATE, 6.0, POWER_FREQUENCY),
        noise: NoiseSpec {
            sigma: NOISE_SIGMA,
            seed: 0,
        },
    }
}

pub fn distorted_harmonics() -> Vec<HarmonicComponent> {
    DISTORTED_ORDERS
        .iter()
        .zip(DISTORTED_AMPLITUDES)
        .zip(DISTORTED_PHASES_DEG)
        .map(|((&n, v), p)| HarmonicComponent::from_degrees(n, v, p))
        .collect()
}

pub fn unity_flickers() -> Vec<FlickerComponent> {
    IEC_FREQUENCIES
        .iter()
        .zip(IEC_UNITY_AMPLITUDES)
        .map(|(&f, a)| FlickerComponent::new(f, a, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::base_voltage;
    use approx::assert_relative_eq;

    #[test]
    fn presets_are_valid() {
        single_flicker(25.0, 0.02, 90.0).validate().unwrap();
        let d = distorted();
        d.validate().unwrap();
        assert_eq!(d.flickers.len(), 36);
        assert_eq!(d.sampling.sample_count(), 7200);
        assert_relative_eq!(base_voltage(&d).unwrap(), 2.5725f64.sqrt());
    }
}
