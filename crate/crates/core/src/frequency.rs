//! Power-frequency tracking by zero crossings.
//!
//! The series is passed through two cascaded second-order band-pass sections
//! centred on the nominal frequency, upward zero crossings are located by
//! linear interpolation, and the crossing times are fitted against their
//! index by least squares. The slope of that fit is the period.
//!
//! A band-pass rather than a plain low-pass is needed because harmonics can be
//! as large as the fundamental; a single pole at twice the nominal frequency
//! leaves the third harmonic at over half its amplitude, enough to add
//! spurious crossings.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::signal::SampleSeries;

/// Minimum input length in nominal cycles.
pub const MIN_CYCLES: f64 = 4.0;

/// Quality factor of each band-pass section.
const BANDPASS_Q: f64 = 1.0;
const BANDPASS_SECTIONS: usize = 2;
/// Filter warm-up discarded before looking for crossings, in nominal cycles.
const WARMUP_CYCLES: f64 = 2.0;

/// Constant-peak-gain band-pass biquad (`b = [alpha, 0, -alpha] / a0`).
fn bandpass(samples: &[f64], centre: f64, rate: f64) -> Vec<f64> {
    let w0 = TAU * centre / rate;
    let (sw, cw) = libm::sincos(w0);
    let alpha = sw / (2.0 * BANDPASS_Q);
    let a0 = 1.0 + alpha;
    let (b0, a1, a2) = (alpha / a0, -2.0 * cw / a0, (1.0 - alpha) / a0);
    let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
    samples
        .iter()
        .map(|&x| {
            let y = b0 * (x - x2) - a1 * y1 - a2 * y2;
            x2 = x1;
            x1 = x;
            y2 = y1;
            y1 = y;
            y
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyEstimate {
    /// Hz.
    pub frequency: f64,
    /// Half-width of the uncertainty interval in Hz (two standard errors).
    pub confidence_window: f64,
    pub window_samples: usize,
}

pub fn track_frequency(series: &SampleSeries, nominal: f64) -> Result<FrequencyEstimate> {
    track_frequency_biased(series, nominal, 0.0)
}

/// Like [`track_frequency`] but adds `offset` Hz to the result, emulating a
/// biased PLL.
pub fn track_frequency_biased(
    series: &SampleSeries,
    nominal: f64,
    offset: f64,
) -> Result<FrequencyEstimate> {
    if !(nominal > 0.0) || !offset.is_finite() {
        return Err(Error::InvalidSpec("nominal frequency must be > 0".into()));
    }
    let samples_per_cycle = series.rate / nominal;
    let needed = libm::ceil(MIN_CYCLES * samples_per_cycle) as usize;
    if series.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            available: series.len(),
        });
    }
    if series.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("voltage sample"));
    }

    let mut filtered = bandpass(&series.samples, nominal, series.rate);
    for _ in 1..BANDPASS_SECTIONS {
        filtered = bandpass(&filtered, nominal, series.rate);
    }
    let skip = libm::ceil(WARMUP_CYCLES * samples_per_cycle) as usize;
    let settled = &filtered[skip..];
    let mean = settled.iter().sum::<f64>() / settled.len() as f64;

    let min_gap = 0.5 * samples_per_cycle;
    let mut crossings: Vec<f64> = Vec::new();
    for (i, w) in settled.windows(2).enumerate() {
        let (y0, y1) = (w[0] - mean, w[1] - mean);
        if y0 < 0.0 && y1 >= 0.0 {
            let t = i as f64 + y0 / (y0 - y1);
            if crossings.last().is_none_or(|&last| t - last >= min_gap) {
                crossings.push(t);
            }
        }
    }
    if crossings.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: crossings.len(),
        });
    }

    let m = crossings.len() as f64;
    let mean_idx = (m - 1.0) / 2.0;
    let mean_t = crossings.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (j, &t) in crossings.iter().enumerate() {
        let dx = j as f64 - mean_idx;
        sxy += dx * (t - mean_t);
        sxx += dx * dx;
    }
    let period = sxy / sxx;
    let frequency = series.rate / period;

    let confidence_window = if crossings.len() > 2 {
        let rss: f64 = crossings
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let r = t - (mean_t + period * (j as f64 - mean_idx));
                r * r
            })
            .sum();
        let slope_se = libm::sqrt(rss / (m - 2.0) / sxx);
        2.0 * frequency * slope_se / period
    } else {
        // two crossings: one period, error bounded by interpolation only
        frequency / period
    };

    Ok(FrequencyEstimate {
        frequency: frequency + offset,
        confidence_window,
        window_samples: series.len(),
    })
}
