//! Spectral reference estimator: squaring demodulation plus one Goertzel
//! evaluation per grid frequency.
//!
//! The input mean is removed and the signal squared, which turns the common
//! modulation `1 + sum (a_i / 2) cos(...)` into `1 + sum a_i cos(...)` at
//! baseband (to first order). A cascade of identical one-pole low-pass
//! sections, each with `y <- (1 - a) x + a y` and `a = exp(-2 pi fc / fs)`,
//! removes the carrier products. The last `window_seconds` of the result are
//! normalized by their mean, and each grid bin is read by a complex Goertzel
//! whose output is divided by the known cascade response at that frequency.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::{GRID_LEN, IEC_FREQUENCIES};
use crate::signal::{wrap_phase_symmetric, SampleSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub window_seconds: f64,
    /// Per-section cutoff in Hz.
    pub demodulation_cutoff: f64,
    /// Number of cascaded one-pole sections.
    pub filter_order: u32,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            window_seconds: 2.0,
            demodulation_cutoff: 35.0,
            filter_order: 4,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_seconds > 0.0 && self.window_seconds.is_finite()) {
            return Err(Error::InvalidSpec("baseline window must be > 0".into()));
        }
        let top = IEC_FREQUENCIES[GRID_LEN - 1];
        if !(self.demodulation_cutoff > top && self.demodulation_cutoff.is_finite()) {
            return Err(Error::InvalidSpec(alloc::format!(
                "demodulation cutoff must exceed {top} Hz"
            )));
        }
        if self.filter_order == 0 {
            return Err(Error::InvalidSpec("filter order must be >= 1".into()));
        }
        Ok(())
    }

    pub fn window_samples(&self, rate: f64) -> usize {
        libm::round(self.window_seconds * rate) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineEstimate {
    /// Amplitude of the fundamental.
    pub fundamental_amplitude: f64,
    /// `dV_i / V_t` per grid bin.
    pub relative_amplitudes: Vec<f64>,
    /// Flicker phases referenced to absolute sample index 0, `(-pi, pi]`.
    pub phases: Vec<f64>,
    pub harmonic_orders: Vec<u32>,
    pub harmonic_amplitudes: Vec<f64>,
    pub harmonic_phases: Vec<f64>,
    pub window_start_index: i64,
    pub window_samples: usize,
}

/// Complex single-bin DFT `sum_j x_j exp(-i w j)` with `w = 2 pi freq / rate`,
/// computed by the Goertzel recursion. Returns `(re, im)`.
pub fn goertzel(samples: &[f64], freq: f64, rate: f64) -> (f64, f64) {
    let w = TAU * freq / rate;
    let coeff = 2.0 * libm::cos(w);
    let (mut s1, mut s2) = (0.0, 0.0);
    for &x in samples {
        let s0 = x + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
    }
    // y = s1 - exp(-iw) s2 = sum x_j exp(iw(n-1-j)); rotate back by exp(-iw(n-1))
    let (sw, cw) = libm::sincos(w);
    let (yr, yi) = (s1 - cw * s2, sw * s2);
    let n1 = samples.len().saturating_sub(1) as f64;
    let (sr, cr) = libm::sincos(w * n1);
    (yr * cr + yi * sr, yi * cr - yr * sr)
}

/// Complex response of `order` cascaded one-pole sections with pole `a`.
fn cascade_response(a: f64, freq: f64, rate: f64, order: u32) -> (f64, f64) {
    let w = TAU * freq / rate;
    let (s, c) = libm::sincos(w);
    // (1 - a) / (1 - a e^{-iw})
    let (dr, di) = (1.0 - a * c, a * s);
    let d2 = dr * dr + di * di;
    let (hr, hi) = ((1.0 - a) * dr / d2, -(1.0 - a) * di / d2);
    let (mut rr, mut ri) = (1.0, 0.0);
    for _ in 0..order {
        let t = rr * hr - ri * hi;
        ri = rr * hi + ri * hr;
        rr = t;
    }
    (rr, ri)
}

pub fn fft_estimate(
    series: &SampleSeries,
    power_frequency: f64,
    harmonic_orders: &[u32],
    config: &BaselineConfig,
) -> Result<BaselineEstimate> {
    config.validate()?;
    if !(power_frequency > 0.0) {
        return Err(Error::InvalidSpec("power frequency must be > 0".into()));
    }
    let window = config.window_samples(series.rate);
    if window < 2 || series.len() < window {
        return Err(Error::InsufficientData {
            needed: window.max(2),
            available: series.len(),
        });
    }
    if series.samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("voltage sample"));
    }
    let rate = series.rate;
    let start = series.len() - window;
    let k0 = series.index(start);
    let raw = &series.samples[start..];

    let mut harmonic_amplitudes = Vec::with_capacity(harmonic_orders.len());
    let mut harmonic_phases = Vec::with_capacity(harmonic_orders.len());
    for &n in harmonic_orders {
        let (a, p) = tone(raw, n as f64 * power_frequency, rate, k0, (1.0, 0.0));
        harmonic_amplitudes.push(a);
        harmonic_phases.push(p);
    }
    let fundamental_amplitude = match harmonic_orders.iter().position(|&n| n == 1) {
        Some(i) => harmonic_amplitudes[i],
        None => tone(raw, power_frequency, rate, k0, (1.0, 0.0)).0,
    };

    let mean = series.samples.iter().sum::<f64>() / series.len() as f64;
    let mut squared: Vec<f64> = series
        .samples
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .collect();
    let dc_guess = squared.iter().sum::<f64>() / squared.len() as f64;
    let a = libm::exp(-TAU * config.demodulation_cutoff / rate);
    let mut state = vec![dc_guess; config.filter_order as usize];
    for v in squared.iter_mut() {
        let mut x = *v;
        for y in state.iter_mut() {
            *y = (1.0 - a) * x + a * *y;
            x = *y;
        }
        *v = x;
    }
    let demod = &squared[start..];
    let dc = demod.iter().sum::<f64>() / window as f64;
    if !(dc > 0.0) {
        return Err(Error::DegenerateEnvelope {
            step: series.len() as u64,
            amplitude: dc,
        });
    }
    let modulation: Vec<f64> = demod.iter().map(|v| v / dc - 1.0).collect();

    let mut relative_amplitudes = Vec::with_capacity(GRID_LEN);
    let mut phases = Vec::with_capacity(GRID_LEN);
    for &f in IEC_FREQUENCIES.iter() {
        let response = cascade_response(a, f, rate, config.filter_order);
        let (amp, phase) = tone(&modulation, f, rate, k0, response);
        relative_amplitudes.push(amp);
        phases.push(phase);
    }

    Ok(BaselineEstimate {
        fundamental_amplitude,
        relative_amplitudes,
        phases,
        harmonic_orders: harmonic_orders.to_vec(),
        harmonic_amplitudes,
        harmonic_phases,
        window_start_index: k0,
        window_samples: window,
    })
}

/// Amplitude and absolute phase of a sinusoid at `freq` in `x`, whose first
/// sample has absolute index `k0`, after dividing out `response`.
fn tone(x: &[f64], freq: f64, rate: f64, k0: i64, response: (f64, f64)) -> (f64, f64) {
    let (re, im) = goertzel(x, freq, rate);
    let (hr, hi) = response;
    let h2 = hr * hr + hi * hi;
    let (re, im) = ((re * hr + im * hi) / h2, (im * hr - re * hi) / h2);
    let amplitude = 2.0 * libm::hypot(re, im) / x.len() as f64;
    let phase = wrap_phase_symmetric(libm::atan2(im, re) - TAU * freq * k0 as f64 / rate);
    (amplitude, phase)
}
