//! ADALINE decomposition of an amplitude envelope onto the flicker grid.
//!
//! Each envelope is modelled as
//! `E(k) = w_1 + sum_i (w_{2i+1} cos(2 pi F_i k ts) - w_{2i+2} sin(2 pi F_i k ts))`
//! and the 74 weights are adapted by the normalized Widrow-Hoff rule with a
//! decaying step `theta^k = theta^0 / (1 + k / beta)`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};

use crate::error::{Error, Result};
use crate::grid::{BASIS_LEN, GRID_LEN, IEC_FREQUENCIES};
use crate::linalg::dot;
use crate::signal::wrap_phase_symmetric;

/// Harmonic amplitudes below this are treated as a vanished envelope.
pub const MIN_HARMONIC_AMPLITUDE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum WeightInit {
    /// DC weight 1, everything else 0.
    DcOnly,
    /// Every weight 1 except the always-idle second weight.
    Ones,
    /// DC weight 1, flicker weights uniform in `[-scale, scale]`.
    Random {
        seed: u64,
        scale: f64,
    },
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdalineConfig {
    /// `theta^0`.
    pub initial_rate: f64,
    /// `beta`.
    pub decay: f64,
    /// `lambda`, keeps the normalization away from zero.
    pub regularizer: f64,
    pub initial_weights: WeightInit,
}

impl Default for AdalineConfig {
    fn default() -> Self {
        AdalineConfig {
            initial_rate: 1.0,
            decay: 150.0,
            regularizer: 1e-4,
            initial_weights: WeightInit::DcOnly,
        }
    }
}

impl AdalineConfig {
    /// The published parameter set. `theta^0 = 5` exceeds the NLMS stability
    /// limit of 2 for the first 1500 steps, so this diverges.
    pub fn table2() -> Self {
        AdalineConfig {
            initial_rate: 5.0,
            decay: 1000.0,
            regularizer: 1e-4,
            initial_weights: WeightInit::Ones,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.initial_rate) {
            return Err(Error::InvalidSpec(
                "ADALINE initial rate must be > 0".into(),
            ));
        }
        if !positive(self.decay) {
            return Err(Error::InvalidSpec("ADALINE decay must be > 0".into()));
        }
        if !positive(self.regularizer) {
            return Err(Error::InvalidSpec("ADALINE regularizer must be > 0".into()));
        }
        match &self.initial_weights {
            WeightInit::Random { scale, .. } if !(*scale >= 0.0 && scale.is_finite()) => Err(
                Error::InvalidSpec("random weight scale must be >= 0".into()),
            ),
            WeightInit::Explicit(w) if w.len() != BASIS_LEN => Err(Error::Shape {
                expected: BASIS_LEN,
                found: w.len(),
            }),
            WeightInit::Explicit(w) if w.iter().any(|v| !v.is_finite()) => {
                Err(Error::NumericInput("initial weights"))
            }
            _ => Ok(()),
        }
    }

    fn weights(&self) -> Vec<f64> {
        let mut w = match &self.initial_weights {
            WeightInit::DcOnly => {
                let mut w = vec![0.0; BASIS_LEN];
                w[0] = 1.0;
                w
            }
            WeightInit::Ones => vec![1.0; BASIS_LEN],
            WeightInit::Random { seed, scale } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let mut w = vec![1.0; BASIS_LEN];
                if *scale > 0.0 {
                    let dist = Uniform::new_inclusive(-scale, *scale).expect("checked scale");
                    for v in &mut w[2..] {
                        *v = dist.sample(&mut rng);
                    }
                } else {
                    w[2..].fill(0.0);
                }
                w
            }
            WeightInit::Explicit(w) => w.clone(),
        };
        // basis entry 2 is identically zero, so this weight would never move
        w[1] = 0.0;
        w
    }
}

/// `theta^0 / (1 + k / beta)`.
pub fn learning_rate(k: u64, config: &AdalineConfig) -> f64 {
    config.initial_rate / (1.0 + k as f64 / config.decay)
}

/// `[1, 0, cos(2 pi F_1 k ts), -sin(2 pi F_1 k ts), ...]` over the grid.
pub fn basis_vector(k: i64, tau_s: f64) -> Vec<f64> {
    let mut out = vec![0.0; BASIS_LEN];
    basis_vector_into(k, tau_s, &mut out);
    out
}

pub fn basis_vector_into(k: i64, tau_s: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), BASIS_LEN);
    out[0] = 1.0;
    out[1] = 0.0;
    let t = k as f64 * tau_s;
    for (pair, &f) in out[2..].chunks_exact_mut(2).zip(IEC_FREQUENCIES.iter()) {
        let (s, c) = libm::sincos(TAU * f * t);
        pair[0] = c;
        pair[1] = -s;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdalineState {
    pub weights: Vec<f64>,
    pub step: u64,
    pub last_error: f64,
}

/// Amplitudes read out of one unit. Relative amplitudes are `dV_i / V_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlickerAmplitudes {
    pub harmonic_amplitude: f64,
    pub relative_amplitudes: Vec<f64>,
    /// Radians in `(-pi, pi]`.
    pub phases: Vec<f64>,
}

impl AdalineState {
    pub fn new(config: &AdalineConfig) -> Result<Self> {
        config.validate()?;
        Ok(AdalineState {
            weights: config.weights(),
            step: 0,
            last_error: 0.0,
        })
    }

    pub fn predict(&self, basis: &[f64]) -> f64 {
        dot(&self.weights, basis)
    }

    /// One Widrow-Hoff step. Returns the denominator `lambda + x'x`.
    pub fn update(&mut self, config: &AdalineConfig, target: f64, basis: &[f64]) -> Result<f64> {
        if basis.len() != self.weights.len() {
            return Err(Error::Shape {
                expected: self.weights.len(),
                found: basis.len(),
            });
        }
        if !target.is_finite() || basis.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("ADALINE target or basis"));
        }
        let error = target - self.predict(basis);
        let denominator = config.regularizer + dot(basis, basis);
        let gain = learning_rate(self.step, config) * error / denominator;
        for (w, x) in self.weights.iter_mut().zip(basis) {
            *w += gain * x;
        }
        self.step += 1;
        self.last_error = error;
        Ok(denominator)
    }

    pub fn amplitudes(&self) -> Result<FlickerAmplitudes> {
        extract_amplitudes(self)
    }
}

/// `V_n = sqrt(w_1^2 + w_2^2)`; `dV_i/V_t = 2 sqrt(w_{2i+1}^2 + w_{2i+2}^2) / V_n`;
/// `phase_i = atan2(w_{2i+2}, w_{2i+1})`.
pub fn extract_amplitudes(state: &AdalineState) -> Result<FlickerAmplitudes> {
    let w = &state.weights;
    if w.len() != BASIS_LEN {
        return Err(Error::Shape {
            expected: BASIS_LEN,
            found: w.len(),
        });
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("ADALINE weights"));
    }
    let v = libm::hypot(w[0], w[1]);
    if v < MIN_HARMONIC_AMPLITUDE {
        return Err(Error::DegenerateEnvelope {
            step: state.step,
            amplitude: v,
        });
    }
    let mut relative_amplitudes = Vec::with_capacity(GRID_LEN);
    let mut phases = Vec::with_capacity(GRID_LEN);
    for pair in w[2..].chunks_exact(2) {
        relative_amplitudes.push(2.0 * libm::hypot(pair[0], pair[1]) / v);
        phases.push(wrap_phase_symmetric(libm::atan2(pair[1], pair[0])));
    }
    Ok(FlickerAmplitudes {
        harmonic_amplitude: v,
        relative_amplitudes,
        phases,
    })
}
