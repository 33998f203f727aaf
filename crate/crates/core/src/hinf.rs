//! Robust H-infinity tracking of the harmonic quadrature state.
//!
//! For harmonic orders `n_1..n_N` the state is
//! `x = [cos(phi_1) E_1, sin(phi_1) E_1, ..., cos(phi_N) E_N, sin(phi_N) E_N]`
//! and the measurement row is
//! `H_k = [cos(2 pi n_1 f k ts), -sin(2 pi n_1 f k ts), ...]`, so that
//! `H_k x = sum_n E_n cos(2 pi n f k ts + phi_n)`.
//!
//! One step, with the state transition fixed to the identity:
//!
//! ```text
//! M   = I - alpha P + H' R^-1 H P
//! K   = P M^-1 H' R^-1
//! x  <- x + K (z - H x)
//! P  <- P M^-1 + q I
//! ```
//!
//! `q = 0` is the pure recursion. With `q = 0` the information matrix only
//! grows, so the filter converges to a growing-memory fit and stops following
//! the envelope; a small `q` keeps it tracking.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::error::{Error, FeasibilityKind, Result};
use crate::linalg::{dot, Matrix};
use crate::signal::wrap_phase_symmetric;

/// Condition estimate above which the inner matrix counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct HinfConfig {
    /// Robustness factor.
    pub alpha: f64,
    /// Scalar measurement-noise covariance `R`.
    pub measurement_noise: f64,
    /// `P0 = scale * I`.
    pub initial_covariance_scale: f64,
    /// Diagonal process noise `q` added after each propagation.
    pub process_noise: f64,
    /// Length `2 * harmonic_orders.len()`.
    pub initial_state: Vec<f64>,
    pub harmonic_orders: Vec<u32>,
}

impl HinfConfig {
    /// Tracking configuration: alpha = 8, R = 0.007, x0 = 1, P0 = 0.01 I and
    /// q = 1e-3.
    pub fn new(harmonic_orders: Vec<u32>) -> Self {
        let n = 2 * harmonic_orders.len();
        HinfConfig {
            alpha: 8.0,
            measurement_noise: 0.007,
            initial_covariance_scale: 0.01,
            process_noise: 1e-3,
            initial_state: vec![1.0; n],
            harmonic_orders,
        }
    }

    /// The literal published parameter set: P0 = 1e3 I, no process noise.
    /// With alpha = 8 the covariance is indefinite for the first 2N steps.
    pub fn table2(harmonic_orders: Vec<u32>) -> Self {
        HinfConfig {
            initial_covariance_scale: 1e3,
            process_noise: 0.0,
            ..Self::new(harmonic_orders)
        }
    }

    pub fn state_dim(&self) -> usize {
        2 * self.harmonic_orders.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.harmonic_orders.is_empty() || self.harmonic_orders.contains(&0) {
            return Err(Error::InvalidSpec(
                "harmonic orders must be non-empty and >= 1".into(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidSpec("alpha must be > 0".into()));
        }
        if !(self.measurement_noise > 0.0 && self.measurement_noise.is_finite()) {
            return Err(Error::InvalidSpec("measurement noise R must be > 0".into()));
        }
        if !(self.initial_covariance_scale > 0.0 && self.initial_covariance_scale.is_finite()) {
            return Err(Error::InvalidSpec(
                "initial covariance scale must be > 0".into(),
            ));
        }
        if !(self.process_noise >= 0.0 && self.process_noise.is_finite()) {
            return Err(Error::InvalidSpec("process noise must be >= 0".into()));
        }
        if self.initial_state.len() != self.state_dim() {
            return Err(Error::Shape {
                expected: self.state_dim(),
                found: self.initial_state.len(),
            });
        }
        if self.initial_state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("initial state"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HinfState {
    pub x_hat: Vec<f64>,
    pub covariance: Matrix,
    /// Number of measurements absorbed.
    pub step: u64,
}

/// Envelopes and phases read from one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFrame {
    pub step: u64,
    pub envelopes: Vec<f64>,
    /// Radians in `(-pi, pi]`.
    pub phases: Vec<f64>,
}

/// Measurement row for sample `k`.
pub fn structure_row(k: i64, f: f64, tau_s: f64, orders: &[u32]) -> Vec<f64> {
    let mut row = vec![0.0; 2 * orders.len()];
    structure_row_into(k, f, tau_s, orders, &mut row);
    row
}

pub fn structure_row_into(k: i64, f: f64, tau_s: f64, orders: &[u32], row: &mut [f64]) {
    let base = TAU * f * k as f64 * tau_s;
    for (pair, &n) in row.chunks_exact_mut(2).zip(orders) {
        let (s, c) = libm::sincos(n as f64 * base);
        pair[0] = c;
        pair[1] = -s;
    }
}

impl HinfState {
    pub fn new(config: &HinfConfig) -> Result<Self> {
        config.validate()?;
        let n = config.state_dim();
        Ok(HinfState {
            x_hat: config.initial_state.clone(),
            covariance: Matrix::scaled_identity(n, config.initial_covariance_scale),
            step: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.x_hat.len()
    }

    /// Absorbs measurement `z` with row `h`. On error the state is unchanged.
    pub fn step(&mut self, config: &HinfConfig, z: f64, h: &[f64]) -> Result<()> {
        let n = self.dim();
        if h.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: h.len(),
            });
        }
        if !z.is_finite() || h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("measurement"));
        }
        let step = self.step + 1;
        let p = &self.covariance;
        let r_inv = 1.0 / config.measurement_noise;

        // M = I - alpha P + h (P h)' / R, using P symmetric.
        let ph = p.mul_vec(h);
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += -config.alpha * p[(i, j)] + h[i] * ph[j] * r_inv;
            }
        }
        let infeasible = |kind| Error::Feasibility { step, kind };
        let m_inv = m
            .inverse()
            .ok_or(infeasible(FeasibilityKind::IllConditioned {
                condition: f64::INFINITY,
            }))?;
        let condition = m.norm1() * m_inv.norm1();
        if !(condition <= MAX_CONDITION) {
            return Err(infeasible(FeasibilityKind::IllConditioned { condition }));
        }

        // P M^-1 is the a-posteriori covariance; the gain is (P M^-1) h / R.
        let mut p_next = p.mul(&m_inv);
        let gain: Vec<f64> = p_next.mul_vec(h).into_iter().map(|g| g * r_inv).collect();
        let innovation = z - dot(h, &self.x_hat);

        p_next.symmetrize();
        p_next.add_diagonal(config.process_noise);
        if !p_next.is_finite() || p_next.cholesky().is_none() {
            return Err(infeasible(FeasibilityKind::NotPositiveDefinite));
        }

        for (x, g) in self.x_hat.iter_mut().zip(&gain) {
            *x += g * innovation;
        }
        self.covariance = p_next;
        self.step = step;
        Ok(())
    }

    pub fn envelopes(&self) -> EnvelopeFrame {
        extract_envelopes(self)
    }
}

/// `E_n = sqrt(x_{2n-1}^2 + x_{2n}^2)`, `phi_n = atan2(x_{2n}, x_{2n-1})`.
pub fn extract_envelopes(state: &HinfState) -> EnvelopeFrame {
    let (envelopes, phases) = state
        .x_hat
        .chunks_exact(2)
        .map(|pair| {
            (
                libm::hypot(pair[0], pair[1]),
                wrap_phase_symmetric(libm::atan2(pair[1], pair[0])),
            )
        })
        .unzip();
    EnvelopeFrame {
        step: state.step,
        envelopes,
        phases,
    }
}
