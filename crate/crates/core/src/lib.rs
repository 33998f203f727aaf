//! Voltage-flicker estimation primitives.
//!
//! The estimator runs in two stages. A robust H-infinity filter tracks the
//! quadrature state of every power harmonic and yields one amplitude envelope
//! per harmonic; an ADALINE bank then decomposes each envelope online into a
//! DC term plus 36 sinusoids on the IEC 61000-4-15 flicker grid.
//!
//! Around that core the crate provides the generative signal model used for
//! validation, a zero-crossing frequency tracker, a squaring/Goertzel spectral
//! baseline and the error and sensation metrics.
//!
//! The crate is `no_std` and only needs `alloc`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![no_std]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

pub mod adaline;
pub mod baseline;
mod error;
pub mod frequency;
pub mod grid;
pub mod hinf;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod scenarios;
pub mod signal;

pub use adaline::{AdalineConfig, AdalineState, FlickerAmplitudes, WeightInit};
pub use baseline::{BaselineConfig, BaselineEstimate};
pub use error::{Error, FeasibilityKind, Result};
pub use frequency::FrequencyEstimate;
pub use grid::FlickerGrid;
pub use hinf::{EnvelopeFrame, HinfConfig, HinfState};
pub use metrics::{ErrorStats, SensationReport};
pub use pipeline::{FrequencyMode, Pipeline, PipelineConfig, PipelineOutput};
pub use signal::{
    FlickerComponent, HarmonicComponent, NoiseSpec, SampleSeries, SamplingSpec, WaveformSpec,
};
