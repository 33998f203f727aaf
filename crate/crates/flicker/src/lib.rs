//! Waveform synthesis, estimation reports, Monte Carlo campaigns and the
//! baseline comparison on top of `flicker-core`, plus the JSON and CSV
//! formats the command-line tool reads and writes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod config;
pub mod error;
pub mod io;
pub mod report;

pub use error::{Error, Result};
