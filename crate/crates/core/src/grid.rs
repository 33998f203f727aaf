//! The IEC 61000-4-15 flicker frequency grid and its unity-sensation table.

use crate::error::{Error, Result};

/// Number of flicker frequencies on the grid.
pub const GRID_LEN: usize = 36;

/// Inputs per ADALINE unit: a DC pair plus a cos/sin pair per grid frequency.
pub const BASIS_LEN: usize = 2 + 2 * GRID_LEN;

/// Flicker frequencies in Hz, ascending.
pub const IEC_FREQUENCIES: [f64; GRID_LEN] = [
    0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0, 8.8, 9.5, 10.0,
    10.5, 11.0, 11.5, 12.0, 13.0, 14.0, 15.0, 16.0, 17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 23.0, 24.0,
    25.0,
];

/// Relative fluctuation `dV/V` at each grid frequency that produces unit
/// instantaneous flicker sensation in a 230 V / 50 Hz system.
pub const IEC_UNITY_AMPLITUDES: [f64; GRID_LEN] = [
    0.0234, 0.01432, 0.0108, 0.00882, 0.00754, 0.00654, 0.00568, 0.005, 0.00446, 0.00398, 0.0036,
    0.00328, 0.003, 0.0028, 0.00266, 0.00256, 0.0025, 0.00254, 0.0026, 0.0027, 0.00282, 0.00296,
    0.00312, 0.00348, 0.00388, 0.00432, 0.0048, 0.0053, 0.00584, 0.0064, 0.007, 0.0076, 0.00824,
    0.0089, 0.00962, 0.01042,
];

const MATCH_TOLERANCE_HZ: f64 = 1e-9;

/// The fixed 36-bin flicker grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlickerGrid;

impl FlickerGrid {
    pub const fn iec() -> Self {
        FlickerGrid
    }

    pub fn frequencies(&self) -> &'static [f64; GRID_LEN] {
        &IEC_FREQUENCIES
    }

    pub fn len(&self) -> usize {
        GRID_LEN
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of `frequency` on the grid.
    pub fn index_of(&self, frequency: f64) -> Result<usize> {
        IEC_FREQUENCIES
            .iter()
            .position(|f| (f - frequency).abs() <= MATCH_TOLERANCE_HZ)
            .ok_or(Error::UnknownFrequency(frequency))
    }
}

/// Unity-sensation relative amplitude for a grid frequency.
pub fn iec_reference_amplitude(frequency: f64) -> Result<f64> {
    FlickerGrid
        .index_of(frequency)
        .map(|i| IEC_UNITY_AMPLITUDES[i])
}
