//! Pen-state timing and pressure-threshold counts.
//!
//! A sample is pen-down when its pressure is strictly positive. Strokes are
//! counted from the edges of that binary signal: every rising edge starts a
//! down stroke, every falling edge starts an up stroke, and the first sample
//! opens a stroke of its own state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ink::MAX_PRESSURE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrokeCounts {
    pub down: usize,
    pub up: usize,
}

fn non_empty(pressure: &[u16]) -> Result<()> {
    if pressure.is_empty() {
        Err(Error::EmptyInput)
    } else {
        Ok(())
    }
}

pub fn stroke_counts(pressure: &[u16]) -> Result<StrokeCounts> {
    non_empty(pressure)?;
    let first_down = pressure[0] > 0;
    let (rising, falling) = pressure
        .windows(2)
        .fold((0, 0), |(r, f), w| match (w[0] > 0, w[1] > 0) {
            (false, true) => (r + 1, f),
            (true, false) => (r, f + 1),
            _ => (r, f),
        });
    Ok(StrokeCounts {
        down: usize::from(first_down) + rising,
        up: usize::from(!first_down) + falling,
    })
}

/// Samples with zero pressure.
pub fn time_in_air(pressure: &[u16]) -> Result<usize> {
    non_empty(pressure)?;
    Ok(pressure.iter().filter(|&&p| p == 0).count())
}

/// Samples with positive pressure.
pub fn time_down(pressure: &[u16]) -> Result<usize> {
    non_empty(pressure)?;
    Ok(pressure.iter().filter(|&&p| p > 0).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTimeUp {
    pub ratio: f64,
    /// Set when there is no pen-up stroke to normalize by; `ratio` is 0.
    pub degenerate: bool,
}

/// Time in air divided by the number of pen-up strokes.
pub fn normalized_time_up(pressure: &[u16]) -> Result<NormalizedTimeUp> {
    let air = time_in_air(pressure)?;
    let strokes = stroke_counts(pressure)?;
    Ok(if strokes.up == 0 {
        NormalizedTimeUp {
            ratio: 0.0,
            degenerate: true,
        }
    } else {
        NormalizedTimeUp {
            ratio: air as f64 / strokes.up as f64,
            degenerate: false,
        }
    })
}

/// Number of samples with pressure strictly above `threshold`.
pub fn pressure_above(pressure: &[u16], threshold: u16) -> Result<usize> {
    if threshold > MAX_PRESSURE {
        return Err(Error::Range(format!(
            "pressure threshold {threshold} above {MAX_PRESSURE}"
        )));
    }
    Ok(pressure.iter().filter(|&&p| p > threshold).count())
}

/// Number of samples with `low <= pressure <= high`.
pub fn pressure_band(pressure: &[u16], low: u16, high: u16) -> Result<usize> {
    if !(0 < low && low < high && high <= MAX_PRESSURE) {
        return Err(Error::Range(format!(
            "pressure band [{low}, {high}] must satisfy 0 < low < high <= {MAX_PRESSURE}"
        )));
    }
    Ok(pressure.iter().filter(|&&p| (low..=high).contains(&p)).count())
}
