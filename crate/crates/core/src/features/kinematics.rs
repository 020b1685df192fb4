//! Finite differences over the full sample sequence, pen-up samples
//! included. Units are tablet units per sample interval.

use crate::error::{Error, Result};

pub fn first_derivative(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::TooShort {
            len: series.len(),
            min: 2,
        });
    }
    Ok(series.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn second_derivative(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 3 {
        return Err(Error::TooShort {
            len: series.len(),
            min: 3,
        });
    }
    Ok(series.windows(3).map(|w| (w[2] - w[1]) - (w[1] - w[0])).collect())
}

fn check_shape(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Shape {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Instantaneous speed `sqrt(dx^2 + dy^2)`.
pub fn speed_series(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_shape(x, y)?;
    let dx = first_derivative(x)?;
    let dy = first_derivative(y)?;
    Ok(dx.iter().zip(&dy).map(|(a, b)| a.hypot(*b)).collect())
}

/// Magnitude of the per-axis second differences.
pub fn acceleration_series(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_shape(x, y)?;
    let ddx = second_derivative(x)?;
    let ddy = second_derivative(y)?;
    Ok(ddx.iter().zip(&ddy).map(|(a, b)| a.hypot(*b)).collect())
}
