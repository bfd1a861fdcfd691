//! Phase gauge `w = exp(−i∫₀^x |u|² dy) u` linking the derivative NLS to its gauged form.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Dim, SpectralGrid};

/// Trapezoid cumulative integral of `|u|²` from the left box edge, one value per sample.
pub fn cumulative_density(grid: &SpectralGrid, u: &[Complex64]) -> Result<Vec<f64>> {
    if grid.dim != Dim::One {
        return Err(Error::InvalidParameter("gauge transform is one-dimensional".into()));
    }
    if u.len() != grid.modes {
        return Err(Error::SizeMismatch {
            expected: grid.modes,
            got: u.len(),
        });
    }
    let h = grid.dx();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(u.len());
    for (i, v) in u.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * h * (u[i - 1].norm_sqr() + v.norm_sqr());
        }
        out.push(acc);
    }
    Ok(out)
}

fn rotate(grid: &SpectralGrid, u: &[Complex64], direction: f64) -> Result<Vec<Complex64>> {
    let theta = cumulative_density(grid, u)?;
    Ok(u
        .iter()
        .zip(theta)
        .map(|(v, th)| v * Complex64::from_polar(1.0, direction * th))
        .collect())
}

pub fn gauge_forward(grid: &SpectralGrid, u: &[Complex64]) -> Result<Vec<Complex64>> {
    rotate(grid, u, -1.0)
}

pub fn gauge_inverse(grid: &SpectralGrid, w: &[Complex64]) -> Result<Vec<Complex64>> {
    rotate(grid, w, 1.0)
}
