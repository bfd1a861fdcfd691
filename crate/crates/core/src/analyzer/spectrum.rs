//! Shell-averaged spectra and log-log decay fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FourierField;

pub const DEFAULT_SHELLS_PER_OCTAVE: u32 = 8;
pub const MIN_FIT_SHELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    /// Geometric center of `[ρ_m, ρ_{m+1})`.
    pub center: f64,
    pub rms: f64,
    pub count: usize,
}

/// Shell index of a radius `|ξ| ≥ 1` for edges `ρ_m = 2^{m/q}`.
fn shell_index(r: f64, per_octave: u32) -> i64 {
    (r.log2() * per_octave as f64 + 1e-12).floor() as i64
}

/// RMS of `|f̂|` over shells `ρ_m ≤ |ξ| < ρ_{m+1}`, `ρ_m = 2^{m/q}`, `m ≥ 0`.
pub fn shell_spectrum(f: &FourierField, per_octave: u32) -> Vec<Shell> {
    let g = f.grid;
    let q = per_octave.max(1);
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for (i, c) in f.coeffs.iter().enumerate() {
        let r = g.freq(i).norm();
        if r < 1.0 {
            continue;
        }
        let m = shell_index(r, q) as usize;
        if sums.len() <= m {
            sums.resize(m + 1, (0.0, 0));
        }
        sums[m].0 += c.norm_sqr();
        sums[m].1 += 1;
    }
    sums.into_iter()
        .enumerate()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(m, (s, n))| Shell {
            center: 2f64.powf((m as f64 + 0.5) / q as f64),
            rms: (s / n as f64).sqrt(),
            count: n,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub r2: f64,
    pub shells: usize,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, stderr, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::DegenerateFit(format!("{n} points")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok((slope, intercept, stderr, r2))
}

/// Power-law fit of shell rms against shell center over `[lo, hi]`.
pub fn fit_decay(spectrum: &[Shell], lo: f64, hi: f64) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = spectrum
        .iter()
        .filter(|s| s.center >= lo && s.center <= hi && s.rms > 0.0)
        .map(|s| (s.center.ln(), s.rms.ln()))
        .collect();
    if pts.len() < MIN_FIT_SHELLS {
        return Err(Error::EmptyWindow {
            lo,
            hi,
            shells: pts.len(),
            need: MIN_FIT_SHELLS,
        });
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, intercept, stderr, r2) = linear_fit(&x, &y)?;
    Ok(SlopeFit {
        xi_lo: lo,
        xi_hi: hi,
        slope,
        intercept,
        stderr,
        r2,
        shells: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use num_complex::Complex64;

    #[test]
    fn single_mode_one_shell() {
        let g = SpectralGrid::line(16.0, 128).unwrap();
        let mut f = FourierField::zeros(g, false);
        f.coeffs[g.slot(9, 0).unwrap()] = Complex64::new(2.0, 0.0);
        let sp = shell_spectrum(&f, 2);
        assert_eq!(sp.iter().filter(|s| s.rms > 0.0).count(), 1);
    }

    #[test]
    fn exact_power_law_slope() {
        let g = SpectralGrid::line(64.0, 8192).unwrap();
        let f = FourierField::from_symbol(g, false, |xi| Complex64::new(xi.norm().max(1e-9).powf(-1.7), 0.0));
        let fit = fit_decay(&shell_spectrum(&f, 4), 8.0, 200.0).unwrap();
        assert!((fit.slope + 1.7).abs() < 2e-3, "{}", fit.slope);
    }

    #[test]
    fn line_fit_is_exact_on_lines() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 1.7 * v).collect();
        let (s, b, e, r2) = linear_fit(&x, &y).unwrap();
        assert!((s + 1.7).abs() < 1e-12 && (b - 3.0).abs() < 1e-12 && e < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
