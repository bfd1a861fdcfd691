//! Sobolev, weighted-physical and low-frequency window norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{japanese, Dim, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpec {
    Sobolev { s: f64 },
    WeightedPhysical { r: f64 },
    LambdaWindow { lambda: f64 },
    /// `H^s` plus the `L^λ(−1,1)` window of the coefficients.
    Adapted { s: f64, lambda: f64 },
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NormSpec::WeightedPhysical { r } if r < 0.0 => {
                Err(Error::InvalidParameter(format!("weight exponent must be >= 0, got {r}")))
            }
            NormSpec::LambdaWindow { lambda } | NormSpec::Adapted { lambda, .. } if lambda <= 1.0 => {
                Err(Error::InvalidParameter(format!("window exponent must exceed 1, got {lambda}")))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, f: &FourierField) -> Result<f64> {
        self.validate()?;
        match *self {
            NormSpec::Sobolev { s } => Ok(sobolev_norm(f, s)),
            NormSpec::WeightedPhysical { r } => weighted_norm(&f.grid, &f.to_physical(), r),
            NormSpec::LambdaWindow { lambda } => lambda_window_norm(f, lambda),
            NormSpec::Adapted { s, lambda } => adapted_norm(f, s, lambda),
        }
    }
}

/// `(Σ ⟨ξ⟩^{2s} |f̂(ξ)|² Δξ^d)^{1/2}`.
pub fn sobolev_norm(f: &FourierField, s: f64) -> f64 {
    let g = f.grid;
    let sum: f64 = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let w = if s == 0.0 { 1.0 } else { g.freq(i).bracket().powf(2.0 * s) };
            w * c.norm_sqr()
        })
        .sum();
    (sum * g.cell_measure()).sqrt()
}

/// Physical `L²` norm in the same measure as [`sobolev_norm`] at `s = 0`.
pub fn l2_physical(grid: &SpectralGrid, values: &[Complex64]) -> Result<f64> {
    weighted_norm(grid, values, 0.0)
}

/// `(∫ ⟨x_c⟩^{2r} |f|²)^{1/2}` with `x_c` the signed distance to the box center,
/// normalized so that `r = 0` agrees with [`sobolev_norm`] at `s = 0`.
pub fn weighted_norm(grid: &SpectralGrid, values: &[Complex64], r: f64) -> Result<f64> {
    if values.len() != grid.len() {
        return Err(Error::SizeMismatch {
            expected: grid.len(),
            got: values.len(),
        });
    }
    if r < 0.0 {
        return Err(Error::InvalidParameter(format!("weight exponent must be >= 0, got {r}")));
    }
    let c = grid.box_length / 2.0;
    let sum: f64 = grid
        .positions()
        .iter()
        .zip(values)
        .map(|(p, v)| {
            let dist = match grid.dim {
                Dim::One => (p.x - c).abs(),
                Dim::Two => (p.x - c).hypot(p.y - c),
            };
            japanese(dist).powf(2.0 * r) * v.norm_sqr()
        })
        .sum();
    Ok((sum / grid.len() as f64 * grid.cell_measure()).sqrt())
}

/// Riemann-sum `L^λ` norm of the coefficients over `|ξ| < 1`.
pub fn lambda_window_norm(f: &FourierField, lambda: f64) -> Result<f64> {
    if lambda <= 1.0 {
        return Err(Error::InvalidParameter(format!("window exponent must exceed 1, got {lambda}")));
    }
    let g = f.grid;
    if g.dim != Dim::One {
        return Err(Error::InvalidParameter("window norm is defined on 1D grids".into()));
    }
    if lambda.is_infinite() {
        return Ok((0..f.len())
            .filter(|&i| g.freq(i).x.abs() < 1.0)
            .map(|i| f.coeffs[i].norm())
            .fold(0.0, f64::max));
    }
    let sum: f64 = (0..f.len())
        .filter(|&i| g.freq(i).x.abs() < 1.0)
        .map(|i| f.coeffs[i].norm().powf(lambda))
        .sum();
    Ok((sum * g.dxi()).powf(1.0 / lambda))
}

pub fn adapted_norm(f: &FourierField, s: f64, lambda: f64) -> Result<f64> {
    Ok(sobolev_norm(f, s) + lambda_window_norm(f, lambda)?)
}

/// Exponent triple `(σ, λ, ρ)` of the adapted low-frequency space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptedExponents {
    pub sigma: f64,
    pub lambda: f64,
    pub rho: f64,
}

impl AdaptedExponents {
    /// Defaults `σ = 3/4`, `λ = 2/(1−s)⁺`, and `ρ` from `1 − σ = 1/ρ + 1/λ`.
    pub fn defaults(s: f64) -> Self {
        let sigma = 0.75;
        let lambda = if s < 1.0 { 2.0 / (1.0 - s) } else { f64::INFINITY };
        AdaptedExponents {
            sigma,
            lambda,
            rho: rho_from(sigma, lambda),
        }
    }

    /// Checks the three coupling constraints for data regularity `s` and gain `eps`.
    pub fn validate(&self, s: f64, eps: f64) -> Result<()> {
        let lam_max = if s < 1.0 { 2.0 / (1.0 - s) } else { f64::INFINITY };
        let identity = 1.0 - self.sigma - 1.0 / self.rho - 1.0 / self.lambda;
        let mut problems = Vec::new();
        if identity.abs() > 1e-9 {
            problems.push(format!("1 - sigma - 1/rho - 1/lambda = {identity:.3e}"));
        }
        if !(self.rho * (2.0 * self.sigma - 1.0 - eps) > 1.0) {
            problems.push(format!(
                "rho (2 sigma - 1 - eps) = {} must exceed 1",
                self.rho * (2.0 * self.sigma - 1.0 - eps)
            ));
        }
        if self.lambda > lam_max * (1.0 + 1e-12) || self.lambda <= 1.0 {
            problems.push(format!("lambda = {} must lie in (1, {lam_max}]", self.lambda));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(problems.join("; ")))
        }
    }
}

/// `ρ` solving `1 − σ = 1/ρ + 1/λ` (infinite when the right side is saturated).
pub fn rho_from(sigma: f64, lambda: f64) -> f64 {
    let inv = 1.0 - sigma - 1.0 / lambda;
    if inv.abs() < 1e-14 {
        f64::INFINITY
    } else {
        1.0 / inv
    }
}
