//! First steps of the infinite normal form reduction on a frequency lattice.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nlsmooth_core::grid::japanese;
use nlsmooth_core::{EquationSpec, Error, Interaction, Result};

use crate::kernel::{PhaseKernel, Restriction};
use crate::lattice::{Lattice, LatticeField};
use crate::probe::ExponentFit;
use crate::estimate::{estimate_norm, EstimateOptions, InputNorm};
use crate::tuples::{apply_kernel, Tabulated};

/// `β_j = ((k−1)(j+1)+1)^k`.
pub fn beta_threshold(j: u32, k: u32) -> Result<f64> {
    if j < 1 || k < 2 {
        return Err(Error::InvalidParameter(format!("need j >= 1 and k >= 2, got j={j}, k={k}")));
    }
    Ok((((k - 1) * (j + 1) + 1) as f64).powi(k as i32))
}

/// Threshold `N` and smoothing exponent `σ`; the loss exponent `δ` is `σ` by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfrConfig {
    pub threshold: f64,
    pub sigma: f64,
    pub max_step: u32,
    pub s: f64,
    pub eps: f64,
}

impl InfrConfig {
    pub fn new(threshold: f64, sigma: f64, s: f64, eps: f64) -> Result<Self> {
        let cfg = InfrConfig {
            threshold,
            sigma,
            max_step: 1,
            s,
            eps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_step(mut self, j: u32) -> Result<Self> {
        self.max_step = j;
        self.validate()?;
        Ok(self)
    }

    pub fn delta(&self) -> f64 {
        self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 1.0) {
            return Err(Error::InvalidParameter(format!("threshold N must exceed 1, got {}", self.threshold)));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1), got {}", self.sigma)));
        }
        if !(1..=2).contains(&self.max_step) {
            return Err(Error::InvalidParameter(format!("max step must be 1 or 2, got {}", self.max_step)));
        }
        Ok(())
    }

    /// Near-resonance test of step `j ≥ 2`: `|Φ_new| ≤ β_j · max{|Φ₁|^{1−δ}, |Φ_prev|^{1−δ}}`.
    pub fn stays_near(&self, j: u32, degree: u32, phi_new: f64, phi_first: f64, phi_prev: f64) -> Result<bool> {
        let beta = beta_threshold(j, degree)?;
        let p = 1.0 - self.delta();
        Ok(phi_new.abs() <= beta * phi_first.abs().powf(p).max(phi_prev.abs().powf(p)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitTerms {
    /// `|Φ| ≤ N`.
    pub near: LatticeField,
    /// `|Φ| > N`.
    pub far: LatticeField,
}

pub fn split_resonant(
    eq: &EquationSpec,
    term: Interaction,
    lattice: Lattice,
    inputs: &[&LatticeField],
    threshold: f64,
) -> Result<SplitTerms> {
    let near = PhaseKernel::new(*eq, term, Restriction::Near { threshold });
    let far = PhaseKernel::new(*eq, term, Restriction::Far { threshold });
    Ok(SplitTerms {
        near: apply_kernel(lattice, &near, inputs)?,
        far: apply_kernel(lattice, &far, inputs)?,
    })
}

/// Term with kernel `m e^{itΦ}/(iΦ) · 1_{|Φ|>N}`.
pub fn boundary_term(
    eq: &EquationSpec,
    term: Interaction,
    lattice: Lattice,
    inputs: &[&LatticeField],
    threshold: f64,
    time: f64,
) -> Result<LatticeField> {
    if !(threshold > 1.0) {
        return Err(Error::InvalidParameter(format!("threshold N must exceed 1, got {threshold}")));
    }
    let k = PhaseKernel::new(*eq, term, Restriction::Boundary { threshold, time });
    apply_kernel(lattice, &k, inputs)
}

/// Boundary term at `t` minus its value at `0`.
pub fn boundary_bracket(
    eq: &EquationSpec,
    term: Interaction,
    lattice: Lattice,
    inputs: &[&LatticeField],
    threshold: f64,
    time: f64,
) -> Result<LatticeField> {
    let end = boundary_term(eq, term, lattice, inputs, threshold, time)?;
    let start = boundary_term(eq, term, lattice, inputs, threshold, 0.0)?;
    Ok(end.add(&start.scaled(Complex64::new(-1.0, 0.0))))
}

/// Gaussian coefficients `⟨ξ⟩^{−s−d/2} g(ξ)`, so the profile lies in `H^{s'}` exactly for `s' < s`.
pub fn sharp_profile(lattice: Lattice, s: f64, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = lattice.dim.as_usize() as f64;
    LatticeField::from_fn(lattice, |xi| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im) * (japanese(xi.norm()).powf(-s - d / 2.0) / std::f64::consts::SQRT_2)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfrRow {
    pub threshold: f64,
    /// Ensemble mean of `log ‖near‖_{H^{s+ε}}`, exponentiated.
    pub near: f64,
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrScaling {
    pub config: InfrConfig,
    pub lattice: Lattice,
    pub ensemble: usize,
    pub rows: Vec<InfrRow>,
    /// Fits over the upper half of the threshold range.
    pub near_fit: Option<ExponentFit>,
    pub boundary_fit: Option<ExponentFit>,
    pub flags: Vec<String>,
}

/// Slopes of the near-resonant and boundary norms against `N` for an ensemble of
/// sharp random profiles.
pub fn verify_scalings(
    eq: &EquationSpec,
    config: &InfrConfig,
    thresholds: &[f64],
    lattice: Lattice,
    ensemble: usize,
    seed: u64,
) -> Result<InfrScaling> {
    config.validate()?;
    if thresholds.len() < crate::probe::MIN_SWEEP_VALUES {
        return Err(Error::InvalidParameter(format!(
            "need at least {} thresholds, got {}",
            crate::probe::MIN_SWEEP_VALUES,
            thresholds.len()
        )));
    }
    if thresholds.iter().any(|&n| !(n > 1.0)) {
        return Err(Error::InvalidParameter("thresholds must exceed 1".into()));
    }
    let term = eq.interactions()[0];
    let profiles: Vec<LatticeField> = (0..ensemble.max(1) as u64)
        .map(|i| sharp_profile(lattice, config.s, seed.wrapping_add(i)))
        .collect();
    let target = config.s + config.eps;
    let rows: Vec<InfrRow> = thresholds
        .par_iter()
        .map(|&n| {
            let mut near = 0.0;
            let mut boundary = 0.0;
            for u in &profiles {
                let inputs = vec![u; term.degree()];
                let split = split_resonant(eq, term, lattice, &inputs, n)?;
                let b = boundary_term(eq, term, lattice, &inputs, n, 0.0)?;
                near += split.near.sobolev_norm(target).max(f64::MIN_POSITIVE).ln();
                boundary += b.sobolev_norm(target).max(f64::MIN_POSITIVE).ln();
            }
            let m = profiles.len() as f64;
            Ok(InfrRow {
                threshold: n,
                near: (near / m).exp(),
                boundary: (boundary / m).exp(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(fit_rows(config, lattice, profiles.len(), rows))
}

/// Same fits with the ensemble replaced by estimated operator norms from
/// `H^s × … × H^s` to `H^{s+ε}` (worst-case inputs found by alternating ascent).
pub fn verify_norm_scalings(
    eq: &EquationSpec,
    config: &InfrConfig,
    thresholds: &[f64],
    lattice: Lattice,
    opts: &EstimateOptions,
) -> Result<InfrScaling> {
    config.validate()?;
    if thresholds.len() < crate::probe::MIN_SWEEP_VALUES {
        return Err(Error::InvalidParameter(format!(
            "need at least {} thresholds, got {}",
            crate::probe::MIN_SWEEP_VALUES,
            thresholds.len()
        )));
    }
    let term = eq.interactions()[0];
    let target = config.s + config.eps;
    let mut rows = Vec::with_capacity(thresholds.len());
    for &n in thresholds {
        let near = PhaseKernel::new(*eq, term, Restriction::Near { threshold: n });
        let bnd = PhaseKernel::new(*eq, term, Restriction::Boundary { threshold: n, time: 0.0 });
        let near = estimate_norm(&Tabulated::build(lattice, &near)?, config.s, target, InputNorm::Sobolev, opts)?;
        let bnd = estimate_norm(&Tabulated::build(lattice, &bnd)?, config.s, target, InputNorm::Sobolev, opts)?;
        rows.push(InfrRow {
            threshold: n,
            near: near.lower,
            boundary: bnd.lower,
        });
    }
    Ok(fit_rows(config, lattice, 0, rows))
}

fn fit_rows(config: &InfrConfig, lattice: Lattice, ensemble: usize, rows: Vec<InfrRow>) -> InfrScaling {
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
    let upper = &sorted[sorted.len() / 2..];
    let mut flags = Vec::new();
    let mut fit = |pick: fn(&InfrRow) -> f64, name: &str| {
        let x: Vec<f64> = upper.iter().map(|r| r.threshold).collect();
        let y: Vec<f64> = upper.iter().map(pick).collect();
        match log_exponent(&x, &y) {
            Ok(f) => Some(f),
            Err(e) => {
                flags.push(format!("degenerate {name} fit: {e}"));
                None
            }
        }
    };
    let near_fit = fit(|r| r.near, "near-resonant");
    let boundary_fit = fit(|r| r.boundary, "boundary");
    InfrScaling {
        config: *config,
        lattice,
        ensemble,
        rows,
        near_fit,
        boundary_fit,
        flags,
    }
}

/// Exponent of `y ∝ x^p` (plain logarithms; thresholds exceed 1).
fn log_exponent(x: &[f64], y: &[f64]) -> std::result::Result<ExponentFit, String> {
    if y.iter().any(|&v| !(v > 1e-300)) {
        return Err("vanishing norms".into());
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (slope, _, stderr, r2) = nlsmooth_core::analyzer::linear_fit(&lx, &ly).map_err(|e| e.to_string())?;
    Ok(ExponentFit {
        exponent: slope,
        stderr,
        r2,
        points: x.len(),
    })
}
