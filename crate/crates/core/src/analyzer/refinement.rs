//! Grid-refinement ratios of Duhamel norms and the difference (Lipschitz) probe.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::evolution::{duhamel_term, evolve, StepperConfig};
use crate::field::FourierField;
use crate::norms::sobolev_norm;

use super::gain::SmoothingConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub eps: f64,
    pub norm_coarse: Vec<f64>,
    pub norm_fine: Vec<f64>,
    /// Per-seed `‖w‖_{H^{s+ε}}(fine) / ‖w‖_{H^{s+ε}}(coarse)`.
    pub ratios: Vec<f64>,
    /// Geometric mean of the per-seed ratios.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTable {
    pub equation: String,
    pub s: f64,
    pub coarse_modes: usize,
    pub fine_modes: usize,
    pub seeds: Vec<u64>,
    pub rows: Vec<RefinementRow>,
}

impl RefinementTable {
    pub fn ratio_at(&self, eps: f64) -> Option<f64> {
        self.rows.iter().find(|r| (r.eps - eps).abs() < 1e-12).map(|r| r.ratio)
    }
}

fn duhamel_norms(cfg: &SmoothingConfig, seed: u64, modes: usize, eps_list: &[f64]) -> Result<Vec<f64>> {
    let grid = cfg.grid.with_modes(modes)?;
    let u0 = cfg.initial_data(seed, &grid)?;
    let traj = evolve(&u0, &cfg.equation, &cfg.stepper)?;
    let w = duhamel_term(&traj, cfg.stepper.t_end)?;
    Ok(eps_list.iter().map(|e| sobolev_norm(&w, cfg.s + e)).collect())
}

/// Same seeds evaluated at `coarse` and `fine` modes; finer data extends the
/// coarse draw on shared frequencies.
pub fn refinement_diagnostic(cfg: &SmoothingConfig, eps_list: &[f64], coarse: usize, fine: usize) -> Result<RefinementTable> {
    cfg.validate()?;
    if fine <= coarse {
        return Err(Error::InvalidParameter(format!("fine resolution {fine} must exceed coarse {coarse}")));
    }
    let per_seed: Vec<(Vec<f64>, Vec<f64>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            Ok((
                duhamel_norms(cfg, seed, coarse, eps_list)?,
                duhamel_norms(cfg, seed, fine, eps_list)?,
            ))
        })
        .collect::<Result<_>>()?;
    let rows = eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let norm_coarse: Vec<f64> = per_seed.iter().map(|p| p.0[k]).collect();
            let norm_fine: Vec<f64> = per_seed.iter().map(|p| p.1[k]).collect();
            let ratios: Vec<f64> = norm_coarse
                .iter()
                .zip(&norm_fine)
                .map(|(c, f)| if *c > 0.0 { f / c } else { 0.0 })
                .collect();
            let ratio = if ratios.iter().all(|r| *r > 0.0) {
                (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp()
            } else {
                0.0
            };
            RefinementRow {
                eps,
                norm_coarse,
                norm_fine,
                ratios,
                ratio,
            }
        })
        .collect();
    Ok(RefinementTable {
        equation: cfg.equation.kind.name().into(),
        s: cfg.s,
        coarse_modes: coarse,
        fine_modes: fine,
        seeds: cfg.seeds.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzProbe {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    /// Set when `u₀ = v₀`; the ratio is reported as `0`.
    pub degenerate: bool,
}

/// `‖w_u(t) − w_v(t)‖_{H^{s+ε}} / ‖u₀ − v₀‖_{H^s}` at `t = t_end`.
pub fn lipschitz_probe(
    eq: &EquationSpec,
    stepper: &StepperConfig,
    s: f64,
    eps: f64,
    u0: &FourierField,
    v0: &FourierField,
) -> Result<LipschitzProbe> {
    u0.grid.check_same(&v0.grid)?;
    let denominator = sobolev_norm(&u0.sub(v0)?, s);
    let wu = duhamel_term(&evolve(u0, eq, stepper)?, stepper.t_end)?;
    let wv = duhamel_term(&evolve(v0, eq, stepper)?, stepper.t_end)?;
    let numerator = sobolev_norm(&wu.sub(&wv)?, s + eps);
    if denominator == 0.0 {
        return Ok(LipschitzProbe {
            numerator,
            denominator,
            ratio: 0.0,
            degenerate: true,
        });
    }
    Ok(LipschitzProbe {
        numerator,
        denominator,
        ratio: numerator / denominator,
        degenerate: false,
    })
}
