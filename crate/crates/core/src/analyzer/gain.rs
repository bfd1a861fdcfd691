//! Ensemble estimate of the smoothing gain `ε̂ = slope(u₀) − slope(w)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::{EquationKind, EquationSpec};
use crate::error::{Error, Result};
use crate::evolution::{duhamel_term, evolve, StepperConfig, Trajectory};
use crate::field::FourierField;
use crate::grid::{Dim, SpectralGrid};
use crate::norms::{sobolev_norm, weighted_norm};
use crate::rough::{generate, generate_weighted, RoughDataSpec, Symmetry};

use super::spectrum::{fit_decay, shell_spectrum, SlopeFit, DEFAULT_SHELLS_PER_OCTAVE};

pub const R2_FLAG: f64 = 0.95;
pub const NO_DUHAMEL: &str = "no Duhamel term";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub equation: EquationSpec,
    pub s: f64,
    pub grid: SpectralGrid,
    pub stepper: StepperConfig,
    pub seeds: Vec<u64>,
    pub amplitude: f64,
    pub margin: f64,
    /// Localized data in `H^s ∩ L²(⟨x⟩^{s})`.
    pub weighted: bool,
    /// Fit window; `None` selects `[8, ξ_cut/2]`.
    pub window: Option<(f64, f64)>,
    pub shells_per_octave: u32,
    pub eps_step: f64,
}

impl SmoothingConfig {
    /// Resolution and step size per equation at which the measured gain is
    /// converged in `dt` on this box.
    pub fn defaults(kind: EquationKind, s: f64) -> Self {
        let (grid, dt, t_end) = match kind {
            EquationKind::Mzk => (SpectralGrid::plane(16.0, 256).expect("valid grid"), 1e-4, 0.25),
            EquationKind::Mkdv => (SpectralGrid::line(128.0, 4096).expect("valid grid"), 6.25e-5, 1.0),
            EquationKind::Kdv => (SpectralGrid::line(128.0, 4096).expect("valid grid"), 6.25e-5, 1.0),
            EquationKind::Dnls => (SpectralGrid::line(128.0, 4096).expect("valid grid"), 2.5e-4, 1.0),
            EquationKind::Nls => (SpectralGrid::line(128.0, 4096).expect("valid grid"), 1e-3, 1.0),
        };
        SmoothingConfig {
            equation: EquationSpec::new(kind).renormalized(true),
            s,
            grid,
            stepper: StepperConfig::new(dt, t_end),
            seeds: (0..8).collect(),
            amplitude: 0.1,
            margin: 0.01,
            weighted: kind == EquationKind::Kdv,
            window: None,
            shells_per_octave: DEFAULT_SHELLS_PER_OCTAVE,
            eps_step: 0.1,
        }
    }

    pub fn fit_window(&self) -> (f64, f64) {
        self.window.unwrap_or((8.0, 0.5 * self.grid.xi_cut()))
    }

    pub fn validate(&self) -> Result<f64> {
        let eps_th = self.equation.smoothing_law(self.s)?;
        self.grid.validate()?;
        self.stepper.validate()?;
        if self.grid.dim != self.equation.dim() {
            return Err(Error::GridMismatch(format!(
                "{} needs a {}D grid",
                self.equation.kind,
                self.equation.dim().as_usize()
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seed list is empty".into()));
        }
        if self.weighted && self.grid.dim != Dim::One {
            return Err(Error::InvalidParameter("weighted data is one-dimensional".into()));
        }
        let (lo, hi) = self.fit_window();
        if !(lo < hi && hi <= 0.8 * self.grid.xi_cut() * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "fit window [{lo}, {hi}] must satisfy lo < hi <= 0.8 xi_cut = {}",
                0.8 * self.grid.xi_cut()
            )));
        }
        if !(self.eps_step > 0.0 && self.eps_step <= 0.1) {
            return Err(Error::InvalidParameter(format!("eps step must lie in (0, 0.1], got {}", self.eps_step)));
        }
        Ok(eps_th)
    }

    pub fn data_spec(&self, seed: u64) -> RoughDataSpec {
        let sym = if self.equation.kind.is_real() {
            Symmetry::Real
        } else {
            Symmetry::Complex
        };
        let mut spec = RoughDataSpec::new(self.s, seed, sym).with_amplitude(self.amplitude);
        spec.margin = self.margin;
        spec
    }

    pub fn initial_data(&self, seed: u64, grid: &SpectralGrid) -> Result<FourierField> {
        let spec = self.data_spec(seed);
        if self.weighted {
            generate_weighted(&spec, grid, self.s / 2.0)
        } else {
            generate(&spec, grid)
        }
    }

    /// `ε` values `0, step, …` covering `[0, ε_th + 0.4]`.
    pub fn eps_grid(&self, eps_th: f64) -> Vec<f64> {
        let top = eps_th + 0.4;
        let n = (top / self.eps_step - 1e-9).ceil() as usize;
        (0..=n).map(|i| (i as f64 * self.eps_step).min(top)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub seed: u64,
    pub eps: f64,
    pub time: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub u0_fit: Option<SlopeFit>,
    pub w_fit: Option<SlopeFit>,
    pub eps_hat: Option<f64>,
    /// Gains over the narrow windows `[8, ξ_cut/4]` and `[16, ξ_cut/2]`.
    pub window_check: Option<(f64, f64)>,
    /// Largest `weighted_norm(u(t), s/2) / weighted_norm(u₀, s/2)` along the run.
    pub persistence: Option<f64>,
    pub flags: Vec<String>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub equation: String,
    pub s: f64,
    pub eps_th: f64,
    pub eps_hat_mean: Option<f64>,
    pub eps_hat_std: Option<f64>,
    pub seeds: Vec<SeedOutcome>,
    pub eps_grid: Vec<f64>,
    pub times: Vec<f64>,
    pub ladder: Vec<LadderRow>,
    pub window: (f64, f64),
    pub config: SmoothingConfig,
    pub data_model: String,
    #[serde(default)]
    pub config_hash: String,
    pub notes: Vec<String>,
}

impl SmoothingReport {
    pub fn valid_gains(&self) -> Vec<f64> {
        self.seeds.iter().filter_map(|s| s.eps_hat).collect()
    }

    pub fn max_persistence(&self) -> Option<f64> {
        self.seeds
            .iter()
            .filter_map(|s| s.persistence)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

/// Gain between a datum and its Duhamel term over one window.
pub fn gain_between(u0: &FourierField, w: &FourierField, window: (f64, f64), per_octave: u32) -> Result<(SlopeFit, SlopeFit)> {
    let f0 = fit_decay(&shell_spectrum(u0, per_octave), window.0, window.1)?;
    let fw = fit_decay(&shell_spectrum(w, per_octave), window.0, window.1)?;
    Ok((f0, fw))
}

pub fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

fn persistence(traj: &Trajectory, s: f64) -> Result<f64> {
    let grid = traj.initial().profile.grid;
    let r = s / 2.0;
    let base = weighted_norm(&grid, &traj.initial().profile.to_physical(), r)?;
    let mut worst: f64 = 1.0;
    for st in &traj.states {
        let v = weighted_norm(&grid, &st.solution().to_physical(), r)?;
        if base > 0.0 {
            worst = worst.max(v / base);
        }
    }
    Ok(worst)
}

struct SeedRun {
    outcome: SeedOutcome,
    ladder: Vec<LadderRow>,
    times: Vec<f64>,
}

fn run_seed(cfg: &SmoothingConfig, seed: u64, eps_grid: &[f64]) -> SeedRun {
    let mut outcome = SeedOutcome {
        seed,
        u0_fit: None,
        w_fit: None,
        eps_hat: None,
        window_check: None,
        persistence: None,
        flags: Vec::new(),
        failure: None,
    };
    let mut ladder = Vec::new();
    let mut times = Vec::new();
    let u0 = match cfg.initial_data(seed, &cfg.grid) {
        Ok(u) => u,
        Err(e) => {
            outcome.failure = Some(e.to_string());
            return SeedRun { outcome, ladder, times };
        }
    };
    let traj = match evolve(&u0, &cfg.equation, &cfg.stepper) {
        Ok(t) => t,
        Err(e) => {
            outcome.failure = Some(e.to_string());
            return SeedRun { outcome, ladder, times };
        }
    };
    times = traj.times();
    for &t in &times {
        let w = duhamel_term(&traj, t).expect("sampled time");
        for &eps in eps_grid {
            ladder.push(LadderRow {
                seed,
                eps,
                time: t,
                norm: sobolev_norm(&w, cfg.s + eps),
            });
        }
    }
    if cfg.equation.kind == EquationKind::Kdv || cfg.weighted {
        outcome.persistence = persistence(&traj, cfg.s).ok();
    }
    let w = duhamel_term(&traj, cfg.stepper.t_end).expect("final time is sampled");
    if w.max_abs() == 0.0 {
        outcome.flags.push(NO_DUHAMEL.into());
        return SeedRun { outcome, ladder, times };
    }
    let q = cfg.shells_per_octave;
    let window = cfg.fit_window();
    match gain_between(&u0, &w, window, q) {
        Ok((f0, fw)) => {
            if f0.r2 < R2_FLAG {
                outcome.flags.push(format!("u0 fit r2 = {:.3} below {R2_FLAG}", f0.r2));
            }
            outcome.eps_hat = Some(f0.slope - fw.slope);
            outcome.u0_fit = Some(f0);
            outcome.w_fit = Some(fw);
        }
        Err(e) => outcome.failure = Some(e.to_string()),
    }
    let cut = cfg.grid.xi_cut();
    let narrow = gain_between(&u0, &w, (8.0, cut / 4.0), q)
        .and_then(|(a, b)| Ok((a.slope - b.slope, gain_between(&u0, &w, (16.0, cut / 2.0), q)?)))
        .map(|(g1, (a, b))| (g1, a.slope - b.slope));
    outcome.window_check = narrow.ok();
    SeedRun { outcome, ladder, times }
}

pub fn estimate_gain(cfg: &SmoothingConfig) -> Result<SmoothingReport> {
    let eps_th = cfg.validate()?;
    let eps_grid = cfg.eps_grid(eps_th);
    let runs: Vec<SeedRun> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_seed(cfg, seed, &eps_grid))
        .collect();
    let mut notes = Vec::new();
    let mut seeds = Vec::new();
    let mut ladder = Vec::new();
    let mut times = Vec::new();
    for run in runs {
        if times.is_empty() {
            times = run.times.clone();
        }
        if let Some(f) = &run.outcome.failure {
            notes.push(format!("seed {} excluded: {f}", run.outcome.seed));
        }
        seeds.push(run.outcome);
        ladder.extend(run.ladder);
    }
    if seeds.iter().any(|s| s.flags.iter().any(|f| f == NO_DUHAMEL)) {
        notes.push(format!("{NO_DUHAMEL}: gain undefined"));
    }
    let gains: Vec<f64> = seeds.iter().filter_map(|s| s.eps_hat).collect();
    let (mean, std) = mean_std(&gains);
    let data_model = if cfg.weighted {
        "power-law Gaussian coefficients, localized by a centered bump"
    } else {
        "power-law Gaussian coefficients"
    };
    Ok(SmoothingReport {
        equation: cfg.equation.kind.name().into(),
        s: cfg.s,
        eps_th,
        eps_hat_mean: mean,
        eps_hat_std: std,
        seeds,
        eps_grid,
        times,
        ladder,
        window: cfg.fit_window(),
        config: cfg.clone(),
        data_model: data_model.into(),
        config_hash: String::new(),
        notes,
    })
}
