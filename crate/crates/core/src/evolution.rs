//! Integrating-factor RK4 in the profile variable `ũ = e^{itL}û`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equation::{EquationKind, EquationSpec};
use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::io::{self, SpectrumFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Largest tolerated growth factor of the monitored norms over one step.
    pub cfl_guard: f64,
    /// Number of sampling intervals; the trajectory holds `samples + 1` states.
    pub samples: usize,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        StepperConfig {
            dt,
            t_end,
            scheme: Scheme::IfRk4,
            cfl_guard: 1.5,
            samples: 16,
        }
    }

    pub fn defaults_for(kind: EquationKind) -> Self {
        match kind {
            EquationKind::Mzk => Self::new(2e-4, 0.25),
            _ => Self::new(1e-3, 1.0),
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl_guard > 1.0) {
            return Err(Error::InvalidParameter(format!("cfl_guard must exceed 1, got {}", self.cfl_guard)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be at least 1".into()));
        }
        let n = self.steps();
        if n == 0 || (n as f64 * self.dt - self.t_end).abs() > self.dt {
            return Err(Error::InvalidParameter(format!(
                "dt = {} does not divide t_end = {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub profile: FourierField,
    pub time: f64,
    pub equation: EquationSpec,
}

impl ProfileState {
    /// `û(t) = e^{−itL}ũ(t)`.
    pub fn solution(&self) -> FourierField {
        apply_group(&self.profile, self.time, &self.equation)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub equation: EquationSpec,
    pub stepper: StepperConfig,
    pub states: Vec<ProfileState>,
    /// Largest per-step growth factor of the monitored norms.
    pub max_step_growth: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &ProfileState {
        &self.states[0]
    }

    pub fn last(&self) -> &ProfileState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    pub fn at(&self, t: f64) -> Result<&ProfileState> {
        let tol = 1e-9 * self.stepper.t_end.max(1.0);
        self.states
            .iter()
            .find(|s| (s.time - t).abs() <= tol)
            .ok_or(Error::TimeNotSampled(t))
    }
}

/// `e^{−itL(ξ)}` applied coefficient-wise.
pub fn apply_group(f: &FourierField, t: f64, eq: &EquationSpec) -> FourierField {
    if t == 0.0 {
        return f.clone();
    }
    let mut out = f.apply_symbol(|xi| Complex64::from_polar(1.0, -t * eq.dispersion(xi)));
    out.real_symmetric = f.real_symmetric;
    out
}

/// `dũ/dt = e^{itL}·N̂(e^{−itL}ũ)`.
pub fn profile_rhs(eq: &EquationSpec, profile: &FourierField, t: f64) -> Result<FourierField> {
    let u = apply_group(profile, t, eq);
    let n = eq.nonlinearity(&u)?;
    Ok(apply_group(&n, -t, eq))
}

/// Per-run tables: dispersion values, half-step phases and norm weights.
struct Propagator<'a> {
    eq: &'a EquationSpec,
    dispersion: Vec<f64>,
    half_step: Vec<Complex64>,
    h1_weight: Vec<f64>,
    measure: f64,
}

impl<'a> Propagator<'a> {
    fn new(eq: &'a EquationSpec, f: &FourierField, dt: f64) -> Self {
        let freqs = f.grid.freqs();
        let dispersion: Vec<f64> = freqs.iter().map(|&xi| eq.dispersion(xi)).collect();
        let half_step = dispersion
            .iter()
            .map(|l| Complex64::from_polar(1.0, -0.5 * dt * l))
            .collect();
        let h1_weight = freqs.iter().map(|xi| 1.0 + xi.x * xi.x + xi.y * xi.y).collect();
        Propagator {
            eq,
            dispersion,
            half_step,
            h1_weight,
            measure: f.grid.cell_measure(),
        }
    }

    fn group(&self, t: f64) -> Vec<Complex64> {
        self.dispersion
            .iter()
            .map(|l| Complex64::from_polar(1.0, -t * l))
            .collect()
    }

    fn advance(&self, e: &[Complex64]) -> Vec<Complex64> {
        e.iter().zip(&self.half_step).map(|(a, b)| a * b).collect()
    }

    /// Right-hand side with `e = e^{−itL}` supplied.
    fn rhs(&self, y: &FourierField, e: &[Complex64]) -> Result<FourierField> {
        let mut u = y.clone();
        u.coeffs.iter_mut().zip(e).for_each(|(c, p)| *c *= p);
        let mut n = self.eq.nonlinearity(&u)?;
        n.coeffs.iter_mut().zip(e).for_each(|(c, p)| *c *= p.conj());
        Ok(n)
    }

    fn step(&self, y: &FourierField, e0: &[Complex64], dt: f64) -> Result<FourierField> {
        let eh = self.advance(e0);
        let e1 = self.advance(&eh);
        let k1 = self.rhs(y, e0)?;
        let k2 = self.rhs(&axpy(y, 0.5 * dt, &k1), &eh)?;
        let k3 = self.rhs(&axpy(y, 0.5 * dt, &k2), &eh)?;
        let k4 = self.rhs(&axpy(y, dt, &k3), &e1)?;
        let mut out = y.clone();
        let w = dt / 6.0;
        for i in 0..out.coeffs.len() {
            out.coeffs[i] += (k1.coeffs[i] + (k2.coeffs[i] + k3.coeffs[i]) * 2.0 + k4.coeffs[i]) * w;
        }
        if out.real_symmetric {
            out.enforce_symmetry();
        }
        Ok(out)
    }

    fn monitored(&self, f: &FourierField) -> [f64; 2] {
        let (mut a, mut b) = (0.0, 0.0);
        for (c, w) in f.coeffs.iter().zip(&self.h1_weight) {
            let p = c.norm_sqr();
            a += p;
            b += p * w;
        }
        [(a * self.measure).sqrt(), (b * self.measure).sqrt()]
    }
}

fn axpy(y: &FourierField, a: f64, k: &FourierField) -> FourierField {
    let mut out = y.clone();
    out.coeffs
        .iter_mut()
        .zip(&k.coeffs)
        .for_each(|(o, ki)| *o += ki * a);
    out
}

/// Integrates from `u0` (the solution at `t = 0`, equal to its profile).
pub fn evolve(u0: &FourierField, eq: &EquationSpec, cfg: &StepperConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if u0.grid.dim != eq.dim() {
        return Err(Error::GridMismatch(format!(
            "{} needs a {}D grid",
            eq.kind,
            eq.dim().as_usize()
        )));
    }
    if eq.kind.is_real() && !u0.real_symmetric {
        return Err(Error::InvalidParameter(format!(
            "{} evolves real data; initial field is not real-symmetric",
            eq.kind
        )));
    }
    let steps = cfg.steps();
    let dt = cfg.t_end / steps as f64;
    let marks: Vec<usize> = (0..=cfg.samples)
        .map(|k| ((k * steps) as f64 / cfg.samples as f64).round() as usize)
        .collect();
    let mut states = vec![ProfileState {
        profile: u0.clone(),
        time: 0.0,
        equation: *eq,
    }];
    let prop = Propagator::new(eq, u0, dt);
    let mut y = u0.clone();
    let mut norms = prop.monitored(&y);
    let mut max_growth: f64 = 1.0;
    let linear = eq.coupling == 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let t_next = (n + 1) as f64 * dt;
        if !linear {
            y = prop.step(&y, &prop.group(t), dt)?;
            if !y.is_finite() {
                return Err(Error::NonFinite { time: t_next });
            }
            let next = prop.monitored(&y);
            for (a, b) in norms.iter().zip(&next) {
                if *a > 0.0 {
                    let growth = b / a;
                    max_growth = max_growth.max(growth);
                    if growth > cfg.cfl_guard {
                        return Err(Error::BlowUp { time: t_next });
                    }
                }
            }
            norms = next;
        }
        if marks.contains(&(n + 1)) && states.last().map(|s| s.time) != Some(t_next) {
            states.push(ProfileState {
                profile: y.clone(),
                time: if n + 1 == steps { cfg.t_end } else { t_next },
                equation: *eq,
            });
        }
    }
    Ok(Trajectory {
        equation: *eq,
        stepper: *cfg,
        states,
        max_step_growth: max_growth,
    })
}

/// `ŵ(t) = e^{−itL}(ũ(t) − ũ(0))`.
pub fn duhamel_term(traj: &Trajectory, t: f64) -> Result<FourierField> {
    let state = traj.at(t)?;
    let diff = state.profile.sub(&traj.initial().profile)?;
    Ok(apply_group(&diff, state.time, &traj.equation))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub equation: EquationSpec,
    pub t: f64,
    pub config_hash: String,
    pub spectrum: String,
}

/// Writes the solution spectrum at a sampled state plus a JSON sidecar.
pub fn write_checkpoint(
    state: &ProfileState,
    stem: &Path,
    config_hash: &str,
    format: SpectrumFormat,
) -> Result<PathBuf> {
    let data = io::save(&state.solution(), stem, format)?;
    let meta = CheckpointMeta {
        equation: state.equation,
        t: state.time,
        config_hash: config_hash.to_string(),
        spectrum: data
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let sidecar = stem.with_extension("meta.json");
    fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)?;
    Ok(sidecar)
}
