//! The phase-smoothed operator `T_σ` and the phase-band operator `T^{α,M}` of an
//! equation, with norm estimates and exponent sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nlsmooth_core::analyzer::linear_fit;
use nlsmooth_core::grid::japanese;
use nlsmooth_core::norms::AdaptedExponents;
use nlsmooth_core::{EquationKind, EquationSpec, Error, Interaction, Result};

use crate::estimate::{estimate_norm, EstimateOptions, InputNorm, NormEstimate};
use crate::kernel::{CellAveraged, Kernel, PhaseKernel, Restriction};
use crate::lattice::{Lattice, LatticeField};
use crate::tuples::{apply_kernel, Streamed, Tabulated};

pub const MIN_PROBE_POINTS: usize = 32;
pub const MIN_SWEEP_VALUES: usize = 5;
/// Norm growth under lattice doubling that marks a cell unbounded.
pub const GROWTH_THRESHOLD: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Kernel `m(Ξ)/⟨Φ(Ξ)⟩^σ`, measured `H^s → H^{s+ε}`.
    Smoothed,
    /// Kernel `m(Ξ)·1_{|Φ(Ξ)−α|<M}`, measured `H^s → H^s`.
    Band,
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sigma" | "smoothed" | "tsigma" => Ok(OperatorKind::Smoothed),
            "alpham" | "alpha_m" | "band" => Ok(OperatorKind::Band),
            other => Err(Error::InvalidParameter(format!("unknown operator kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundProbe {
    pub equation: EquationSpec,
    /// Index into the equation's nonlinear terms.
    pub term: usize,
    pub s: f64,
    pub eps: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub half_width: f64,
    pub lattice: Lattice,
    pub trials: usize,
    pub iterations: usize,
    pub seed: u64,
    pub input_norm: InputNorm,
    /// Exclude the exactly resonant tuples `Φ = 0`.
    pub drop_resonant: bool,
    /// Midpoint offsets per axis for cell-averaged kernels; `1` samples lattice points.
    pub cell_points: usize,
}

impl BoundProbe {
    /// Default lattice for the equation: 128 points on `[−64, 64)` in 1D, 32² points
    /// on `[−16, 16)²` in 2D, 24 points on `[−12, 12)` for quintic terms.
    pub fn new(equation: EquationSpec, term: usize) -> Result<Self> {
        let interaction = *equation
            .interactions()
            .get(term)
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no term {term}", equation.kind.name())))?;
        let lattice = match (equation.dim().as_usize(), interaction.degree()) {
            (2, _) => Lattice::plane(32, 16.0)?,
            (_, 5) => Lattice::line(24, 12.0)?,
            _ => Lattice::line(128, 64.0)?,
        };
        let mut probe = BoundProbe {
            equation,
            term,
            s: 0.0,
            eps: 0.0,
            sigma: 0.9,
            alpha: 0.0,
            half_width: 4.0,
            lattice,
            trials: 4,
            iterations: 12,
            seed: 0,
            input_norm: InputNorm::Sobolev,
            drop_resonant: true,
            cell_points: 1,
        };
        probe.set_s(0.0);
        Ok(probe)
    }

    /// Sets the data regularity; KdV switches to the adapted input norm.
    pub fn set_s(&mut self, s: f64) {
        self.s = s;
        if self.equation.kind == EquationKind::Kdv {
            self.input_norm = InputNorm::Adapted {
                lambda: AdaptedExponents::defaults(s).lambda,
            };
        }
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.set_s(s);
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_band(mut self, alpha: f64, half_width: f64) -> Self {
        self.alpha = alpha;
        self.half_width = half_width;
        self
    }

    pub fn with_resonances(mut self, keep: bool) -> Self {
        self.drop_resonant = !keep;
        self
    }

    pub fn with_cell_points(mut self, q: usize) -> Self {
        self.cell_points = q.max(1);
        self
    }

    pub fn with_lattice(mut self, lattice: Lattice) -> Self {
        self.lattice = lattice;
        self
    }

    pub fn interaction(&self) -> Interaction {
        self.equation.interactions()[self.term]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(Error::InvalidParameter(format!("sigma must lie in (0, 1), got {}", self.sigma)));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("band half-width must be positive, got {}", self.half_width)));
        }
        if self.lattice.points < MIN_PROBE_POINTS {
            return Err(Error::InvalidParameter(format!(
                "probe lattice needs at least {MIN_PROBE_POINTS} points per axis, got {}",
                self.lattice.points
            )));
        }
        if self.lattice.dim != self.equation.dim() {
            return Err(Error::InvalidParameter("lattice dimension differs from the equation's".into()));
        }
        if self.term >= self.equation.interactions().len() {
            return Err(Error::InvalidParameter(format!("no term {}", self.term)));
        }
        Ok(())
    }

    pub fn kernel(&self, which: OperatorKind) -> PhaseKernel {
        let restriction = match which {
            OperatorKind::Smoothed => Restriction::Smoothed { sigma: self.sigma },
            OperatorKind::Band => Restriction::Band {
                alpha: self.alpha,
                half_width: self.half_width,
            },
        };
        let k = PhaseKernel::new(self.equation, self.interaction(), restriction);
        if self.drop_resonant {
            k.without_resonances()
        } else {
            k
        }
    }

    /// The kernel as sampled on the lattice (cell-averaged when `cell_points > 1`).
    pub fn lattice_kernel(&self, which: OperatorKind) -> CellAveraged<PhaseKernel> {
        CellAveraged::new(
            self.kernel(which),
            self.cell_points,
            self.lattice.spacing(),
            self.lattice.dim.as_usize(),
        )
    }

    /// Output regularity the operator is measured in.
    pub fn target_regularity(&self, which: OperatorKind) -> f64 {
        match which {
            OperatorKind::Smoothed => self.s + self.eps,
            OperatorKind::Band => self.s,
        }
    }

    pub fn apply_t_sigma(&self, inputs: &[&LatticeField]) -> Result<LatticeField> {
        apply_kernel(self.lattice, &self.lattice_kernel(OperatorKind::Smoothed), inputs)
    }

    pub fn apply_t_alpha_m(&self, inputs: &[&LatticeField]) -> Result<LatticeField> {
        apply_kernel(self.lattice, &self.lattice_kernel(OperatorKind::Band), inputs)
    }

    pub fn options(&self) -> EstimateOptions {
        EstimateOptions {
            trials: self.trials,
            iterations: self.iterations,
            seed: self.seed,
        }
    }

    pub fn estimate_norm(&self, which: OperatorKind) -> Result<NormEstimate> {
        self.validate()?;
        let kernel = self.lattice_kernel(which);
        let s_out = self.target_regularity(which);
        let opts = self.options();
        if Tabulated::fits(&self.lattice, kernel.degree()) {
            let table = Tabulated::build(self.lattice, &kernel)?;
            estimate_norm(&table, self.s, s_out, self.input_norm, &opts)
        } else {
            estimate_norm(&Streamed::new(self.lattice, &kernel), self.s, s_out, self.input_norm, &opts)
        }
    }

    pub fn source(&self, which: OperatorKind) -> Result<Tabulated> {
        Tabulated::build(self.lattice, &self.lattice_kernel(which))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub stderr: f64,
    pub r2: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub alpha: f64,
    pub half_width: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSweep {
    pub probe: BoundProbe,
    /// Rows at `α = 0` with `M` varying.
    pub width_rows: Vec<BandRow>,
    /// Rows at the template `M` with `α` varying.
    pub alpha_rows: Vec<BandRow>,
    /// Slope of `log lower` against `log⟨M⟩`.
    pub width_fit: Option<ExponentFit>,
    /// Slope of `log lower` against `log⟨α⟩`.
    pub alpha_fit: Option<ExponentFit>,
    pub flags: Vec<String>,
}

/// Least-squares exponent of `y ∝ ⟨x⟩^p`, or a flag when the fit degenerates.
pub fn bracket_exponent(x: &[f64], y: &[f64]) -> std::result::Result<ExponentFit, String> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b > 0.0 && b.is_finite())
        .map(|(&a, &b)| (japanese(a).ln(), b.ln()))
        .collect();
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().cloned().unzip();
    match linear_fit(&lx, &ly) {
        Ok((slope, _, stderr, r2)) if pts.len() >= 3 => Ok(ExponentFit {
            exponent: slope,
            stderr,
            r2,
            points: pts.len(),
        }),
        Ok(_) => Err(format!("only {} usable points", pts.len())),
        Err(e) => Err(e.to_string()),
    }
}

fn band_rows(template: &BoundProbe, pairs: &[(f64, f64)]) -> Result<Vec<BandRow>> {
    pairs
        .par_iter()
        .map(|&(alpha, m)| {
            let e = template.with_band(alpha, m).estimate_norm(OperatorKind::Band)?;
            Ok(BandRow {
                alpha,
                half_width: m,
                lower: e.lower,
                upper: e.upper,
            })
        })
        .collect()
}

/// Norm of `T^{α,M}` against `M` (at `α = 0`) and against `α` (at the template's `M`).
pub fn sweep_m_scaling(template: &BoundProbe, widths: &[f64], alphas: &[f64]) -> Result<ScalingSweep> {
    template.validate()?;
    for (name, list) in [("M", widths), ("alpha", alphas)] {
        if !list.is_empty() && list.len() < MIN_SWEEP_VALUES {
            return Err(Error::InvalidParameter(format!(
                "{name} sweep needs at least {MIN_SWEEP_VALUES} values, got {}",
                list.len()
            )));
        }
    }
    let width_pairs: Vec<(f64, f64)> = widths.iter().map(|&m| (0.0, m)).collect();
    let alpha_pairs: Vec<(f64, f64)> = alphas.iter().map(|&a| (a, template.half_width)).collect();
    let width_rows = band_rows(template, &width_pairs)?;
    let alpha_rows = band_rows(template, &alpha_pairs)?;
    let mut flags = Vec::new();
    let mut fit = |rows: &[BandRow], x: fn(&BandRow) -> f64, name: &str| {
        if rows.is_empty() {
            return None;
        }
        let xs: Vec<f64> = rows.iter().map(x).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.lower).collect();
        match bracket_exponent(&xs, &ys) {
            Ok(f) => Some(f),
            Err(e) => {
                flags.push(format!("degenerate {name} fit: {e}"));
                None
            }
        }
    };
    let width_fit = fit(&width_rows, |r| r.half_width, "M");
    let alpha_fit = fit(&alpha_rows, |r| r.alpha, "alpha");
    for r in width_rows.iter().chain(&alpha_rows) {
        if r.lower > r.upper * (1.0 + 1e-9) {
            flags.push(format!("lower exceeds upper at alpha={} M={}", r.alpha, r.half_width));
        }
    }
    Ok(ScalingSweep {
        probe: *template,
        width_rows,
        alpha_rows,
        width_fit,
        alpha_fit,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityCell {
    pub s: f64,
    pub eps: f64,
    pub sigma: f64,
    /// Theoretical gain at `s`, when `s` is in range.
    pub eps_th: Option<f64>,
    pub norm: f64,
    pub norm_doubled: f64,
    pub growth: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityTable {
    pub probe: BoundProbe,
    pub doubled_lattice: Lattice,
    pub growth_threshold: f64,
    pub cells: Vec<FeasibilityCell>,
}

impl FeasibilityTable {
    /// Whether `(s, ε)` is bounded for some `σ` of the sweep.
    pub fn bounded(&self, s: f64, eps: f64) -> Option<bool> {
        let mut hit = self
            .cells
            .iter()
            .filter(|c| (c.s - s).abs() < 1e-12 && (c.eps - eps).abs() < 1e-12)
            .peekable();
        hit.peek()?;
        Some(hit.any(|c| c.bounded))
    }
}

/// Norm of `T_σ` from `H^s` to `H^{s+ε}` on the template lattice and on the lattice
/// with twice the extent at the same spacing; growth below the threshold marks the
/// cell bounded.
pub fn sweep_sigma_bound(template: &BoundProbe, s_grid: &[f64], eps_grid: &[f64], sigmas: &[f64]) -> Result<FeasibilityTable> {
    template.validate()?;
    let doubled = template.lattice.doubled();
    let mut combos = Vec::new();
    for &s in s_grid {
        for &eps in eps_grid {
            for &sigma in sigmas {
                combos.push((s, eps, sigma));
            }
        }
    }
    let mut cells = Vec::with_capacity(combos.len());
    for (s, eps, sigma) in combos {
        let p = template.with_s(s).with_eps(eps).with_sigma(sigma);
        p.validate()?;
        let norm = p.estimate_norm(OperatorKind::Smoothed)?.lower;
        let norm_doubled = p.with_lattice(doubled).estimate_norm(OperatorKind::Smoothed)?.lower;
        let growth = if norm > 0.0 { norm_doubled / norm } else { 1.0 };
        cells.push(FeasibilityCell {
            s,
            eps,
            sigma,
            eps_th: p.equation.smoothing_law(s).ok(),
            norm,
            norm_doubled,
            growth,
            bounded: growth < GROWTH_THRESHOLD,
        });
    }
    Ok(FeasibilityTable {
        probe: *template,
        doubled_lattice: doubled,
        growth_threshold: GROWTH_THRESHOLD,
        cells,
    })
}
