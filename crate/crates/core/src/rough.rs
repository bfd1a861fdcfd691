//! Power-law Gaussian initial data of sharp Sobolev regularity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{Dim, SpectralGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Real,
    #[default]
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    #[default]
    None,
    /// Smooth compactly supported bump of the given half-width around the box center.
    CenteredBump { width: f64 },
}

pub const DEFAULT_BUMP_WIDTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughDataSpec {
    pub s: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub symmetry: Symmetry,
    #[serde(default)]
    pub envelope: Envelope,
}

fn default_margin() -> f64 {
    0.01
}

fn default_amplitude() -> f64 {
    0.1
}

impl RoughDataSpec {
    pub fn new(s: f64, seed: u64, symmetry: Symmetry) -> Self {
        RoughDataSpec {
            s,
            margin: default_margin(),
            amplitude: default_amplitude(),
            seed,
            symmetry,
            envelope: Envelope::None,
        }
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }

    pub fn validate(&self, grid: &SpectralGrid) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {}", self.amplitude)));
        }
        if !(self.margin > 0.0) {
            return Err(Error::InvalidParameter(format!("margin must be positive, got {}", self.margin)));
        }
        if let Envelope::CenteredBump { width } = self.envelope {
            if !(width > 0.0 && width < grid.box_length / 4.0) {
                return Err(Error::InvalidParameter(format!(
                    "envelope width {width} must lie in (0, L/4)"
                )));
            }
        }
        Ok(())
    }

    /// Spectral decay exponent `s + d/2 + margin` of `|û₀|`.
    pub fn decay(&self, dim: Dim) -> f64 {
        self.s + dim.as_usize() as f64 / 2.0 + self.margin
    }
}

/// Stream key of a lattice mode; independent of the grid size so that finer
/// grids extend coarser draws.
fn mode_key(jx: i64, jy: i64) -> u64 {
    ((jx as i32 as u32 as u64) << 32) | (jy as i32 as u32 as u64)
}

fn gaussian(seed: u64, jx: i64, jy: i64, real_axis: bool) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mode_key(jx, jy));
    let a: f64 = rng.sample(StandardNormal);
    if real_axis {
        return Complex64::new(a, 0.0);
    }
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// `û₀(ξ) = A ⟨ξ⟩^{−s−d/2−δ} g_ξ`, zero above the dealias cutoff.
pub fn generate(spec: &RoughDataSpec, grid: &SpectralGrid) -> Result<FourierField> {
    spec.validate(grid)?;
    let real = spec.symmetry == Symmetry::Real;
    let p = spec.decay(grid.dim);
    let mut f = FourierField::zeros(*grid, real);
    if spec.amplitude == 0.0 {
        return Ok(f);
    }
    for slot in 0..grid.len() {
        let xi = grid.freq(slot);
        if !grid.retained(xi) {
            continue;
        }
        let (jx, jy) = grid.indices(slot);
        let g = if real {
            let canonical = jx > 0 || (jx == 0 && jy > 0);
            if jx == 0 && jy == 0 {
                gaussian(spec.seed, 0, 0, true)
            } else if canonical {
                gaussian(spec.seed, jx, jy, false)
            } else {
                gaussian(spec.seed, -jx, -jy, false).conj()
            }
        } else {
            gaussian(spec.seed, jx, jy, false)
        };
        f.coeffs[slot] = g * (spec.amplitude * xi.bracket().powf(-p));
    }
    if let Envelope::CenteredBump { width } = spec.envelope {
        f = apply_envelope(&f, width);
    }
    Ok(f)
}

/// Smooth bump `exp(1 − 1/(1 − (x/w)²))` on `|x| < w` about the box center.
pub fn bump(x: f64, width: f64) -> f64 {
    let t = x / width;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

fn apply_envelope(f: &FourierField, width: f64) -> FourierField {
    let g = f.grid;
    let c = g.box_length / 2.0;
    let phys = f.to_physical();
    let vals: Vec<Complex64> = g
        .positions()
        .iter()
        .zip(phys)
        .map(|(p, v)| {
            let env = match g.dim {
                Dim::One => bump(p.x - c, width),
                Dim::Two => bump((p.x - c).hypot(p.y - c), width),
            };
            v * env
        })
        .collect();
    let mut out = FourierField::from_physical(g, &vals).expect("same grid");
    out.real_symmetric = f.real_symmetric;
    if out.real_symmetric {
        out.enforce_symmetry();
    }
    out.dealias();
    out
}

/// Data for the weighted space `H^s ∩ L²(⟨x⟩^{2r})`: the sharp power law
/// localized by a centered bump (default half-width [`DEFAULT_BUMP_WIDTH`]).
/// `r = 0` leaves the weight off and returns [`generate`].
pub fn generate_weighted(spec: &RoughDataSpec, grid: &SpectralGrid, r: f64) -> Result<FourierField> {
    if grid.dim != Dim::One {
        return Err(Error::InvalidParameter("weighted data is one-dimensional".into()));
    }
    if r < 0.0 {
        return Err(Error::InvalidParameter(format!("weight exponent must be >= 0, got {r}")));
    }
    if r == 0.0 {
        return generate(spec, grid);
    }
    let mut local = *spec;
    if local.envelope == Envelope::None {
        local.envelope = Envelope::CenteredBump {
            width: DEFAULT_BUMP_WIDTH.min(grid.box_length / 4.5),
        };
    }
    generate(&local, grid)
}
