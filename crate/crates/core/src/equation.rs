//! The five model equations `u_t + iL(D)u = N(u)` and their interaction data.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FourierField;
use crate::grid::{Dim, Freq};
use crate::product::{from_padded, padded_modes, to_padded};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquationKind {
    /// `u_t + u_xxx ± (u³)_x = 0`
    Mkdv,
    /// `u_t + u_xxx ± (u²)_x = 0`
    Kdv,
    /// `iu_t + u_xx ± |u|²u = 0`
    Nls,
    /// `u_t + u_xxx + u_yyy = ±(∂_x + ∂_y)(u³)`
    Mzk,
    /// Gauged derivative NLS: `iw_t + w_xx = ∓(i w² ∂_x w̄ + ½|w|⁴w)`
    Dnls,
}

pub const ALL_EQUATIONS: [EquationKind; 5] = [
    EquationKind::Mkdv,
    EquationKind::Kdv,
    EquationKind::Nls,
    EquationKind::Mzk,
    EquationKind::Dnls,
];

impl EquationKind {
    pub fn name(self) -> &'static str {
        match self {
            EquationKind::Mkdv => "mkdv",
            EquationKind::Kdv => "kdv",
            EquationKind::Nls => "nls",
            EquationKind::Mzk => "mzk",
            EquationKind::Dnls => "dnls",
        }
    }

    pub fn dim(self) -> Dim {
        match self {
            EquationKind::Mzk => Dim::Two,
            _ => Dim::One,
        }
    }

    /// Real-valued solutions (Hermitian coefficients).
    pub fn is_real(self) -> bool {
        matches!(self, EquationKind::Mkdv | EquationKind::Kdv | EquationKind::Mzk)
    }

    /// Lowest admissible regularity and whether it is itself admissible.
    pub fn s_min(self) -> (f64, bool) {
        match self {
            EquationKind::Mkdv => (0.25, false),
            EquationKind::Kdv => (0.0, true),
            EquationKind::Nls => (0.0, true),
            EquationKind::Mzk => (1.5, false),
            EquationKind::Dnls => (0.5, false),
        }
    }

    pub fn interactions(self) -> &'static [Interaction] {
        match self {
            EquationKind::Mkdv => &[Interaction::MKDV],
            EquationKind::Kdv => &[Interaction::KDV],
            EquationKind::Nls => &[Interaction::NLS],
            EquationKind::Mzk => &[Interaction::MZK],
            EquationKind::Dnls => &[Interaction::DNLS_CUBIC, Interaction::DNLS_QUINTIC],
        }
    }
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EquationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_', '*'], "").as_str() {
            "mkdv" => Ok(EquationKind::Mkdv),
            "kdv" => Ok(EquationKind::Kdv),
            "nls" => Ok(EquationKind::Nls),
            "mzk" => Ok(EquationKind::Mzk),
            "dnls" | "dnlsgauged" => Ok(EquationKind::Dnls),
            other => Err(Error::InvalidParameter(format!("unknown equation '{other}'"))),
        }
    }
}

/// The `±` in front of the nonlinearity as printed in the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// One multilinear term of a nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interaction {
    pub label: &'static str,
    pub signature: &'static [i8],
}

impl Interaction {
    pub const MKDV: Interaction = Interaction { label: "cubic", signature: &[1, 1, 1] };
    pub const KDV: Interaction = Interaction { label: "quadratic", signature: &[1, 1] };
    pub const NLS: Interaction = Interaction { label: "cubic", signature: &[1, -1, 1] };
    pub const MZK: Interaction = Interaction { label: "cubic", signature: &[1, 1, 1] };
    pub const DNLS_CUBIC: Interaction = Interaction { label: "cubic", signature: &[1, -1, 1] };
    pub const DNLS_QUINTIC: Interaction = Interaction { label: "quintic", signature: &[1, -1, 1, -1, 1] };

    pub fn degree(&self) -> usize {
        self.signature.len()
    }
}

/// `Ξ = (ξ, ξ₁, …, ξ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTuple {
    pub output: Freq,
    pub inputs: Vec<Freq>,
}

impl FrequencyTuple {
    /// Builds the tuple with `ξ = Σ s_j ξ_j`.
    pub fn from_inputs(inputs: Vec<Freq>, signature: &[i8]) -> Self {
        let output = inputs
            .iter()
            .zip(signature)
            .fold(Freq::ZERO, |acc, (xi, &s)| acc + xi.signed(s));
        FrequencyTuple { output, inputs }
    }

    pub fn residual(&self, signature: &[i8]) -> f64 {
        let sum = self
            .inputs
            .iter()
            .zip(signature)
            .fold(Freq::ZERO, |acc, (xi, &s)| acc + xi.signed(s));
        (sum - self.output).max_abs()
    }

    fn check(&self, signature: &[i8]) -> Result<()> {
        if self.inputs.len() != signature.len() {
            return Err(Error::SizeMismatch {
                expected: signature.len(),
                got: self.inputs.len(),
            });
        }
        let scale = self
            .inputs
            .iter()
            .map(|x| x.max_abs())
            .fold(self.output.max_abs(), f64::max)
            .max(1.0);
        let r = self.residual(signature);
        if r > 1e-12 * scale {
            return Err(Error::ConstraintViolated(r));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub kind: EquationKind,
    #[serde(default)]
    pub sign: Sign,
    /// Overall nonlinear strength; `0` gives the linear flow.
    #[serde(default = "one")]
    pub coupling: f64,
    /// Remove the exactly resonant self-interaction that acts as a global
    /// phase rotation or Galilean drift on a periodic box.
    #[serde(default)]
    pub renormalize: bool,
}

fn one() -> f64 {
    1.0
}

impl EquationSpec {
    pub fn new(kind: EquationKind) -> Self {
        EquationSpec {
            kind,
            sign: Sign::Plus,
            coupling: 1.0,
            renormalize: false,
        }
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn renormalized(mut self, on: bool) -> Self {
        self.renormalize = on;
        self
    }

    pub fn linear(kind: EquationKind) -> Self {
        Self::new(kind).with_coupling(0.0)
    }

    pub fn dim(&self) -> Dim {
        self.kind.dim()
    }

    pub fn interactions(&self) -> &'static [Interaction] {
        self.kind.interactions()
    }

    /// Highest nonlinearity degree.
    pub fn degree(&self) -> usize {
        self.interactions().iter().map(|t| t.degree()).max().unwrap_or(1)
    }

    fn strength(&self) -> f64 {
        self.sign.factor() * self.coupling
    }

    /// `L(ξ)`; the linear group is `e^{−itL(ξ)}`.
    pub fn dispersion(&self, xi: Freq) -> f64 {
        match self.kind {
            EquationKind::Mkdv | EquationKind::Kdv => -xi.x.powi(3),
            EquationKind::Nls | EquationKind::Dnls => xi.x * xi.x,
            EquationKind::Mzk => -(xi.x.powi(3) + xi.y.powi(3)),
        }
    }

    /// `Σ s_j L(ξ_j) − L(ξ)`, the combination the closed forms factor.
    pub fn phase_defining(&self, term: &Interaction, tuple: &FrequencyTuple) -> f64 {
        let inputs: f64 = tuple
            .inputs
            .iter()
            .zip(term.signature)
            .map(|(&xi, &s)| s as f64 * self.dispersion(xi))
            .sum();
        inputs - self.dispersion(tuple.output)
    }

    /// Oscillation frequency of the term in the profile equation:
    /// `ũ_t` picks up `e^{it(L(ξ) − Σ s_j L(ξ_j))}`.
    pub fn profile_phase(&self, term: &Interaction, tuple: &FrequencyTuple) -> f64 {
        -self.phase_defining(term, tuple)
    }

    /// Factored resonance function.
    pub fn phase(&self, term: &Interaction, tuple: &FrequencyTuple) -> Result<f64> {
        tuple.check(term.signature)?;
        Ok(self.phase_unchecked(term, tuple))
    }

    pub fn phase_unchecked(&self, term: &Interaction, tuple: &FrequencyTuple) -> f64 {
        self.phase_of(term, tuple.output, &tuple.inputs)
    }

    /// Closed-form phase on `(ξ, ξ₁, …, ξ_k)` given as a slice; the constraint is assumed.
    pub fn phase_of(&self, term: &Interaction, xi: Freq, v: &[Freq]) -> f64 {
        match (self.kind, term.degree()) {
            (EquationKind::Mkdv, _) => 3.0 * (xi.x - v[0].x) * (xi.x - v[1].x) * (xi.x - v[2].x),
            (EquationKind::Kdv, _) => 3.0 * xi.x * v[0].x * v[1].x,
            (EquationKind::Nls, _) => (xi.x - v[0].x) * (xi.x - v[2].x),
            (EquationKind::Mzk, _) => {
                (xi.x - v[0].x) * (xi.x - v[1].x) * (xi.x - v[2].x)
                    + (xi.y - v[0].y) * (xi.y - v[1].y) * (xi.y - v[2].y)
            }
            (EquationKind::Dnls, 3) => {
                xi.x * xi.x - v[0].x * v[0].x + v[1].x * v[1].x - v[2].x * v[2].x
            }
            (EquationKind::Dnls, _) => {
                xi.x * xi.x - v[0].x * v[0].x + v[1].x * v[1].x - v[2].x * v[2].x + v[3].x * v[3].x
                    - v[4].x * v[4].x
            }
        }
    }

    /// `c` with `phase = c · phase_defining` on the constraint set.
    pub fn phase_constant(&self, term: &Interaction) -> f64 {
        match (self.kind, term.degree()) {
            (EquationKind::Mkdv, _) | (EquationKind::Kdv, _) => 1.0,
            (EquationKind::Nls, _) => -0.5,
            (EquationKind::Mzk, _) => 1.0 / 3.0,
            (EquationKind::Dnls, _) => -1.0,
        }
    }

    /// Fourier multiplier `m(Ξ)`: `N̂(ξ) = Σ_{ξ = Σ s_j ξ_j} m(Ξ) Π û_j^{(s_j)}`.
    pub fn multiplier(&self, term: &Interaction, tuple: &FrequencyTuple) -> Complex64 {
        self.multiplier_of(term, tuple.output, &tuple.inputs)
    }

    pub fn multiplier_of(&self, term: &Interaction, xi: Freq, v: &[Freq]) -> Complex64 {
        let c = self.strength();
        match (self.kind, term.degree()) {
            (EquationKind::Mkdv, _) | (EquationKind::Kdv, _) => Complex64::new(0.0, -c * xi.x),
            (EquationKind::Nls, _) => Complex64::new(0.0, c),
            (EquationKind::Mzk, _) => Complex64::new(0.0, c * (xi.x + xi.y)),
            (EquationKind::Dnls, 3) => Complex64::new(0.0, c * v[1].x),
            (EquationKind::Dnls, _) => Complex64::new(0.0, 0.5 * c),
        }
    }

    /// Threshold exponent `ε_th(s)` of the smoothing gain.
    pub fn smoothing_law(&self, s: f64) -> Result<f64> {
        smoothing_law(self.kind, s)
    }

    fn check_field(&self, u: &FourierField) -> Result<()> {
        if u.grid.dim != self.dim() {
            return Err(Error::GridMismatch(format!(
                "{} needs a {}D grid",
                self.kind,
                self.dim().as_usize()
            )));
        }
        Ok(())
    }

    /// Dealiased `N̂(u)`.
    pub fn nonlinearity(&self, u: &FourierField) -> Result<FourierField> {
        self.check_field(u)?;
        let g = u.grid;
        let c = self.strength();
        let real = self.kind.is_real() && u.real_symmetric;
        if c == 0.0 {
            return Ok(FourierField::zeros(g, real));
        }
        let mass: f64 = u.coeffs.iter().map(|z| z.norm_sqr()).sum();
        let renorm = if self.renormalize { 1.0 } else { 0.0 };
        let out = match self.kind {
            EquationKind::Kdv => {
                let m = padded_modes(g.modes, 2);
                let p = to_padded(u, m);
                let mean = u.coeffs[0] * renorm;
                let vals = p.iter().map(|v| v * v - 2.0 * mean * v).collect();
                from_padded(g, vals, m, real).derivative(0).scaled(Complex64::new(-c, 0.0))
            }
            EquationKind::Mkdv | EquationKind::Mzk => {
                let m = padded_modes(g.modes, 3);
                let p = to_padded(u, m);
                let shift = 3.0 * mass * renorm;
                let vals = p.iter().map(|v| v * v * v - shift * v).collect();
                let cube = from_padded(g, vals, m, real);
                if self.kind == EquationKind::Mkdv {
                    cube.derivative(0).scaled(Complex64::new(-c, 0.0))
                } else {
                    let mut d = cube.derivative(0).add(&cube.derivative(1))?;
                    d.real_symmetric = real;
                    d.scaled(Complex64::new(c, 0.0))
                }
            }
            EquationKind::Nls => {
                let m = padded_modes(g.modes, 3);
                let p = to_padded(u, m);
                let shift = 2.0 * mass * renorm;
                let vals = p.iter().map(|v| v * (v.norm_sqr() - shift)).collect();
                from_padded(g, vals, m, false).scaled(Complex64::new(0.0, c))
            }
            EquationKind::Dnls => {
                let m = padded_modes(g.modes, 5);
                let ux = u.derivative(0);
                let p = to_padded(u, m);
                let px = to_padded(&ux, m);
                let momentum: f64 = (0..u.len())
                    .map(|i| {
                        let d = ux.coeffs[i];
                        (d * u.coeffs[i].conj()).im
                    })
                    .sum();
                let rot = Complex64::new(0.0, 2.0 * momentum * renorm);
                let quint_shift = 6.0 * mass * mass * renorm;
                let half_i = Complex64::new(0.0, 0.5);
                let vals = p
                    .iter()
                    .zip(&px)
                    .map(|(w, wx)| {
                        let a = w.norm_sqr();
                        -(w * w) * wx.conj() - rot * w + half_i * w * (a * a - quint_shift)
                    })
                    .collect();
                from_padded(g, vals, m, false).scaled(Complex64::new(c, 0.0))
            }
        };
        let mut out = out;
        out.real_symmetric = real;
        if real {
            out.enforce_symmetry();
        }
        Ok(out)
    }
}

pub fn smoothing_law(kind: EquationKind, s: f64) -> Result<f64> {
    let (s_min, inclusive) = kind.s_min();
    if s < s_min || (!inclusive && s == s_min) || !s.is_finite() {
        return Err(Error::BelowValidityRange { s, s_min });
    }
    Ok(match kind {
        EquationKind::Mkdv => ((4.0 * s - 1.0) / 2.0).min(1.0),
        EquationKind::Kdv => s.min(1.0),
        EquationKind::Nls => (2.0 * s).min(1.0),
        EquationKind::Mzk => (2.0 * s - 3.0).min(1.0),
        EquationKind::Dnls => (2.0 * s - 1.0).min(0.5),
    })
}
