//! Periodic box discretization and the frequency lattice.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spatial dimension of a grid or equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn as_usize(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }
}

impl TryFrom<u8> for Dim {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        match value {
            1 => Ok(Dim::One),
            2 => Ok(Dim::Two),
            other => Err(format!("dimension must be 1 or 2, got {other}")),
        }
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.as_usize() as u8
    }
}

/// A point of frequency space. One-dimensional frequencies keep `y == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Freq {
    pub x: f64,
    pub y: f64,
}

impl Freq {
    pub const ZERO: Freq = Freq { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Freq { x, y }
    }

    pub fn line(x: f64) -> Self {
        Freq { x, y: 0.0 }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    /// Japanese bracket `(1 + |ξ|²)^{1/2}`.
    pub fn bracket(self) -> f64 {
        japanese(self.norm())
    }

    /// `s·ξ` for a conjugation sign `s = ±1`.
    pub fn signed(self, sign: i8) -> Self {
        if sign < 0 {
            -self
        } else {
            self
        }
    }
}

impl Add for Freq {
    type Output = Freq;
    fn add(self, o: Freq) -> Freq {
        Freq::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Freq {
    type Output = Freq;
    fn sub(self, o: Freq) -> Freq {
        Freq::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Freq {
    type Output = Freq;
    fn neg(self) -> Freq {
        Freq::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Freq {
    type Output = Freq;
    fn mul(self, a: f64) -> Freq {
        Freq::new(self.x * a, self.y * a)
    }
}

/// `⟨r⟩ = (1 + r²)^{1/2}`.
#[inline]
pub fn japanese(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Signed lattice index of storage slot `i` in FFT order for `n` modes.
#[inline]
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Storage slot of signed lattice index `j`, if it is representable.
#[inline]
pub fn slot_of(j: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if j >= -half && j < half {
        Some(if j >= 0 { j as usize } else { (j + n as i64) as usize })
    } else {
        None
    }
}

/// Uniform periodic grid on `[0, L)^d` with `n` modes per axis.
///
/// Coefficients are stored in FFT order; in 2D the slot of `(ix, iy)` is
/// `ix * n + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub dim: Dim,
    pub box_length: f64,
    pub modes: usize,
    pub dealias_fraction: f64,
}

pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

impl SpectralGrid {
    pub fn new(dim: Dim, box_length: f64, modes: usize, dealias_fraction: f64) -> Result<Self> {
        let grid = SpectralGrid {
            dim,
            box_length,
            modes,
            dealias_fraction,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn line(box_length: f64, modes: usize) -> Result<Self> {
        Self::new(Dim::One, box_length, modes, DEFAULT_DEALIAS)
    }

    pub fn plane(box_length: f64, modes: usize) -> Result<Self> {
        Self::new(Dim::Two, box_length, modes, DEFAULT_DEALIAS)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.box_length.is_finite() && self.box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {}",
                self.box_length
            )));
        }
        if self.modes < 2 || !self.modes.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "modes per axis must be a power of two >= 2, got {}",
                self.modes
            )));
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            )));
        }
        Ok(())
    }

    /// Same box and dealias rule with a different number of modes.
    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        Self::new(self.dim, self.box_length, modes, self.dealias_fraction)
    }

    /// Total number of lattice points (`n^d`).
    pub fn len(&self) -> usize {
        match self.dim {
            Dim::One => self.modes,
            Dim::Two => self.modes * self.modes,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice spacing `Δξ = 2π / L`.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Physical spacing `L / n`.
    pub fn dx(&self) -> f64 {
        self.box_length / self.modes as f64
    }

    /// Frequency measure of one lattice cell, `Δξ^d`.
    pub fn cell_measure(&self) -> f64 {
        self.dxi().powi(self.dim.as_usize() as i32)
    }

    pub fn xi_max(&self) -> f64 {
        self.dxi() * (self.modes / 2) as f64
    }

    pub fn xi_cut(&self) -> f64 {
        self.dealias_fraction * self.xi_max()
    }

    /// Signed lattice indices `(jx, jy)` of a storage slot.
    pub fn indices(&self, slot: usize) -> (i64, i64) {
        let n = self.modes;
        match self.dim {
            Dim::One => (signed_index(slot, n), 0),
            Dim::Two => (signed_index(slot / n, n), signed_index(slot % n, n)),
        }
    }

    pub fn slot(&self, jx: i64, jy: i64) -> Option<usize> {
        let n = self.modes;
        match self.dim {
            Dim::One => {
                if jy != 0 {
                    return None;
                }
                slot_of(jx, n)
            }
            Dim::Two => Some(slot_of(jx, n)? * n + slot_of(jy, n)?),
        }
    }

    pub fn freq(&self, slot: usize) -> Freq {
        let (jx, jy) = self.indices(slot);
        let d = self.dxi();
        Freq::new(jx as f64 * d, jy as f64 * d)
    }

    /// All lattice frequencies in storage order.
    pub fn freqs(&self) -> Vec<Freq> {
        (0..self.len()).map(|i| self.freq(i)).collect()
    }

    /// Slot holding `-ξ` modulo the lattice period (the Nyquist row maps to itself).
    pub fn mirror(&self, slot: usize) -> usize {
        let n = self.modes;
        match self.dim {
            Dim::One => (n - slot) % n,
            Dim::Two => ((n - slot / n) % n) * n + (n - slot % n) % n,
        }
    }

    /// Whether a frequency survives the dealias truncation (max-norm rule).
    pub fn retained(&self, xi: Freq) -> bool {
        xi.max_abs() <= self.xi_cut() * (1.0 + 1e-12)
    }

    /// Physical sample positions on `[0, L)`; in 2D the `(x, y)` of each slot.
    pub fn positions(&self) -> Vec<Freq> {
        let h = self.dx();
        let n = self.modes;
        match self.dim {
            Dim::One => (0..n).map(|i| Freq::line(i as f64 * h)).collect(),
            Dim::Two => (0..n * n)
                .map(|s| Freq::new((s / n) as f64 * h, (s % n) as f64 * h))
                .collect(),
        }
    }

    pub fn check_same(&self, other: &SpectralGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}
