//! Finite frequency lattices `hℤ^d ∩ [−K, K)^d` and functions on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use nlsmooth_core::grid::japanese;
use nlsmooth_core::{Dim, Error, FourierField, Freq, Result, SpectralGrid};

/// `m` points per axis with spacing `h = 2K/m`; natural index `j + m/2` for `j ∈ [−m/2, m/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub dim: Dim,
    pub points: usize,
    pub extent: f64,
}

impl Lattice {
    pub fn new(dim: Dim, points: usize, extent: f64) -> Result<Self> {
        if points < 2 || points % 2 != 0 {
            return Err(Error::InvalidParameter(format!("lattice needs an even point count >= 2, got {points}")));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidParameter(format!("lattice extent must be positive, got {extent}")));
        }
        Ok(Lattice { dim, points, extent })
    }

    pub fn line(points: usize, extent: f64) -> Result<Self> {
        Self::new(Dim::One, points, extent)
    }

    pub fn plane(points: usize, extent: f64) -> Result<Self> {
        Self::new(Dim::Two, points, extent)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    /// `h^d`.
    pub fn measure(&self) -> f64 {
        self.spacing().powi(self.dim.as_usize() as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim.as_usize() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half(&self) -> i64 {
        (self.points / 2) as i64
    }

    pub fn axis_slot(&self, j: i64) -> Option<usize> {
        let h = self.half();
        if j >= -h && j < h {
            Some((j + h) as usize)
        } else {
            None
        }
    }

    pub fn index_of(&self, jx: i64, jy: i64) -> Option<usize> {
        match self.dim {
            Dim::One => (jy == 0).then(|| self.axis_slot(jx)).flatten(),
            Dim::Two => Some(self.axis_slot(jx)? * self.points + self.axis_slot(jy)?),
        }
    }

    pub fn indices(&self, idx: usize) -> (i64, i64) {
        let h = self.half();
        match self.dim {
            Dim::One => (idx as i64 - h, 0),
            Dim::Two => ((idx / self.points) as i64 - h, (idx % self.points) as i64 - h),
        }
    }

    pub fn freq(&self, idx: usize) -> Freq {
        let (jx, jy) = self.indices(idx);
        let h = self.spacing();
        Freq::new(jx as f64 * h, jy as f64 * h)
    }

    /// Twice the points at the same spacing (twice the extent).
    pub fn doubled(&self) -> Self {
        Lattice {
            dim: self.dim,
            points: self.points * 2,
            extent: self.extent * 2.0,
        }
    }

    /// The spectral grid whose frequency lattice coincides with this one.
    pub fn spectral_grid(&self) -> Result<SpectralGrid> {
        SpectralGrid::new(self.dim, 2.0 * std::f64::consts::PI / self.spacing(), self.points, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeField {
    pub lattice: Lattice,
    pub values: Vec<Complex64>,
}

impl LatticeField {
    pub fn zeros(lattice: Lattice) -> Self {
        LatticeField {
            lattice,
            values: vec![Complex64::default(); lattice.len()],
        }
    }

    pub fn from_fn(lattice: Lattice, mut f: impl FnMut(Freq) -> Complex64) -> Self {
        LatticeField {
            lattice,
            values: (0..lattice.len()).map(|i| f(lattice.freq(i))).collect(),
        }
    }

    pub fn from_values(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::SizeMismatch {
                expected: lattice.len(),
                got: values.len(),
            });
        }
        Ok(LatticeField { lattice, values })
    }

    /// `(Σ ⟨ξ⟩^{2s} |f(ξ)|² h^d)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| japanese(self.lattice.freq(i).norm()).powf(2.0 * s) * v.norm_sqr())
            .sum();
        (sum * self.lattice.measure()).sqrt()
    }

    /// `(Σ_{|ξ|<1} |f|^λ h)^{1/λ}`.
    pub fn window_norm(&self, lambda: f64) -> f64 {
        let l = &self.lattice;
        let inside = (0..l.len()).filter(|&i| l.freq(i).norm() < 1.0);
        if lambda.is_infinite() {
            return inside.map(|i| self.values[i].norm()).fold(0.0, f64::max);
        }
        let sum: f64 = inside.map(|i| self.values[i].norm().powf(lambda)).sum();
        (sum * l.measure()).powf(1.0 / lambda)
    }

    /// `⟨f, g⟩ = Σ f conj(g) h^d`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.lattice.measure()
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        LatticeField {
            lattice: self.lattice,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticeField {
            lattice: self.lattice,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Same values as coefficients of a spectral field (power-of-two lattices).
    pub fn to_fourier(&self) -> Result<FourierField> {
        let grid = self.lattice.spectral_grid()?;
        let mut f = FourierField::zeros(grid, false);
        for (i, v) in self.values.iter().enumerate() {
            let (jx, jy) = self.lattice.indices(i);
            let slot = grid.slot(jx, jy).expect("lattice matches grid");
            f.coeffs[slot] = *v;
        }
        Ok(f)
    }

    pub fn from_fourier(lattice: Lattice, f: &FourierField) -> Result<Self> {
        lattice.spectral_grid()?.check_same(&f.grid)?;
        Ok(LatticeField::from_fn_indexed(lattice, |jx, jy| f.coeff_at(jx, jy)))
    }

    fn from_fn_indexed(lattice: Lattice, f: impl Fn(i64, i64) -> Complex64) -> Self {
        LatticeField {
            lattice,
            values: (0..lattice.len())
                .map(|i| {
                    let (jx, jy) = lattice.indices(i);
                    f(jx, jy)
                })
                .collect(),
        }
    }
}
