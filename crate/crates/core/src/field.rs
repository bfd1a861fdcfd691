//! Fourier coefficients on a [`SpectralGrid`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Dim, Freq, SpectralGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierField {
    pub grid: SpectralGrid,
    pub coeffs: Vec<Complex64>,
    /// Hermitian pairing `c(−ξ) = conj c(ξ)` is maintained (real physical field).
    pub real_symmetric: bool,
}

impl FourierField {
    pub fn zeros(grid: SpectralGrid, real_symmetric: bool) -> Self {
        FourierField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
            real_symmetric,
        }
    }

    pub fn from_coeffs(grid: SpectralGrid, coeffs: Vec<Complex64>, real_symmetric: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        let mut f = FourierField {
            grid,
            coeffs,
            real_symmetric,
        };
        if real_symmetric {
            f.enforce_symmetry();
        }
        Ok(f)
    }

    /// Coefficients given as a function of frequency.
    pub fn from_symbol(grid: SpectralGrid, real_symmetric: bool, f: impl Fn(Freq) -> Complex64) -> Self {
        let coeffs = grid.freqs().into_iter().map(f).collect();
        let mut out = FourierField {
            grid,
            coeffs,
            real_symmetric,
        };
        if real_symmetric {
            out.enforce_symmetry();
        }
        out
    }

    /// Forward transform of complex physical samples.
    pub fn from_physical(grid: SpectralGrid, values: &[Complex64]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        let mut coeffs = values.to_vec();
        fft::forward(&mut coeffs, grid.modes, grid.dim.as_usize());
        Ok(FourierField {
            grid,
            coeffs,
            real_symmetric: false,
        })
    }

    /// Forward transform of real physical samples; the result is Hermitian.
    pub fn from_real(grid: SpectralGrid, values: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut f = Self::from_physical(grid, &complex)?;
        f.real_symmetric = true;
        f.enforce_symmetry();
        Ok(f)
    }

    pub fn to_physical(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        fft::inverse(&mut buf, self.grid.modes, self.grid.dim.as_usize());
        buf
    }

    /// Real part of the physical samples.
    pub fn to_real(&self) -> Vec<f64> {
        self.to_physical().into_iter().map(|c| c.re).collect()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff_at(&self, jx: i64, jy: i64) -> Complex64 {
        self.grid
            .slot(jx, jy)
            .map(|s| self.coeffs[s])
            .unwrap_or_default()
    }

    /// Replace each coefficient by the average with its conjugate mirror.
    pub fn enforce_symmetry(&mut self) {
        let g = self.grid;
        for i in 0..self.coeffs.len() {
            let m = g.mirror(i);
            if m < i {
                continue;
            }
            if m == i {
                self.coeffs[i].im = 0.0;
            } else {
                let avg = (self.coeffs[i] + self.coeffs[m].conj()) * 0.5;
                self.coeffs[i] = avg;
                self.coeffs[m] = avg.conj();
            }
        }
    }

    /// Largest `|c(−ξ) − conj c(ξ)|` over the lattice.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[self.grid.mirror(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Coefficient-wise product with a Fourier symbol.
    pub fn apply_symbol(&self, symbol: impl Fn(Freq) -> Complex64) -> Self {
        let g = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(g.freq(i)))
            .collect();
        FourierField {
            grid: g,
            coeffs,
            real_symmetric: false,
        }
    }

    /// Spectral derivative along axis 0 (x) or 1 (y); the unpaired Nyquist row is dropped.
    pub fn derivative(&self, axis: usize) -> Self {
        let g = self.grid;
        let half = (g.modes / 2) as i64;
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let (jx, jy) = g.indices(i);
            let j = if axis == 0 { jx } else { jy };
            if j == -half {
                *c = Complex64::default();
            } else {
                *c *= Complex64::new(0.0, j as f64 * g.dxi());
            }
        }
        out
    }

    pub fn scaled(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        if a.im != 0.0 {
            out.real_symmetric = false;
        }
        out
    }

    pub fn conj_field(&self) -> Self {
        let g = self.grid;
        let coeffs = (0..self.coeffs.len())
            .map(|i| self.coeffs[g.mirror(i)].conj())
            .collect();
        FourierField {
            grid: g,
            coeffs,
            real_symmetric: self.real_symmetric,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(FourierField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
            real_symmetric: self.real_symmetric && other.real_symmetric,
        })
    }

    /// Zero every coefficient outside the max-norm ball of radius `cut`.
    pub fn truncate(&mut self, cut: f64) {
        let g = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if g.freq(i).max_abs() > cut * (1.0 + 1e-12) {
                *c = Complex64::default();
            }
        }
    }

    /// Zero coefficients above the grid's dealias cutoff.
    pub fn dealias(&mut self) {
        self.truncate(self.grid.xi_cut());
    }

    /// Copy shared lattice modes into a grid with the same box and a different mode count.
    pub fn resample(&self, target: SpectralGrid) -> Result<Self> {
        if target.dim != self.grid.dim || target.box_length != self.grid.box_length {
            return Err(Error::GridMismatch(format!(
                "resample needs equal box and dimension: {:?} vs {:?}",
                self.grid, target
            )));
        }
        let mut out = FourierField::zeros(target, self.real_symmetric);
        let lim = (self.grid.modes.min(target.modes) / 2) as i64;
        for (i, c) in self.coeffs.iter().enumerate() {
            let (jx, jy) = self.grid.indices(i);
            if jx.abs() >= lim || jy.abs() >= lim {
                continue;
            }
            if let Some(t) = target.slot(jx, jy) {
                out.coeffs[t] = *c;
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn dim(&self) -> Dim {
        self.grid.dim
    }
}
