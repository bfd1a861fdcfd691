//! Multilinear kernels `W(ξ; ξ₁, …, ξ_k)` on the constraint set `ξ = Σ s_j ξ_j`.

use num_complex::Complex64;

use nlsmooth_core::grid::japanese;
use nlsmooth_core::{EquationSpec, Freq, Interaction};

pub trait Kernel: Sync {
    fn signature(&self) -> &[i8];

    fn weight(&self, xi: Freq, inputs: &[Freq]) -> Complex64;

    fn degree(&self) -> usize {
        self.signature().len()
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn signature(&self) -> &[i8] {
        (**self).signature()
    }

    fn weight(&self, xi: Freq, inputs: &[Freq]) -> Complex64 {
        (**self).weight(xi, inputs)
    }
}

/// Any closure with an explicit conjugation signature.
pub struct FnKernel<F> {
    signature: Vec<i8>,
    f: F,
}

impl<F> FnKernel<F>
where
    F: Fn(Freq, &[Freq]) -> Complex64 + Sync,
{
    pub fn new(signature: Vec<i8>, f: F) -> Self {
        FnKernel { signature, f }
    }
}

impl<F> Kernel for FnKernel<F>
where
    F: Fn(Freq, &[Freq]) -> Complex64 + Sync,
{
    fn signature(&self) -> &[i8] {
        &self.signature
    }

    fn weight(&self, xi: Freq, inputs: &[Freq]) -> Complex64 {
        (self.f)(xi, inputs)
    }
}

/// Phase-dependent factor multiplying the equation's symbol `m(Ξ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Restriction {
    /// `1`.
    Full,
    /// `⟨Φ⟩^{−σ}`.
    Smoothed { sigma: f64 },
    /// `1_{|Φ − α| < M}`.
    Band { alpha: f64, half_width: f64 },
    /// `1_{|Φ| ≤ N}`.
    Near { threshold: f64 },
    /// `1_{|Φ| > N}`.
    Far { threshold: f64 },
    /// `e^{itΦ}/(iΦ) · 1_{|Φ| > N}`.
    Boundary { threshold: f64, time: f64 },
}

impl Restriction {
    pub fn factor(&self, phi: f64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        match *self {
            Restriction::Full => one,
            Restriction::Smoothed { sigma } => one * japanese(phi).powf(-sigma),
            Restriction::Band { alpha, half_width } => {
                if (phi - alpha).abs() < half_width {
                    one
                } else {
                    zero
                }
            }
            Restriction::Near { threshold } => {
                if phi.abs() <= threshold {
                    one
                } else {
                    zero
                }
            }
            Restriction::Far { threshold } => {
                if phi.abs() > threshold {
                    one
                } else {
                    zero
                }
            }
            Restriction::Boundary { threshold, time } => {
                if phi.abs() > threshold {
                    Complex64::from_polar(1.0, time * phi) / Complex64::new(0.0, phi)
                } else {
                    zero
                }
            }
        }
    }
}

/// `m(Ξ) · R(Φ(Ξ))` for one nonlinear term of an equation.
#[derive(Debug, Clone, Copy)]
pub struct PhaseKernel {
    pub equation: EquationSpec,
    pub term: Interaction,
    pub restriction: Restriction,
    /// Replace `m` by `1`.
    pub unit_symbol: bool,
    /// Drop tuples with `Φ = 0` exactly (a null set off the lattice).
    pub drop_resonant: bool,
}

/// `|Φ|` at or below this counts as exactly resonant.
pub const RESONANCE_TOL: f64 = 1e-9;

impl PhaseKernel {
    pub fn new(equation: EquationSpec, term: Interaction, restriction: Restriction) -> Self {
        PhaseKernel {
            equation,
            term,
            restriction,
            unit_symbol: false,
            drop_resonant: false,
        }
    }

    pub fn without_resonances(mut self) -> Self {
        self.drop_resonant = true;
        self
    }

    pub fn with_unit_symbol(mut self) -> Self {
        self.unit_symbol = true;
        self
    }

    pub fn phase(&self, xi: Freq, inputs: &[Freq]) -> f64 {
        self.equation.phase_of(&self.term, xi, inputs)
    }

    pub fn symbol(&self, xi: Freq, inputs: &[Freq]) -> Complex64 {
        if self.unit_symbol {
            Complex64::new(1.0, 0.0)
        } else {
            self.equation.multiplier_of(&self.term, xi, inputs)
        }
    }
}

impl Kernel for PhaseKernel {
    fn signature(&self) -> &[i8] {
        self.term.signature
    }

    fn weight(&self, xi: Freq, inputs: &[Freq]) -> Complex64 {
        let phi = self.phase(xi, inputs);
        if self.drop_resonant && phi.abs() <= RESONANCE_TOL {
            return Complex64::default();
        }
        let r = self.restriction.factor(phi);
        if r == Complex64::default() {
            return r;
        }
        self.symbol(xi, inputs) * r
    }
}

/// Average of an inner kernel over `q` midpoint offsets per axis of every free input
/// inside its lattice cell; the last input absorbs the offsets so the constraint holds.
pub struct CellAveraged<K> {
    pub inner: K,
    pub points: usize,
    pub spacing: f64,
    pub dims: usize,
}

impl<K: Kernel> CellAveraged<K> {
    pub fn new(inner: K, points: usize, spacing: f64, dims: usize) -> Self {
        CellAveraged {
            inner,
            points: points.max(1),
            spacing,
            dims,
        }
    }

    fn offset(&self, i: usize) -> f64 {
        ((i as f64 + 0.5) / self.points as f64 - 0.5) * self.spacing
    }
}

impl<K: Kernel> Kernel for CellAveraged<K> {
    fn signature(&self) -> &[i8] {
        self.inner.signature()
    }

    fn weight(&self, xi: Freq, inputs: &[Freq]) -> Complex64 {
        let k = inputs.len();
        if self.points == 1 || k < 2 {
            return self.inner.weight(xi, inputs);
        }
        let sig = self.inner.signature();
        let free = (k - 1) * self.dims;
        let q = self.points;
        let total = q.pow(free as u32);
        let mut shifted = [Freq::ZERO; crate::tuples::MAX_DEGREE];
        let mut acc = Complex64::default();
        for code in 0..total {
            let mut c = code;
            let mut drift = Freq::ZERO;
            for j in 0..k - 1 {
                let dx = self.offset(c % q);
                c /= q;
                let dy = if self.dims == 2 {
                    let d = self.offset(c % q);
                    c /= q;
                    d
                } else {
                    0.0
                };
                let d = Freq::new(dx, dy);
                shifted[j] = inputs[j] + d;
                drift = drift + d.signed(sig[j]);
            }
            shifted[k - 1] = inputs[k - 1] - drift.signed(sig[k - 1]);
            acc += self.inner.weight(xi, &shifted[..k]);
        }
        acc / total as f64
    }
}
