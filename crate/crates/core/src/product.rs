//! Alias-free pointwise products via zero padding.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::FourierField;
use crate::grid::{signed_index, slot_of, Dim, SpectralGrid};

/// Padded length per axis for a degree-`k` product on `n` modes: `⌈(k+1)n/2⌉`.
pub fn padded_modes(n: usize, degree: usize) -> usize {
    ((degree + 1) * n).div_ceil(2)
}

/// Index tables linking an `n`-mode grid to its `m`-point padded grid.
pub struct PadPlan {
    pub m: usize,
    /// Padded slot of each grid slot.
    pub map: Vec<usize>,
    /// Whether each grid slot lies inside the dealias cutoff.
    pub keep: Vec<bool>,
}

type PlanKey = (usize, usize, usize, u64, u64);

static PAD_PLANS: LazyLock<Mutex<HashMap<PlanKey, Arc<PadPlan>>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

pub fn pad_plan(grid: &SpectralGrid, m: usize) -> Arc<PadPlan> {
    let key = (
        grid.dim.as_usize(),
        grid.modes,
        m,
        grid.box_length.to_bits(),
        grid.dealias_fraction.to_bits(),
    );
    let mut cache = PAD_PLANS.lock().expect("pad plan cache poisoned");
    cache
        .entry(key)
        .or_insert_with(|| {
            let n = grid.modes;
            let map = (0..grid.len())
                .map(|i| match grid.dim {
                    Dim::One => slot_of(signed_index(i, n), m).expect("padded grid is larger"),
                    Dim::Two => {
                        let px = slot_of(signed_index(i / n, n), m).expect("padded grid is larger");
                        let py = slot_of(signed_index(i % n, n), m).expect("padded grid is larger");
                        px * m + py
                    }
                })
                .collect();
            let keep = (0..grid.len()).map(|i| grid.retained(grid.freq(i))).collect();
            Arc::new(PadPlan { m, map, keep })
        })
        .clone()
}

/// Physical samples of `f` on a grid with `m ≥ n` points per axis.
pub fn to_padded(f: &FourierField, m: usize) -> Vec<Complex64> {
    let g = f.grid;
    let d = g.dim.as_usize();
    let plan = pad_plan(&g, m);
    let mut buf = vec![Complex64::default(); m.pow(d as u32)];
    for (c, &p) in f.coeffs.iter().zip(&plan.map) {
        buf[p] = *c;
    }
    fft::inverse(&mut buf, m, d);
    buf
}

/// Coefficients of padded physical samples, restricted to the dealias cutoff of `grid`.
pub fn from_padded(grid: SpectralGrid, mut values: Vec<Complex64>, m: usize, real: bool) -> FourierField {
    let d = grid.dim.as_usize();
    let scale = 1.0 / values.len() as f64;
    fft::forward_unscaled(&mut values, m, d);
    let plan = pad_plan(&grid, m);
    let coeffs = plan
        .map
        .iter()
        .zip(&plan.keep)
        .map(|(&p, &k)| if k { values[p] * scale } else { Complex64::default() })
        .collect();
    let mut out = FourierField {
        grid,
        coeffs,
        real_symmetric: real,
    };
    if real {
        out.enforce_symmetry();
    }
    out
}

/// Product `Π_j f_j^{(s_j)}` where `s_j = −1` conjugates the factor, so output
/// frequencies satisfy `ξ = Σ s_j ξ_j`. The result is truncated to the grid's
/// dealias cutoff.
pub fn dealiased_product(fields: &[&FourierField], signature: &[i8]) -> Result<FourierField> {
    if fields.is_empty() {
        return Err(Error::InvalidParameter("product needs at least one factor".into()));
    }
    if fields.len() != signature.len() {
        return Err(Error::SizeMismatch {
            expected: fields.len(),
            got: signature.len(),
        });
    }
    let grid = fields[0].grid;
    for f in &fields[1..] {
        grid.check_same(&f.grid)?;
    }
    let m = padded_modes(grid.modes, fields.len());
    let mut acc: Option<Vec<Complex64>> = None;
    for (f, &s) in fields.iter().zip(signature) {
        let mut vals = to_padded(f, m);
        if s < 0 {
            vals.iter_mut().for_each(|v| *v = v.conj());
        }
        acc = Some(match acc {
            None => vals,
            Some(mut a) => {
                a.iter_mut().zip(&vals).for_each(|(x, y)| *x *= y);
                a
            }
        });
    }
    let real = fields.iter().all(|f| f.real_symmetric);
    Ok(from_padded(grid, acc.expect("non-empty"), m, real))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mode(g: SpectralGrid, j: i64) -> FourierField {
        let mut f = FourierField::zeros(g, false);
        f.coeffs[g.slot(j, 0).unwrap()] = Complex64::new(1.0, 0.0);
        f
    }

    #[test]
    fn mode_arithmetic() {
        let g = SpectralGrid::line(2.0 * PI, 32).unwrap();
        let e1 = mode(g, 1);
        let p = dealiased_product(&[&e1, &e1, &e1], &[1, 1, 1]).unwrap();
        assert!((p.coeff_at(3, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let q = dealiased_product(&[&e1, &e1, &e1], &[1, -1, 1]).unwrap();
        assert!((q.coeff_at(1, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(q.max_abs_diff(&e1) < 1e-14);
    }

    #[test]
    fn output_above_cutoff_is_zero() {
        let g = SpectralGrid::line(2.0 * PI, 16).unwrap();
        let e = mode(g, 4);
        let p = dealiased_product(&[&e, &e], &[1, 1]).unwrap();
        assert!(p.max_abs() < 1e-15);
    }

    #[test]
    fn padding_sizes() {
        assert_eq!(padded_modes(64, 3), 128);
        assert_eq!(padded_modes(64, 5), 192);
        assert_eq!(padded_modes(64, 2), 96);
    }
}
