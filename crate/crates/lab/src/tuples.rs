//! Enumeration of constraint tuples and brute-force multilinear sums.

use num_complex::Complex64;
use rayon::prelude::*;

use nlsmooth_core::grid::japanese;
use nlsmooth_core::{Error, Freq, Result};

use crate::kernel::Kernel;
use crate::lattice::{Lattice, LatticeField};

pub const MAX_DEGREE: usize = 5;
/// Upper limit on `len^k` for tabulated kernels.
pub const MAX_TABULATED: u128 = 60_000_000;
const CHUNK: usize = 16;

/// Calls `f(input_indices, input_freqs)` for every tuple with output `out` whose
/// inputs all lie on the lattice, in a fixed order.
pub fn for_each_tuple<F>(lattice: &Lattice, freqs: &[Freq], signature: &[i8], out: usize, mut f: F)
where
    F: FnMut(&[usize], &[Freq]),
{
    let k = signature.len();
    assert!((1..=MAX_DEGREE).contains(&k), "degree {k} out of range");
    let len = lattice.len();
    let (ox, oy) = lattice.indices(out);
    let mut idx = [0usize; MAX_DEGREE];
    let mut fr = [Freq::ZERO; MAX_DEGREE];
    let last = k - 1;
    let sl = signature[last] as i64;
    loop {
        let (mut rx, mut ry) = (ox, oy);
        for i in 0..last {
            let (jx, jy) = lattice.indices(idx[i]);
            let s = signature[i] as i64;
            rx -= s * jx;
            ry -= s * jy;
        }
        if let Some(l) = lattice.index_of(sl * rx, sl * ry) {
            idx[last] = l;
            for i in 0..k {
                fr[i] = freqs[idx[i]];
            }
            f(&idx[..k], &fr[..k]);
        }
        let mut d = 0;
        loop {
            if d == last {
                return;
            }
            idx[d] += 1;
            if idx[d] < len {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn check_inputs(lattice: &Lattice, signature: &[i8], inputs: &[&LatticeField]) -> Result<()> {
    if inputs.len() != signature.len() {
        return Err(Error::SizeMismatch {
            expected: signature.len(),
            got: inputs.len(),
        });
    }
    for u in inputs {
        if u.lattice != *lattice {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.lattice, lattice)));
        }
    }
    Ok(())
}

#[inline]
fn slot_value(values: &[Complex64], idx: usize, sign: i8) -> Complex64 {
    if sign < 0 {
        values[idx].conj()
    } else {
        values[idx]
    }
}

/// Anything that can list the weighted tuples of one output frequency.
pub trait TupleSource: Sync {
    fn lattice(&self) -> &Lattice;
    fn signature(&self) -> &[i8];
    fn visit<F: FnMut(&[usize], Complex64)>(&self, out: usize, f: F);

    /// `T(u)(ξ) = h^{d(k−1)} Σ W Π u_j^{(s_j)}(ξ_j)`.
    fn apply(&self, inputs: &[&LatticeField]) -> Result<LatticeField> {
        let lattice = *self.lattice();
        check_inputs(&lattice, self.signature(), inputs)?;
        let sig = self.signature();
        let measure = lattice.measure().powi(sig.len() as i32 - 1);
        let values: Vec<Complex64> = (0..lattice.len())
            .into_par_iter()
            .map(|o| {
                let mut acc = Complex64::default();
                self.visit(o, |idx, w| {
                    let mut p = w;
                    for (j, &i) in idx.iter().enumerate() {
                        p *= slot_value(&inputs[j].values, i, sig[j]);
                    }
                    acc += p;
                });
                acc * measure
            })
            .collect();
        Ok(LatticeField { lattice, values })
    }

    /// `A` with `⟨T(u), g⟩ = h^d Σ u_j^{(s_j)}(η) A(η)` for the chosen slot.
    fn adjoint_slot(&self, slot: usize, inputs: &[&LatticeField], g: &LatticeField) -> Result<LatticeField> {
        let lattice = *self.lattice();
        check_inputs(&lattice, self.signature(), inputs)?;
        let sig = self.signature();
        let measure = lattice.measure().powi(sig.len() as i32 - 1);
        let len = lattice.len();
        let chunks: Vec<Vec<Complex64>> = (0..len)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|outs| {
                let mut acc = vec![Complex64::default(); len];
                for &o in outs {
                    let go = g.values[o].conj();
                    self.visit(o, |idx, w| {
                        let mut p = w * go;
                        for (j, &i) in idx.iter().enumerate() {
                            if j != slot {
                                p *= slot_value(&inputs[j].values, i, sig[j]);
                            }
                        }
                        acc[idx[slot]] += p;
                    });
                }
                acc
            })
            .collect();
        let mut values = vec![Complex64::default(); len];
        for c in chunks {
            for (v, a) in values.iter_mut().zip(c) {
                *v += a;
            }
        }
        for v in values.iter_mut() {
            *v *= measure;
        }
        Ok(LatticeField { lattice, values })
    }

    /// `sup_ξ (h^{d(k−1)} Σ |⟨ξ⟩^{s_out} W Π ⟨ξ_j⟩^{−s_in}|²)^{1/2}`, the Cauchy–Schwarz bound
    /// on the norm from `H^{s_in} × … × H^{s_in}` to `H^{s_out}`.
    fn upper_functional(&self, s_in: f64, s_out: f64) -> f64 {
        let lattice = *self.lattice();
        let k = self.signature().len();
        let measure = lattice.measure().powi(k as i32 - 1);
        let inw: Vec<f64> = (0..lattice.len())
            .map(|i| japanese(lattice.freq(i).norm()).powf(-2.0 * s_in))
            .collect();
        (0..lattice.len())
            .into_par_iter()
            .map(|o| {
                let mut acc = 0.0;
                self.visit(o, |idx, w| {
                    let mut p = w.norm_sqr();
                    for &i in idx {
                        p *= inw[i];
                    }
                    acc += p;
                });
                let ow = japanese(lattice.freq(o).norm()).powf(2.0 * s_out);
                (acc * ow * measure).sqrt()
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// Kernel evaluated on the fly at every visit.
pub struct Streamed<'a, K: Kernel> {
    lattice: Lattice,
    freqs: Vec<Freq>,
    kernel: &'a K,
}

impl<'a, K: Kernel> Streamed<'a, K> {
    pub fn new(lattice: Lattice, kernel: &'a K) -> Self {
        Streamed {
            freqs: (0..lattice.len()).map(|i| lattice.freq(i)).collect(),
            lattice,
            kernel,
        }
    }
}

impl<K: Kernel> TupleSource for Streamed<'_, K> {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn signature(&self) -> &[i8] {
        self.kernel.signature()
    }

    fn visit<F: FnMut(&[usize], Complex64)>(&self, out: usize, mut f: F) {
        let xi = self.freqs[out];
        for_each_tuple(&self.lattice, &self.freqs, self.kernel.signature(), out, |idx, fr| {
            let w = self.kernel.weight(xi, fr);
            if w != Complex64::default() {
                f(idx, w);
            }
        });
    }
}

#[derive(Clone, Copy)]
struct Entry {
    inputs: [u16; MAX_DEGREE],
    weight: Complex64,
}

/// Nonzero kernel values stored per output frequency.
pub struct Tabulated {
    lattice: Lattice,
    signature: Vec<i8>,
    offsets: Vec<usize>,
    entries: Vec<Entry>,
}

impl Tabulated {
    pub fn fits(lattice: &Lattice, degree: usize) -> bool {
        lattice.len() <= u16::MAX as usize + 1 && (lattice.len() as u128).pow(degree as u32) <= MAX_TABULATED
    }

    pub fn build<K: Kernel>(lattice: Lattice, kernel: &K) -> Result<Self> {
        let k = kernel.degree();
        if !Self::fits(&lattice, k) {
            return Err(Error::InvalidParameter(format!(
                "lattice with {} points is too large to tabulate a degree-{k} kernel",
                lattice.len()
            )));
        }
        let stream = Streamed::new(lattice, kernel);
        let per_out: Vec<Vec<Entry>> = (0..lattice.len())
            .into_par_iter()
            .map(|o| {
                let mut v = Vec::new();
                stream.visit(o, |idx, w| {
                    let mut inputs = [0u16; MAX_DEGREE];
                    for (a, &b) in inputs.iter_mut().zip(idx) {
                        *a = b as u16;
                    }
                    v.push(Entry { inputs, weight: w });
                });
                v
            })
            .collect();
        let mut offsets = Vec::with_capacity(per_out.len() + 1);
        offsets.push(0);
        let total: usize = per_out.iter().map(Vec::len).sum();
        let mut entries = Vec::with_capacity(total);
        for v in per_out {
            entries.extend(v);
            offsets.push(entries.len());
        }
        Ok(Tabulated {
            lattice,
            signature: kernel.signature().to_vec(),
            offsets,
            entries,
        })
    }

    /// Number of stored nonzero tuples.
    pub fn nonzero(&self) -> usize {
        self.entries.len()
    }
}

impl TupleSource for Tabulated {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn signature(&self) -> &[i8] {
        &self.signature
    }

    fn visit<F: FnMut(&[usize], Complex64)>(&self, out: usize, mut f: F) {
        let k = self.signature.len();
        let mut idx = [0usize; MAX_DEGREE];
        for e in &self.entries[self.offsets[out]..self.offsets[out + 1]] {
            for j in 0..k {
                idx[j] = e.inputs[j] as usize;
            }
            f(&idx[..k], e.weight);
        }
    }
}

/// Direct evaluation of `kernel` on the lattice.
pub fn apply_kernel<K: Kernel>(lattice: Lattice, kernel: &K, inputs: &[&LatticeField]) -> Result<LatticeField> {
    Streamed::new(lattice, kernel).apply(inputs)
}
