//! Lower and upper estimates of multilinear operator norms between Sobolev spaces.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use nlsmooth_core::grid::japanese;
use nlsmooth_core::Result;

use crate::lattice::{Lattice, LatticeField};
use crate::tuples::TupleSource;

/// How input functions are measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputNorm {
    Sobolev,
    /// `‖u‖_{H^s} + ‖û‖_{L^λ(|ξ|<1)}`.
    Adapted { lambda: f64 },
}

impl InputNorm {
    pub fn eval(&self, u: &LatticeField, s: f64) -> f64 {
        match *self {
            InputNorm::Sobolev => u.sobolev_norm(s),
            InputNorm::Adapted { lambda } => u.sobolev_norm(s) + u.window_norm(lambda),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Random starting inputs.
    pub trials: usize,
    /// Alternating-maximization sweeps after each random start.
    pub iterations: usize,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            trials: 4,
            iterations: 12,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    /// Best ratio `‖T(u)‖ / Π ‖u_j‖` found.
    pub lower: f64,
    /// Cauchy–Schwarz shell bound.
    pub upper: f64,
    /// Best ratio over the random starts alone.
    pub random_lower: f64,
}

fn weights(lattice: &Lattice, s: f64) -> Vec<f64> {
    (0..lattice.len())
        .map(|i| japanese(lattice.freq(i).norm()).powf(s))
        .collect()
}

fn normalized(values: Vec<Complex64>, lattice: Lattice) -> LatticeField {
    let f = LatticeField { lattice, values };
    let n = f.sobolev_norm(0.0);
    if n > 0.0 {
        f.scaled(Complex64::new(1.0 / n, 0.0))
    } else {
        f
    }
}

fn random_unit(lattice: Lattice, rng: &mut ChaCha8Rng) -> LatticeField {
    let values = (0..lattice.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    normalized(values, lattice)
}

fn reweight(f: &LatticeField, w: &[f64]) -> LatticeField {
    LatticeField {
        lattice: f.lattice,
        values: f.values.iter().zip(w).map(|(v, a)| v * a).collect(),
    }
}

/// Ratio `‖T(u)‖_{H^{s_out}} / Π ‖u_j‖` for concrete inputs.
pub fn norm_ratio<S: TupleSource>(
    op: &S,
    inputs: &[&LatticeField],
    s_in: f64,
    s_out: f64,
    input_norm: InputNorm,
) -> Result<f64> {
    let out = op.apply(inputs)?;
    let denom: f64 = inputs.iter().map(|u| input_norm.eval(u, s_in)).product();
    Ok(if denom > 0.0 { out.sobolev_norm(s_out) / denom } else { 0.0 })
}

/// Random unit inputs refined by alternating maximization of `|⟨T(u), g⟩|`,
/// one slot at a time, in the weighted `L²` picture.
pub fn estimate_norm<S: TupleSource>(
    op: &S,
    s_in: f64,
    s_out: f64,
    input_norm: InputNorm,
    opts: &EstimateOptions,
) -> Result<NormEstimate> {
    let lattice = *op.lattice();
    let sig = op.signature().to_vec();
    let k = sig.len();
    let w_in = weights(&lattice, -s_in);
    let w_out = weights(&lattice, s_out);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut lower = 0.0f64;
    let mut random_lower = 0.0f64;
    for _ in 0..opts.trials.max(1) {
        let mut tilde: Vec<LatticeField> = (0..k).map(|_| random_unit(lattice, &mut rng)).collect();
        for it in 0..=opts.iterations {
            let inputs: Vec<LatticeField> = tilde.iter().map(|f| reweight(f, &w_in)).collect();
            let refs: Vec<&LatticeField> = inputs.iter().collect();
            let r = norm_ratio(op, &refs, s_in, s_out, input_norm)?;
            if it == 0 {
                random_lower = random_lower.max(r);
            }
            lower = lower.max(r);
            if it == opts.iterations {
                break;
            }
            let out = op.apply(&refs)?;
            let out_w = reweight(&out, &w_out);
            if out_w.sobolev_norm(0.0) == 0.0 {
                break;
            }
            let g = reweight(&normalized(out_w.values, lattice), &w_out);
            let mut current = inputs;
            for j in 0..k {
                let refs: Vec<&LatticeField> = current.iter().collect();
                let a = op.adjoint_slot(j, &refs, &g)?;
                let a = reweight(&a, &w_in);
                let values = if sig[j] < 0 {
                    a.values
                } else {
                    a.values.into_iter().map(|v| v.conj()).collect()
                };
                let t = normalized(values, lattice);
                if t.sobolev_norm(0.0) == 0.0 {
                    continue;
                }
                current[j] = reweight(&t, &w_in);
                tilde[j] = t;
            }
        }
    }
    let upper = op.upper_functional(s_in, s_out);
    Ok(NormEstimate {
        lower,
        upper,
        random_lower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FnKernel;
    use crate::tuples::Streamed;
    use nlsmooth_core::Freq;

    #[test]
    fn identity_has_unit_norm() {
        let l = Lattice::line(32, 8.0).unwrap();
        let k = FnKernel::new(vec![1], |_, _| Complex64::new(1.0, 0.0));
        let e = estimate_norm(&Streamed::new(l, &k), 0.5, 0.5, InputNorm::Sobolev, &EstimateOptions::default())
            .unwrap();
        assert!((e.lower - 1.0).abs() < 1e-12);
        assert!((e.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_kernel_gives_zero() {
        let l = Lattice::line(16, 8.0).unwrap();
        let k = FnKernel::new(vec![1, -1, 1], |_, _| Complex64::default());
        let e = estimate_norm(&Streamed::new(l, &k), 0.0, 0.0, InputNorm::Sobolev, &EstimateOptions::default())
            .unwrap();
        assert_eq!((e.lower, e.upper), (0.0, 0.0));
    }

    #[test]
    fn ascent_improves_on_random_and_stays_below_upper() {
        let l = Lattice::line(32, 16.0).unwrap();
        let k = FnKernel::new(vec![1, 1], |xi: Freq, _: &[Freq]| Complex64::new(1.0 / (1.0 + xi.x.abs()), 0.0));
        let e = estimate_norm(&Streamed::new(l, &k), 0.0, 0.0, InputNorm::Sobolev, &EstimateOptions::default())
            .unwrap();
        assert!(e.lower >= e.random_lower);
        assert!(e.lower <= e.upper * (1.0 + 1e-12));
    }
}
