//! Cached FFT plans and the unit-amplitude transform pair.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: LazyLock<Mutex<HashMap<(usize, bool), Plan>>> =
    LazyLock::new(|| Mutex::new(HashMap::new()));

/// Shared plan for length `n`; safe to call from any thread.
pub fn plan(n: usize, forward: bool) -> Plan {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    cache
        .entry((n, forward))
        .or_insert_with(|| {
            let dir = if forward {
                FftDirection::Forward
            } else {
                FftDirection::Inverse
            };
            FftPlanner::new().plan_fft(n, dir)
        })
        .clone()
}

fn run_lines(buf: &mut [Complex64], n: usize, forward: bool) {
    let p = plan(n, forward);
    let mut scratch = vec![Complex64::default(); p.get_inplace_scratch_len()];
    p.process_with_scratch(buf, &mut scratch);
}

/// Unnormalized transform of a row-major `n × n` array along both axes.
fn run_square(buf: &mut [Complex64], n: usize, forward: bool) {
    run_lines(buf, n, forward);
    transpose(buf, n);
    run_lines(buf, n, forward);
    transpose(buf, n);
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Physical samples to coefficients: `c_ξ = n^{-d} Σ_x f(x) e^{-iξx}`.
pub fn forward(buf: &mut [Complex64], n: usize, dim: usize) {
    let inv = 1.0 / buf.len() as f64;
    forward_unscaled(buf, n, dim);
    buf.iter_mut().for_each(|c| *c *= inv);
}

/// `Σ_x f(x) e^{-iξx}` without the `n^{-d}` factor.
pub fn forward_unscaled(buf: &mut [Complex64], n: usize, dim: usize) {
    if dim == 1 {
        run_lines(buf, n, true);
    } else {
        run_square(buf, n, true);
    }
}

/// Coefficients to physical samples: `f(x) = Σ_ξ c_ξ e^{iξx}`.
pub fn inverse(buf: &mut [Complex64], n: usize, dim: usize) {
    if dim == 1 {
        run_lines(buf, n, false);
    } else {
        run_square(buf, n, false);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(f: &[Complex64]) -> Vec<Complex64> {
        let n = f.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::default();
                for (x, v) in f.iter().enumerate() {
                    let th = -2.0 * PI * (k * x) as f64 / n as f64;
                    acc += v * Complex64::from_polar(1.0, th);
                }
                acc / n as f64
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let n = 48;
        let f: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos() * 0.5))
            .collect();
        let mut g = f.clone();
        forward(&mut g, n, 1);
        for (a, b) in g.iter().zip(naive(&f)) {
            assert!((a - b).norm() < 1e-12);
        }
        inverse(&mut g, n, 1);
        for (a, b) in g.iter().zip(&f) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn square_round_trip() {
        let n = 16;
        let f: Vec<Complex64> = (0..n * n)
            .map(|i| Complex64::new((i as f64).sqrt().sin(), (i % 7) as f64))
            .collect();
        let mut g = f.clone();
        forward(&mut g, n, 2);
        inverse(&mut g, n, 2);
        let err = g.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
