//! Lattice operators against independent direct summations.

use nlsmooth_core::grid::japanese;
use nlsmooth_core::product::dealiased_product;
use nlsmooth_core::{Complex64, EquationKind, EquationSpec, Freq, Interaction};
use nlsmooth_lab::infr::{boundary_term, split_resonant};
use nlsmooth_lab::{BoundProbe, Lattice, LatticeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(l: Lattice, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeField::from_fn(l, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// `Φ = c·(Σ s_j L(ξ_j) − L(ξ))` built from the dispersion relation alone.
fn phase_from_dispersion(kind: EquationKind, sig: &[i8], xi: Freq, v: &[Freq]) -> f64 {
    let disp = |f: Freq| match kind {
        EquationKind::Mkdv | EquationKind::Kdv => -f.x.powi(3),
        EquationKind::Nls | EquationKind::Dnls => f.x * f.x,
        EquationKind::Mzk => -(f.x.powi(3) + f.y.powi(3)),
    };
    let c = match kind {
        EquationKind::Mkdv | EquationKind::Kdv => 1.0,
        EquationKind::Nls => -0.5,
        EquationKind::Mzk => 1.0 / 3.0,
        EquationKind::Dnls => -1.0,
    };
    let comb: f64 = v.iter().zip(sig).map(|(&f, &s)| s as f64 * disp(f)).sum();
    c * (comb - disp(xi))
}

/// Sum over every input tuple of a 1D lattice, keeping those whose output lands on it.
fn direct_sum(
    l: Lattice,
    sig: &[i8],
    inputs: &[&LatticeField],
    weight: impl Fn(Freq, &[Freq]) -> Complex64,
) -> Vec<Complex64> {
    let m = l.points;
    let k = sig.len();
    let h = l.spacing();
    let mut out = vec![Complex64::default(); m];
    let mut idx = vec![0usize; k];
    'outer: loop {
        let js: Vec<i64> = idx.iter().map(|&i| i as i64 - (m / 2) as i64).collect();
        let jo: i64 = js.iter().zip(sig).map(|(&j, &s)| s as i64 * j).sum();
        if jo >= -(m as i64 / 2) && jo < m as i64 / 2 {
            let fr: Vec<Freq> = js.iter().map(|&j| Freq::line(j as f64 * h)).collect();
            let xi = Freq::line(jo as f64 * h);
            let mut p = weight(xi, &fr);
            for j in 0..k {
                let v = inputs[j].values[idx[j]];
                p *= if sig[j] < 0 { v.conj() } else { v };
            }
            out[(jo + m as i64 / 2) as usize] += p * h.powi(k as i32 - 1);
        }
        for d in 0..k {
            idx[d] += 1;
            if idx[d] < m {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    out
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn smoothed_operator_matches_direct_sum_for_mkdv() {
    let l = Lattice::line(64, 16.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Mkdv);
    let p = BoundProbe::new(eq, 0).unwrap().with_lattice(l).with_sigma(0.6).with_resonances(true);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_sigma(&refs).unwrap();
    let want = direct_sum(l, &[1, 1, 1], &refs, |xi, v| {
        Complex64::new(0.0, -xi.x) * japanese(phase_from_dispersion(EquationKind::Mkdv, &[1, 1, 1], xi, v)).powf(-0.6)
    });
    let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(max_diff(&got.values, &want) < 1e-10 * scale.max(1.0));
}

#[test]
fn band_operator_matches_direct_sum_for_nls() {
    let l = Lattice::line(64, 32.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Nls);
    let p = BoundProbe::new(eq, 0).unwrap().with_lattice(l).with_band(0.0, 4.0).with_resonances(true);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 10 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_alpha_m(&refs).unwrap();
    let sig = [1, -1, 1];
    let want = direct_sum(l, &sig, &refs, |xi, v| {
        if phase_from_dispersion(EquationKind::Nls, &sig, xi, v).abs() < 4.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::default()
        }
    });
    assert!(max_diff(&got.values, &want) < 1e-10);
}

#[test]
fn quintic_smoothed_operator_matches_direct_sum() {
    let l = Lattice::line(24, 6.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Dnls);
    let p = BoundProbe::new(eq, 1).unwrap().with_lattice(l).with_sigma(0.5).with_resonances(true);
    assert_eq!(p.interaction(), Interaction::DNLS_QUINTIC);
    let u: Vec<LatticeField> = (0..5).map(|i| random_field(l, 20 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_sigma(&refs).unwrap();
    let sig = [1, -1, 1, -1, 1];
    let want = direct_sum(l, &sig, &refs, |xi, v| {
        Complex64::new(0.0, 0.5) * japanese(phase_from_dispersion(EquationKind::Dnls, &sig, xi, v)).powf(-0.5)
    });
    let scale = want.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(max_diff(&got.values, &want) < 1e-10 * scale.max(1.0));
}

#[test]
fn boundary_term_matches_direct_sum() {
    let l = Lattice::line(48, 12.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Nls);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 30 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let (n, t) = (10.0, 0.37);
    let got = boundary_term(&eq, Interaction::NLS, l, &refs, n, t).unwrap();
    let sig = [1, -1, 1];
    let want = direct_sum(l, &sig, &refs, |xi, v| {
        let phi = phase_from_dispersion(EquationKind::Nls, &sig, xi, v);
        if phi.abs() > n {
            Complex64::new(0.0, 1.0) * Complex64::new(0.0, t * phi).exp() / Complex64::new(0.0, phi)
        } else {
            Complex64::default()
        }
    });
    assert!(max_diff(&got.values, &want) < 1e-10);
}

#[test]
fn near_and_far_parts_sum_to_the_full_term() {
    let l = Lattice::line(64, 32.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Mkdv);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 40 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let split = split_resonant(&eq, Interaction::MKDV, l, &refs, 100.0).unwrap();
    let full = direct_sum(l, &[1, 1, 1], &refs, |xi, _| Complex64::new(0.0, -xi.x));
    let sum = split.near.add(&split.far);
    let scale = full.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(max_diff(&sum.values, &full) < 1e-12 * scale);
}

#[test]
fn vanishing_threshold_keeps_only_exact_resonances() {
    let l = Lattice::line(32, 16.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Nls);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 50 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let split = split_resonant(&eq, Interaction::NLS, l, &refs, 1e-12).unwrap();
    let sig = [1, -1, 1];
    let want = direct_sum(l, &sig, &refs, |xi, v| {
        if phase_from_dispersion(EquationKind::Nls, &sig, xi, v) == 0.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::default()
        }
    });
    assert!(max_diff(&split.near.values, &want) < 1e-12);
}

#[test]
fn unit_kernel_is_the_dealiased_product() {
    // Inputs inside a third of the lattice so the padded product cannot alias.
    let l = Lattice::line(64, 32.0).unwrap();
    let cut = l.extent / 3.0;
    let u: Vec<LatticeField> = (0..3)
        .map(|i| {
            let mut f = random_field(l, 60 + i);
            for (j, v) in f.values.iter_mut().enumerate() {
                if l.freq(j).x.abs() > cut {
                    *v = Complex64::default();
                }
            }
            f
        })
        .collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let eq = EquationSpec::new(EquationKind::Nls);
    let kernel = nlsmooth_lab::PhaseKernel::new(eq, Interaction::NLS, nlsmooth_lab::Restriction::Smoothed { sigma: 0.0 })
        .with_unit_symbol();
    let got = nlsmooth_lab::apply_kernel(l, &kernel, &refs).unwrap();
    let fields: Vec<_> = u.iter().map(|f| f.to_fourier().unwrap()).collect();
    let frefs: Vec<_> = fields.iter().collect();
    let prod = dealiased_product(&frefs, &[1, -1, 1]).unwrap();
    let prod = LatticeField::from_fourier(l, &prod).unwrap();
    let h2 = l.spacing().powi(2);
    let want: Vec<Complex64> = prod.values.iter().map(|v| v * h2).collect();
    assert!(max_diff(&got.values, &want) < 1e-10);
}

#[test]
fn single_modes_produce_one_hand_computed_output() {
    let l = Lattice::line(32, 8.0).unwrap();
    let h = l.spacing();
    let eq = EquationSpec::new(EquationKind::Mkdv);
    let p = BoundProbe::new(eq, 0).unwrap().with_lattice(l).with_sigma(0.5);
    let at = |j: i64| {
        let mut f = LatticeField::zeros(l);
        f.values[l.index_of(j, 0).unwrap()] = Complex64::new(1.0, 0.0);
        f
    };
    let (a, b, c) = (at(2), at(3), at(-1));
    let out = p.apply_t_sigma(&[&a, &b, &c]).unwrap();
    let (x1, x2, x3) = (2.0 * h, 3.0 * h, -h);
    let xi = x1 + x2 + x3;
    let phi = 3.0 * (x1 + x2) * (x2 + x3) * (x1 + x3);
    let expected = Complex64::new(0.0, -xi) * japanese(phi).powf(-0.5) * h * h;
    let o = l.index_of(4, 0).unwrap();
    assert!((out.values[o] - expected).norm() < 1e-14);
    let rest: f64 = out.values.iter().enumerate().filter(|&(i, _)| i != o).map(|(_, v)| v.norm()).sum();
    assert_eq!(rest, 0.0);
}

#[test]
fn huge_band_center_empties_the_operator() {
    let l = Lattice::line(32, 16.0).unwrap();
    let p = BoundProbe::new(EquationSpec::new(EquationKind::Nls), 0)
        .unwrap()
        .with_lattice(l)
        .with_band(1e9, 1.0);
    let u = random_field(l, 7);
    assert_eq!(p.apply_t_alpha_m(&[&u, &u, &u]).unwrap().max_abs(), 0.0);
}

#[test]
fn infinite_band_with_unit_symbol_is_plain_convolution() {
    let l = Lattice::line(32, 16.0).unwrap();
    let eq = EquationSpec::new(EquationKind::Nls);
    let k = nlsmooth_lab::PhaseKernel::new(
        eq,
        Interaction::NLS,
        nlsmooth_lab::Restriction::Band {
            alpha: 0.0,
            half_width: f64::INFINITY,
        },
    )
    .with_unit_symbol();
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 70 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = nlsmooth_lab::apply_kernel(l, &k, &refs).unwrap();
    let want = direct_sum(l, &[1, -1, 1], &refs, |_, _| Complex64::new(1.0, 0.0));
    assert!(max_diff(&got.values, &want) < 1e-12);
}
