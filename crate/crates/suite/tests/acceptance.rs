//! End-to-end acceptance runs. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stderr so the verdicts show up without `--nocapture`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Instant;

use nlsmooth_cli::artifacts::{read_json, Envelope, REPORT_FILE};
use nlsmooth_cli::main_with;
use nlsmooth_core::analyzer::{refinement_diagnostic, SmoothingConfig};
use nlsmooth_core::equation::ALL_EQUATIONS;
use nlsmooth_core::gauge::{gauge_forward, gauge_inverse};
use nlsmooth_core::grid::japanese;
use nlsmooth_core::norms::sobolev_norm;
use nlsmooth_core::product::dealiased_product;
use nlsmooth_core::{
    evolve, Complex64, EquationKind, EquationSpec, FourierField, Freq, FrequencyTuple, Interaction, SpectralGrid,
    StepperConfig,
};
use nlsmooth_lab::infr::{boundary_term, InfrScaling};
use nlsmooth_lab::probe::ScalingSweep;
use nlsmooth_lab::{BoundProbe, FeasibilityTable, Lattice, LatticeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: u32, label: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr().lock(), "criterion {n}: {status} {label}: {detail}");
}

/// Runs the CLI into a fresh directory and returns the envelope and wall time.
fn run_cli(args: &[&str]) -> (Envelope, f64, tempfile::TempDir) {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let mut all = vec!["nlsmooth"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--out", out.to_str().unwrap()]);
    let start = Instant::now();
    let code = main_with(all);
    let secs = start.elapsed().as_secs_f64();
    assert_eq!(code, 0, "nlsmooth {args:?} exited with {code}");
    (read_json(&out.join(REPORT_FILE)).unwrap(), secs, tmp)
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn bracket_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|&v| japanese(v).ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    slope(&lx, &ly)
}

#[test]
fn criterion_01_linear_exactness() {
    let mut all = true;
    let mut detail = Vec::new();
    for kind in ALL_EQUATIONS {
        let n = if kind == EquationKind::Mzk { "128" } else { "1024" };
        let (env, secs, _tmp) = run_cli(&["simulate", "--eq", kind.name(), "--linear", "--n", n, "--t-end", "1"]);
        let drift = env.result["max_profile_drift"].as_f64().unwrap();
        let ok = drift < 1e-12 && secs < 10.0;
        all &= ok;
        detail.push(format!("{kind} drift {drift:.1e} in {secs:.2}s"));
    }
    verdict(1, "linear flow leaves the profile fixed", all, &detail.join(", "));
    assert!(all, "{detail:?}");
}

fn soliton(grid: SpectralGrid, t: f64) -> FourierField {
    let c = grid.box_length / 2.0;
    let vals: Vec<Complex64> = grid
        .positions()
        .iter()
        .map(|x| Complex64::from_polar(2f64.sqrt() / (x.x - c).cosh(), t))
        .collect();
    FourierField::from_physical(grid, &vals).unwrap()
}

#[test]
fn criterion_02_integrator_order() {
    let start = Instant::now();
    let g = SpectralGrid::line(64.0, 1024).unwrap();
    let eq = EquationSpec::new(EquationKind::Nls);
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let traj = evolve(&soliton(g, 0.0), &eq, &StepperConfig::new(dt, 1.0).with_samples(1)).unwrap();
            sobolev_norm(&traj.last().solution().sub(&soliton(g, 1.0)).unwrap(), 0.0)
        })
        .collect();
    let lx: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let order = slope(&lx, &ly);
    let secs = start.elapsed().as_secs_f64();
    let pass = (order - 4.0).abs() <= 0.3 && errs[2] < 1e-6 && secs < 60.0;
    verdict(
        2,
        "soliton error order",
        pass,
        &format!("slope {order:.3}, error at dt=1e-3 {:.2e}, {secs:.1}s", errs[2]),
    );
    assert!(pass, "{errs:?}");
}

/// Dispersion relation of each linear part.
fn dispersion(kind: EquationKind, xi: Freq) -> f64 {
    match kind {
        EquationKind::Mkdv | EquationKind::Kdv => -xi.x.powi(3),
        EquationKind::Nls | EquationKind::Dnls => xi.x * xi.x,
        EquationKind::Mzk => -(xi.x.powi(3) + xi.y.powi(3)),
    }
}

/// Constant relating each closed phase to the raw dispersion combination.
fn phase_constant(kind: EquationKind) -> f64 {
    match kind {
        EquationKind::Mkdv | EquationKind::Kdv => 1.0,
        EquationKind::Nls => -0.5,
        EquationKind::Mzk => 1.0 / 3.0,
        EquationKind::Dnls => -1.0,
    }
}

#[test]
fn criterion_03_phase_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for kind in ALL_EQUATIONS {
        let eq = EquationSpec::new(kind);
        let c = phase_constant(kind);
        for term in eq.interactions() {
            for _ in 0..10_000 {
                let inputs: Vec<Freq> = (0..term.degree())
                    .map(|_| {
                        let y = if kind == EquationKind::Mzk { rng.random_range(-50.0..50.0) } else { 0.0 };
                        Freq::new(rng.random_range(-50.0..50.0), y)
                    })
                    .collect();
                let tuple = FrequencyTuple::from_inputs(inputs, term.signature);
                let combo: f64 = tuple
                    .inputs
                    .iter()
                    .zip(term.signature)
                    .map(|(&v, &s)| s as f64 * dispersion(kind, v))
                    .sum::<f64>()
                    - dispersion(kind, tuple.output);
                let scale = tuple.inputs.iter().map(|&v| dispersion(kind, v).abs()).sum::<f64>()
                    + dispersion(kind, tuple.output).abs();
                let closed = eq.phase(term, &tuple).unwrap();
                worst = worst.max((closed - c * combo).abs() / scale.max(1.0));
            }
        }
    }
    let mut worst_factor = 0.0f64;
    for _ in 0..10_000 {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-100.0..100.0)).collect();
        let xi = v[0] - v[1] + v[2];
        let lhs = xi * xi - v[0] * v[0] + v[1] * v[1] - v[2] * v[2];
        let rhs = 2.0 * (v[1] - v[0]) * (v[1] - v[2]);
        worst_factor = worst_factor.max((lhs - rhs).abs() / (v.iter().map(|x| x * x).sum::<f64>() + xi * xi));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-9 && worst_factor <= 1e-9 && secs < 5.0;
    verdict(
        3,
        "closed phases",
        pass,
        &format!("worst relative {worst:.1e}, factorization {worst_factor:.1e}, {secs:.2}s"),
    );
    assert!(pass);
}

#[test]
fn criterion_04_gauge_round_trip() {
    let start = Instant::now();
    let g = SpectralGrid::line(40.0, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let bumps: Vec<(f64, f64, Complex64)> = (0..4)
            .map(|_| {
                (
                    rng.random_range(5.0..35.0),
                    rng.random_range(0.5..3.0),
                    Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
                )
            })
            .collect();
        let u: Vec<Complex64> = g
            .positions()
            .iter()
            .map(|x| bumps.iter().map(|&(c, w, a)| a * (-((x.x - c) / w).powi(2)).exp()).sum())
            .collect();
        let back = gauge_inverse(&g, &gauge_forward(&g, &u).unwrap()).unwrap();
        worst = worst.max(back.iter().zip(&u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst < 1e-10 && secs < 1.0;
    verdict(4, "gauge round trip", pass, &format!("max error {worst:.1e}, {secs:.3}s"));
    assert!(pass);
}

struct GainRun {
    env: Envelope,
    secs: f64,
}

fn gain_run(eq: &str, s: &str, extra: &[&str]) -> GainRun {
    let mut args = vec!["smoothing", "--eq", eq, "--s", s];
    args.extend_from_slice(extra);
    let (env, secs, _tmp) = run_cli(&args);
    GainRun { env, secs }
}

fn judge_gain(run: &GainRun, min: f64, limit_secs: f64) {
    let report = &run.env.result["smoothing"];
    let gains: Vec<f64> = report["seeds"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|o| o["eps_hat"].as_f64())
        .collect();
    let mean = if gains.is_empty() {
        f64::NAN
    } else {
        gains.iter().sum::<f64>() / gains.len() as f64
    };
    let eps_th = report["eps_th"].as_f64().unwrap();
    let pass = gains.len() == 8 && mean >= min && run.secs < limit_secs;
    verdict(
        5,
        &format!("{} s={} gain", run.env.equation, report["s"]),
        pass,
        &format!(
            "mean {mean:.3} over {} seeds (theory {eps_th}, need >= {min}), {:.0}s of {:.0}s",
            gains.len(),
            run.secs,
            limit_secs
        ),
    );
    assert!(pass, "gains {gains:?}");
}

fn smoothing_case(eq: &str, s: &str, min: f64, limit_secs: f64) {
    judge_gain(&gain_run(eq, s, &[]), min, limit_secs);
}

#[test]
fn criterion_05a_nls_gain() {
    smoothing_case("nls", "0.3", 0.40, 300.0);
}

#[test]
fn criterion_05b_mkdv_gain() {
    smoothing_case("mkdv", "0.5", 0.33, 600.0);
}

#[test]
fn criterion_05c_mkdv_gain_near_one() {
    smoothing_case("mkdv", "0.75", 0.60, 600.0);
}

/// The weighted KdV run is shared with the persistence monitor.
fn kdv_run() -> &'static GainRun {
    static RUN: OnceLock<GainRun> = OnceLock::new();
    RUN.get_or_init(|| gain_run("kdv", "0.5", &["--weighted", "true"]))
}

#[test]
fn criterion_05d_kdv_gain() {
    judge_gain(kdv_run(), 0.33, 300.0);
}

#[test]
fn criterion_05e_dnls_gain() {
    smoothing_case("dnls", "0.75", 0.30, 600.0);
}

#[test]
fn criterion_05f_mzk_gain() {
    smoothing_case("mzk", "1.75", 0.25, 1800.0);
}

#[test]
fn criterion_06_refinement() {
    let cfg = SmoothingConfig::defaults(EquationKind::Nls, 0.3);
    let start = Instant::now();
    let table = refinement_diagnostic(&cfg, &[0.3, 0.9], 2048, 4096).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let low = table.ratio_at(0.3).unwrap();
    let high = table.ratio_at(0.9).unwrap();
    let pass = (0.9..=1.1).contains(&low) && high >= 1.2 && secs < 600.0;
    verdict(6, "refinement ratios", pass, &format!("R(0.3) {low:.3}, R(0.9) {high:.3}, {secs:.0}s"));
    assert!(pass);
}

fn band_sweep(eq: &str, extra: &[&str]) -> (ScalingSweep, f64) {
    let mut args = vec!["bounds", "--eq", eq, "--kind", "alphaM", "--s", "0", "--cell-points", "3"];
    args.extend_from_slice(extra);
    let (env, secs, _tmp) = run_cli(&args);
    (serde_json::from_value(env.result).unwrap(), secs)
}

const WIDTHS: &str = "1,2,4,8,16,32,64";
const ALPHAS: &str = "0,1,2,4,8,16,32,64";

#[test]
fn criterion_07_band_scaling() {
    let (nls, t1) = band_sweep("nls", &["--M", WIDTHS, "--alpha", ALPHAS]);
    let (dnls, t2) = band_sweep("dnls", &["--term", "0", "--alpha", ALPHAS]);
    let rows_fit = |rows: &[nlsmooth_lab::probe::BandRow], x: fn(&nlsmooth_lab::probe::BandRow) -> f64| {
        let xs: Vec<f64> = rows.iter().map(x).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.lower).collect();
        assert!(ys.iter().all(|&y| y > 0.0), "empty band in {ys:?}");
        bracket_slope(&xs, &ys)
    };
    let beta = rows_fit(&nls.width_rows, |r| r.half_width);
    let gamma = rows_fit(&nls.alpha_rows, |r| r.alpha);
    let gamma_dnls = rows_fit(&dnls.alpha_rows, |r| r.alpha);
    assert_eq!(nls.probe.half_width, 4.0);
    assert!((nls.width_fit.unwrap().exponent - beta).abs() < 1e-9);
    let secs = t1 + t2;
    let pass = beta <= 0.65 && gamma <= 0.15 && gamma_dnls <= 0.35 && secs < 900.0;
    verdict(
        7,
        "band operator exponents",
        pass,
        &format!("NLS M-exponent {beta:.3}, NLS alpha-exponent {gamma:.3}, dNLS alpha-exponent {gamma_dnls:.3}, {secs:.0}s"),
    );
    assert!(pass);
}

fn feasibility(eq: &str, s_grid: &str) -> (FeasibilityTable, f64) {
    let (env, secs, _tmp) = run_cli(&[
        "bounds", "--eq", eq, "--kind", "sigma", "--s-grid", s_grid, "--eps-grid", "0,0.5,1.0,1.5", "--sigma-grid",
        "0.9", "--mf", "64",
    ]);
    (serde_json::from_value(env.result).unwrap(), secs)
}

#[test]
fn criterion_08_feasibility() {
    let mut pass = true;
    let mut detail = Vec::new();
    let mut secs = 0.0;
    for (eq, grid) in [("nls", "0.2,0.3,0.4,0.5"), ("mkdv", "0.4,0.5,0.6,0.75")] {
        let (table, t) = feasibility(eq, grid);
        secs += t;
        assert_eq!(table.doubled_lattice.points, 2 * table.probe.lattice.points);
        let mut wrong = Vec::new();
        let mut judged = 0;
        for c in &table.cells {
            let eps_th = c.eps_th.unwrap();
            let want = if c.eps < eps_th {
                true
            } else if c.eps >= eps_th + 0.3 - 1e-12 {
                false
            } else {
                continue;
            };
            judged += 1;
            let bounded = c.growth < table.growth_threshold;
            if bounded != want {
                wrong.push(format!("s={} eps={} growth {:.2}", c.s, c.eps, c.growth));
            }
        }
        pass &= wrong.is_empty();
        detail.push(format!("{eq}: {}/{judged} cells as expected {wrong:?}", judged - wrong.len()));
    }
    pass &= secs < 1200.0;
    verdict(8, "bounded and unbounded cells", pass, &format!("{}, {secs:.0}s", detail.join("; ")));
    assert!(pass);
}

const INFR_ARGS: [&str; 9] = ["infr", "--eq", "nls", "--s", "0.3", "--sigma", "0.6", "--eps", "0.3"];

#[test]
fn criterion_09_infr_scalings() {
    let (env, secs, _tmp) = run_cli(&INFR_ARGS);
    let scaling: InfrScaling = serde_json::from_value(env.result).unwrap();
    let upper: Vec<_> = scaling.rows[scaling.rows.len() / 2..].to_vec();
    let xs: Vec<f64> = upper.iter().map(|r| r.threshold).collect();
    let boundary = bracket_slope(&xs, &upper.iter().map(|r| r.boundary).collect::<Vec<_>>());
    let near = bracket_slope(&xs, &upper.iter().map(|r| r.near).collect::<Vec<_>>());
    let target = -(1.0 - 0.6);
    let pass = (boundary - target).abs() <= 0.15 && near <= 0.6 + 0.15 && secs < 600.0;
    verdict(
        9,
        "normal form slopes",
        pass,
        &format!("boundary {boundary:.3} (target {target} +- 0.15), near {near:.3} (need <= 0.75), {secs:.0}s"),
    );
    assert!(pass);
}

fn random_field(l: Lattice, seed: u64) -> LatticeField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    LatticeField::from_fn(l, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn lattice_phase(kind: EquationKind, sig: &[i8], xi: Freq, v: &[Freq]) -> f64 {
    let comb: f64 = v.iter().zip(sig).map(|(&f, &s)| s as f64 * dispersion(kind, f)).sum();
    phase_constant(kind) * (comb - dispersion(kind, xi))
}

/// Sum over every input tuple of a 1D lattice, keeping those whose output lands on it.
fn lattice_sum(l: Lattice, sig: &[i8], inputs: &[&LatticeField], weight: impl Fn(Freq, &[Freq]) -> Complex64) -> Vec<Complex64> {
    let m = l.points as i64;
    let h = l.spacing();
    let k = sig.len();
    let mut out = vec![Complex64::default(); l.points];
    let mut idx = vec![0i64; k];
    loop {
        let js: Vec<i64> = idx.iter().map(|&i| i - m / 2).collect();
        let jo: i64 = js.iter().zip(sig).map(|(&j, &s)| s as i64 * j).sum();
        if (-m / 2..m / 2).contains(&jo) {
            let fr: Vec<Freq> = js.iter().map(|&j| Freq::line(j as f64 * h)).collect();
            let mut p = weight(Freq::line(jo as f64 * h), &fr);
            for j in 0..k {
                let v = inputs[j].values[idx[j] as usize];
                p *= if sig[j] < 0 { v.conj() } else { v };
            }
            out[(jo + m / 2) as usize] += p * h.powi(k as i32 - 1);
        }
        let mut d = 0;
        while d < k {
            idx[d] += 1;
            if idx[d] < m {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
        if d == k {
            return out;
        }
    }
}

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

#[test]
fn criterion_10_oracle_equivalences() {
    let start = Instant::now();
    let mut errs = BTreeMap::new();

    let g = SpectralGrid::line(2.0 * std::f64::consts::PI, 64).unwrap();
    let fields: Vec<FourierField> = (0..3)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + i);
            let vals: Vec<Complex64> =
                (0..64).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let mut f = FourierField::from_physical(g, &vals).unwrap();
            f.dealias();
            f
        })
        .collect();
    let mut worst = 0.0f64;
    for sig in [&[1i8, -1, 1][..], &[1, 1, 1][..], &[1, -1][..]] {
        let refs: Vec<&FourierField> = fields[..sig.len()].iter().collect();
        let fast = dealiased_product(&refs, sig).unwrap();
        let mut slow = vec![Complex64::default(); g.len()];
        let n = g.modes as i64;
        let mut idx = vec![-n / 2; sig.len()];
        'tuples: loop {
            let jo: i64 = idx.iter().zip(sig).map(|(&j, &s)| s as i64 * j).sum();
            if (-n / 2..n / 2).contains(&jo) {
                let out = g.slot(jo, 0).unwrap();
                if g.retained(g.freq(out)) {
                    let mut p = Complex64::new(1.0, 0.0);
                    for ((f, &j), &s) in refs.iter().zip(&idx).zip(sig) {
                        let c = f.coeffs[g.slot(j, 0).unwrap()];
                        p *= if s < 0 { c.conj() } else { c };
                    }
                    slow[out] += p;
                }
            }
            for j in idx.iter_mut() {
                *j += 1;
                if *j < n / 2 {
                    continue 'tuples;
                }
                *j = -n / 2;
            }
            break;
        }
        worst = worst.max(rel_diff(&fast.coeffs, &slow));
    }
    errs.insert("dealiased_product", worst);

    let l = Lattice::line(64, 16.0).unwrap();
    let p = BoundProbe::new(EquationSpec::new(EquationKind::Mkdv), 0)
        .unwrap()
        .with_lattice(l)
        .with_sigma(0.6)
        .with_resonances(true);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_sigma(&refs).unwrap();
    let want = lattice_sum(l, &[1, 1, 1], &refs, |xi, v| {
        Complex64::new(0.0, -xi.x) * japanese(lattice_phase(EquationKind::Mkdv, &[1, 1, 1], xi, v)).powf(-0.6)
    });
    errs.insert("apply_T_sigma mkdv", rel_diff(&got.values, &want));

    let l = Lattice::line(64, 32.0).unwrap();
    let p = BoundProbe::new(EquationSpec::new(EquationKind::Nls), 0)
        .unwrap()
        .with_lattice(l)
        .with_band(3.0, 4.0)
        .with_resonances(true);
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 10 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_alpha_m(&refs).unwrap();
    let sig = [1, -1, 1];
    let want = lattice_sum(l, &sig, &refs, |xi, v| {
        if (lattice_phase(EquationKind::Nls, &sig, xi, v) - 3.0).abs() < 4.0 {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::default()
        }
    });
    errs.insert("apply_T_alpha_M nls", rel_diff(&got.values, &want));

    let l = Lattice::line(48, 12.0).unwrap();
    let u: Vec<LatticeField> = (0..3).map(|i| random_field(l, 30 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let (thr, t) = (10.0, 0.37);
    let got = boundary_term(&EquationSpec::new(EquationKind::Nls), Interaction::NLS, l, &refs, thr, t).unwrap();
    let want = lattice_sum(l, &sig, &refs, |xi, v| {
        let phi = lattice_phase(EquationKind::Nls, &sig, xi, v);
        if phi.abs() > thr {
            Complex64::new(0.0, 1.0) * Complex64::new(0.0, t * phi).exp() / Complex64::new(0.0, phi)
        } else {
            Complex64::default()
        }
    });
    errs.insert("boundary_term nls", rel_diff(&got.values, &want));

    let l = Lattice::line(24, 6.0).unwrap();
    let p = BoundProbe::new(EquationSpec::new(EquationKind::Dnls), 1)
        .unwrap()
        .with_lattice(l)
        .with_sigma(0.5)
        .with_resonances(true);
    let u: Vec<LatticeField> = (0..5).map(|i| random_field(l, 20 + i)).collect();
    let refs: Vec<&LatticeField> = u.iter().collect();
    let got = p.apply_t_sigma(&refs).unwrap();
    let sig5 = [1, -1, 1, -1, 1];
    let want = lattice_sum(l, &sig5, &refs, |xi, v| {
        Complex64::new(0.0, 0.5) * japanese(lattice_phase(EquationKind::Dnls, &sig5, xi, v)).powf(-0.5)
    });
    errs.insert("apply_T_sigma dnls quintic", rel_diff(&got.values, &want));

    let secs = start.elapsed().as_secs_f64();
    let pass = errs.values().all(|&e| e < 1e-10) && secs < 300.0;
    let detail: Vec<String> = errs.iter().map(|(k, v)| format!("{k} {v:.1e}")).collect();
    verdict(10, "direct summation oracles", pass, &format!("{}, {secs:.1}s", detail.join(", ")));
    assert!(pass);
}

#[test]
fn criterion_11_kdv_persistence() {
    let env = &kdv_run().env;
    let ratios: Vec<f64> = env.result["smoothing"]["seeds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["persistence"].as_f64().unwrap_or(f64::INFINITY))
        .collect();
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let pass = ratios.len() == 8 && max <= 5.0;
    verdict(11, "weighted norm persistence", pass, &format!("max ratio {max:.3} over {} KdV seeds", ratios.len()));
    assert!(pass);
}

fn run_with_workers(args: &[&str], workers: &str, out: &Path) {
    let mut all = vec!["nlsmooth"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["--workers", workers, "--out", out.to_str().unwrap()]);
    assert_eq!(main_with(all), 0, "nlsmooth {args:?} with {workers} workers");
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_12_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let band: Vec<&str> =
        vec!["bounds", "--eq", "nls", "--kind", "alphaM", "--s", "0", "--cell-points", "3", "--M", WIDTHS, "--alpha", ALPHAS];
    let runs: [(&str, &[&str]); 3] = [
        ("infr", &INFR_ARGS),
        ("band", &band),
        ("linear", &["simulate", "--eq", "mzk", "--linear", "--n", "128", "--t-end", "1"]),
    ];
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for (name, args) in runs {
        let one = tmp.path().join(format!("{name}-1"));
        let eight = tmp.path().join(format!("{name}-8"));
        run_with_workers(args, "1", &one);
        run_with_workers(args, "8", &eight);
        let a = csv_files(&one);
        let b = csv_files(&eight);
        assert_eq!(a.len(), b.len());
        assert!(!a.is_empty());
        for (x, y) in a.iter().zip(&b) {
            compared += 1;
            if fs::read(x).unwrap() != fs::read(y).unwrap() {
                mismatched.push(x.display().to_string());
            }
        }
    }
    let pass = mismatched.is_empty();
    verdict(12, "worker count independence", pass, &format!("{compared} CSV files compared, mismatches {mismatched:?}"));
    assert!(pass);
}
