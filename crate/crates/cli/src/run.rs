//! Executes a resolved plan on a worker pool and writes its artifacts.

use std::path::Path;

use serde::Serialize;

use nlsmooth_core::analyzer::{estimate_gain, refinement_diagnostic, RefinementTable, SmoothingReport};
use nlsmooth_core::evolution::Trajectory;
use nlsmooth_core::norms::sobolev_norm;
use nlsmooth_core::rough::{generate, generate_weighted, RoughDataSpec, Symmetry};
use nlsmooth_core::{evolve, Dim, EquationKind, FourierField};
use nlsmooth_lab::probe::FeasibilityCell;
use nlsmooth_lab::{
    sweep_m_scaling, sweep_sigma_bound, verify_norm_scalings, verify_scalings, EstimateOptions, FeasibilityTable,
    InfrScaling, OperatorKind, ScalingSweep,
};

use crate::artifacts::{self, Check, Envelope, Meta};
use crate::config::{BoundsPlan, InfrPlan, Plan, SimulatePlan, SmoothingPlan};
use crate::error::{CliError, CliResult};
use crate::thresholds;

pub const LINEAR_TOL: f64 = 1e-12;

/// Everything one experiment produced, held in memory until the orchestrator writes it.
struct Output {
    checks: Vec<Check>,
    result: serde_json::Value,
    tables: Vec<(&'static str, Table)>,
}

enum Table {
    Samples(Vec<SampleRow>),
    Spectrum(Vec<SpectrumRow>),
    Seeds(Vec<SeedRow>),
    Ladder(Vec<nlsmooth_core::analyzer::LadderRow>),
    Refinement(Vec<RefinementCsvRow>),
    Band(Vec<BandCsvRow>),
    Feasibility(Vec<FeasibilityCell>),
    Infr(Vec<nlsmooth_lab::infr::InfrRow>),
}

#[derive(Serialize)]
struct SampleRow {
    time: f64,
    l2: f64,
    hs: f64,
    profile_drift: f64,
}

#[derive(Serialize)]
struct SpectrumRow {
    xi_x: f64,
    xi_y: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SeedRow {
    seed: u64,
    eps_hat: Option<f64>,
    u0_slope: Option<f64>,
    u0_r2: Option<f64>,
    w_slope: Option<f64>,
    w_r2: Option<f64>,
    persistence: Option<f64>,
    flags: String,
    failure: String,
}

#[derive(Serialize)]
struct RefinementCsvRow {
    eps: f64,
    ratio: f64,
    norm_coarse_mean: f64,
    norm_fine_mean: f64,
}

#[derive(Serialize)]
struct BandCsvRow {
    sweep: &'static str,
    alpha: f64,
    half_width: f64,
    lower: f64,
    upper: f64,
}

/// Runs `plan` with `workers` threads (all cores when `None`), writes the report
/// and tables into `dir`, and returns the envelope.
pub fn execute(plan: &Plan, dir: &Path, workers: Option<usize>, force: bool) -> CliResult<Envelope> {
    artifacts::prepare_dir(dir, force)?;
    let hash = plan.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Validation(vec![format!("worker pool: {e}")]))?;
    let output = pool.install(|| match plan {
        Plan::Simulate(p) => simulate(p),
        Plan::Smoothing(p) => smoothing(p, &hash),
        Plan::Bounds(p) => bounds(p),
        Plan::Infr(p) => infr(p),
    })?;
    let meta = Meta {
        config_hash: hash,
        version: artifacts::VERSION.into(),
        grid: plan.grid_metadata(),
    };
    for (name, table) in &output.tables {
        match table {
            Table::Samples(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Spectrum(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Seeds(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Ladder(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Refinement(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Band(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Feasibility(r) => artifacts::write_csv(dir, name, &meta, r),
            Table::Infr(r) => artifacts::write_csv(dir, name, &meta, r),
        }?;
    }
    let envelope = Envelope {
        kind: plan.experiment().name().into(),
        equation: plan.equation().kind.name().into(),
        meta,
        plan: serde_json::to_value(plan)?,
        checks: output.checks,
        result: output.result,
    };
    artifacts::write_json(dir, &envelope)?;
    Ok(envelope)
}

fn profile_drift(traj: &Trajectory, i: usize) -> f64 {
    traj.states[i].profile.max_abs_diff(&traj.initial().profile)
}

fn simulate(p: &SimulatePlan) -> CliResult<Output> {
    let sym = if p.equation.kind.is_real() {
        Symmetry::Real
    } else {
        Symmetry::Complex
    };
    let mut spec = RoughDataSpec::new(p.s, p.seed, sym).with_amplitude(p.amplitude);
    spec.margin = p.margin;
    let u0 = if p.weighted {
        generate_weighted(&spec, &p.grid, p.s / 2.0)?
    } else {
        generate(&spec, &p.grid)?
    };
    let traj = evolve(&u0, &p.equation, &p.stepper)?;
    let samples: Vec<SampleRow> = traj
        .states
        .iter()
        .enumerate()
        .map(|(i, st)| {
            let u = st.solution();
            SampleRow {
                time: st.time,
                l2: sobolev_norm(&u, 0.0),
                hs: sobolev_norm(&u, p.s),
                profile_drift: profile_drift(&traj, i),
            }
        })
        .collect();
    let max_drift = samples.iter().map(|r| r.profile_drift).fold(0.0, f64::max);
    let mut checks = Vec::new();
    if p.equation.coupling == 0.0 {
        checks.push(Check {
            name: "linear_exactness".into(),
            value: max_drift,
            threshold: format!("< {LINEAR_TOL:e}"),
            pass: max_drift < LINEAR_TOL,
        });
    }
    let last = traj.last().solution();
    let result = serde_json::json!({
        "final_time": traj.last().time,
        "max_profile_drift": max_drift,
        "max_step_growth": traj.max_step_growth,
    });
    Ok(Output {
        checks,
        result,
        tables: vec![("samples.csv", Table::Samples(samples)), ("final_spectrum.csv", Table::Spectrum(spectrum_rows(&last)))],
    })
}

fn spectrum_rows(f: &FourierField) -> Vec<SpectrumRow> {
    (0..f.len())
        .map(|slot| {
            let xi = f.grid.freq(slot);
            let c = f.coeffs[slot];
            SpectrumRow {
                xi_x: xi.x,
                xi_y: if f.grid.dim == Dim::Two { xi.y } else { 0.0 },
                re: c.re,
                im: c.im,
            }
        })
        .collect()
}

pub fn smoothing_checks(report: &SmoothingReport) -> Vec<Check> {
    let mut checks = Vec::new();
    let kind: EquationKind = report.config.equation.kind;
    if let Some(mean) = report.eps_hat_mean {
        let min = thresholds::smoothing_min(kind, report.s, report.eps_th);
        checks.push(Check::at_least("eps_hat_mean", mean, min));
    } else {
        checks.push(Check {
            name: "eps_hat_mean".into(),
            value: 0.0,
            threshold: "defined".into(),
            pass: false,
        });
    }
    if let Some(p) = report.max_persistence() {
        checks.push(Check::at_most("persistence_ratio", p, thresholds::PERSISTENCE_MAX));
    }
    checks
}

pub fn refinement_checks(table: &RefinementTable, eps_th: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for row in &table.rows {
        let name = format!("refinement_ratio@{}", row.eps);
        if row.eps <= eps_th / 2.0 {
            checks.push(Check::within(&name, row.ratio, thresholds::REFINE_FLAT.0, thresholds::REFINE_FLAT.1));
        } else if row.eps >= eps_th + thresholds::UNBOUNDED_MARGIN {
            checks.push(Check::at_least(&name, row.ratio, thresholds::REFINE_GROWTH));
        }
    }
    checks
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn smoothing(p: &SmoothingPlan, hash: &str) -> CliResult<Output> {
    let mut report = estimate_gain(&p.config)?;
    report.config_hash = hash.to_string();
    let mut checks = smoothing_checks(&report);
    let seeds = report
        .seeds
        .iter()
        .map(|o| SeedRow {
            seed: o.seed,
            eps_hat: o.eps_hat,
            u0_slope: o.u0_fit.as_ref().map(|f| f.slope),
            u0_r2: o.u0_fit.as_ref().map(|f| f.r2),
            w_slope: o.w_fit.as_ref().map(|f| f.slope),
            w_r2: o.w_fit.as_ref().map(|f| f.r2),
            persistence: o.persistence,
            flags: o.flags.join("; "),
            failure: o.failure.clone().unwrap_or_default(),
        })
        .collect();
    let mut tables = vec![("seeds.csv", Table::Seeds(seeds)), ("ladder.csv", Table::Ladder(report.ladder.clone()))];
    let mut refinement = None;
    if let Some((coarse, fine)) = p.refine {
        let table = refinement_diagnostic(&p.config, &p.refine_eps, coarse, fine)?;
        checks.extend(refinement_checks(&table, report.eps_th));
        let rows = table
            .rows
            .iter()
            .map(|r| RefinementCsvRow {
                eps: r.eps,
                ratio: r.ratio,
                norm_coarse_mean: mean(&r.norm_coarse),
                norm_fine_mean: mean(&r.norm_fine),
            })
            .collect();
        tables.push(("refinement.csv", Table::Refinement(rows)));
        refinement = Some(table);
    }
    let result = serde_json::json!({ "smoothing": report, "refinement": refinement });
    Ok(Output { checks, result, tables })
}

pub fn band_checks(sweep: &ScalingSweep) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(f) = sweep.width_fit {
        checks.push(Check::at_most("width_exponent", f.exponent, thresholds::WIDTH_EXPONENT_MAX));
    }
    if let Some(f) = sweep.alpha_fit {
        let max = thresholds::alpha_exponent_max(sweep.probe.equation.kind);
        checks.push(Check::at_most("alpha_exponent", f.exponent, max));
    }
    checks
}

/// Cells well below the threshold must stay bounded, cells `0.3` or more above
/// it must grow; the strip in between is not judged.
pub fn feasibility_checks(table: &FeasibilityTable) -> Vec<Check> {
    let mut checks = Vec::new();
    let mut seen: Vec<(u64, u64)> = Vec::new();
    for c in &table.cells {
        let key = (c.s.to_bits(), c.eps.to_bits());
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let Some(eps_th) = c.eps_th else { continue };
        let bounded = table.bounded(c.s, c.eps).unwrap_or(false);
        let growth = table
            .cells
            .iter()
            .filter(|d| d.s == c.s && d.eps == c.eps)
            .map(|d| d.growth)
            .fold(f64::INFINITY, f64::min);
        let name = format!("cell s={} eps={}", c.s, c.eps);
        if c.eps < eps_th {
            checks.push(Check {
                name,
                value: growth,
                threshold: format!("bounded (growth < {})", table.growth_threshold),
                pass: bounded,
            });
        } else if c.eps >= eps_th + thresholds::UNBOUNDED_MARGIN - 1e-12 {
            checks.push(Check {
                name,
                value: growth,
                threshold: format!("unbounded (growth >= {})", table.growth_threshold),
                pass: !bounded,
            });
        }
    }
    checks
}

fn bounds(p: &BoundsPlan) -> CliResult<Output> {
    match p.operator {
        OperatorKind::Band => {
            let sweep = if p.widths.is_empty() && p.alphas.is_empty() {
                let e = p.probe.estimate_norm(OperatorKind::Band)?;
                ScalingSweep {
                    probe: p.probe,
                    width_rows: vec![nlsmooth_lab::probe::BandRow {
                        alpha: p.probe.alpha,
                        half_width: p.probe.half_width,
                        lower: e.lower,
                        upper: e.upper,
                    }],
                    alpha_rows: Vec::new(),
                    width_fit: None,
                    alpha_fit: None,
                    flags: Vec::new(),
                }
            } else {
                sweep_m_scaling(&p.probe, &p.widths, &p.alphas)?
            };
            let rows = sweep
                .width_rows
                .iter()
                .map(|r| ("M", r))
                .chain(sweep.alpha_rows.iter().map(|r| ("alpha", r)))
                .map(|(sweep, r)| BandCsvRow {
                    sweep,
                    alpha: r.alpha,
                    half_width: r.half_width,
                    lower: r.lower,
                    upper: r.upper,
                })
                .collect();
            Ok(Output {
                checks: band_checks(&sweep),
                result: serde_json::to_value(&sweep)?,
                tables: vec![("band.csv", Table::Band(rows))],
            })
        }
        OperatorKind::Smoothed => {
            let table = sweep_sigma_bound(&p.probe, &p.s_grid, &p.eps_grid, &p.sigma_grid)?;
            Ok(Output {
                checks: feasibility_checks(&table),
                result: serde_json::to_value(&table)?,
                tables: vec![("feasibility.csv", Table::Feasibility(table.cells.clone()))],
            })
        }
    }
}

pub fn infr_checks(scaling: &InfrScaling) -> Vec<Check> {
    let sigma = scaling.config.sigma;
    let mut checks = Vec::new();
    if let Some(f) = scaling.boundary_fit {
        let target = -(1.0 - sigma);
        checks.push(Check::within(
            "boundary_slope",
            f.exponent,
            target - thresholds::INFR_SLOPE_TOL,
            target + thresholds::INFR_SLOPE_TOL,
        ));
    }
    if let Some(f) = scaling.near_fit {
        checks.push(Check::at_most("near_slope", f.exponent, sigma + thresholds::INFR_SLOPE_TOL));
    }
    checks
}

fn infr(p: &InfrPlan) -> CliResult<Output> {
    let scaling = if p.operator_norm {
        let opts = EstimateOptions {
            seed: p.seed,
            ..EstimateOptions::default()
        };
        verify_norm_scalings(&p.equation, &p.config, &p.thresholds, p.lattice, &opts)?
    } else {
        verify_scalings(&p.equation, &p.config, &p.thresholds, p.lattice, p.ensemble, p.seed)?
    };
    Ok(Output {
        checks: infr_checks(&scaling),
        result: serde_json::to_value(&scaling)?,
        tables: vec![("infr.csv", Table::Infr(scaling.rows.clone()))],
    })
}
