//! Experiment configuration: a TOML tree with every key optional, overridden by
//! command-line flags, resolved into a concrete plan and hashed canonically.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nlsmooth_core::analyzer::SmoothingConfig;
use nlsmooth_core::{Dim, EquationKind, EquationSpec, Sign, SpectralGrid, StepperConfig};
use nlsmooth_lab::{BoundProbe, InfrConfig, Lattice, OperatorKind};

use crate::error::{CliError, CliResult};

pub const OUTPUT_ENV: &str = "NLSMOOTH_OUTPUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Simulate,
    Smoothing,
    Bounds,
    Infr,
    Report,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Smoothing => "smoothing",
            Experiment::Bounds => "bounds",
            Experiment::Infr => "infr",
            Experiment::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationTable {
    pub kind: Option<String>,
    pub sign: Option<Sign>,
    pub coupling: Option<f64>,
    pub renormalize: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridTable {
    pub box_length: Option<f64>,
    pub modes: Option<usize>,
    pub dealias_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataTable {
    pub s: Option<f64>,
    pub amplitude: Option<f64>,
    pub margin: Option<f64>,
    pub weighted: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperTable {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    /// Switch the nonlinearity off.
    pub linear: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedTable {
    pub start: Option<u64>,
    pub count: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingTable {
    /// Coarse and fine mode counts for the refinement ratios.
    pub refine: Option<Vec<usize>>,
    pub refine_eps: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeTable {
    pub points: Option<usize>,
    pub extent: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsTable {
    pub operator: Option<String>,
    pub term: Option<usize>,
    pub eps: Option<f64>,
    pub sigma: Option<f64>,
    pub alpha: Option<Vec<f64>>,
    #[serde(rename = "M")]
    pub widths: Option<Vec<f64>>,
    pub s_grid: Option<Vec<f64>>,
    pub eps_grid: Option<Vec<f64>>,
    pub sigma_grid: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub iterations: Option<usize>,
    pub keep_resonant: Option<bool>,
    pub cell_points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfrTable {
    pub sigma: Option<f64>,
    pub eps: Option<f64>,
    #[serde(rename = "N")]
    pub thresholds: Option<Vec<f64>>,
    pub ensemble: Option<usize>,
    /// Replace the random ensemble by estimated operator norms.
    pub operator_norm: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
    pub equation: EquationTable,
    pub grid: GridTable,
    pub data: DataTable,
    pub stepper: StepperTable,
    pub seeds: SeedTable,
    pub smoothing: SmoothingTable,
    pub lattice: LatticeTable,
    pub bounds: BoundsTable,
    pub infr: InfrTable,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(vec![format!("{}: {e}", path.display())]))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(vec![format!("config: {e}")]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatePlan {
    pub equation: EquationSpec,
    pub grid: SpectralGrid,
    pub s: f64,
    pub amplitude: f64,
    pub margin: f64,
    pub weighted: bool,
    pub seed: u64,
    pub stepper: StepperConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPlan {
    pub config: SmoothingConfig,
    pub refine: Option<(usize, usize)>,
    pub refine_eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsPlan {
    pub probe: BoundProbe,
    pub operator: OperatorKind,
    pub widths: Vec<f64>,
    pub alphas: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub eps_grid: Vec<f64>,
    pub sigma_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrPlan {
    pub equation: EquationSpec,
    pub config: InfrConfig,
    pub thresholds: Vec<f64>,
    pub lattice: Lattice,
    pub ensemble: usize,
    pub operator_norm: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "lowercase")]
pub enum Plan {
    Simulate(SimulatePlan),
    Smoothing(SmoothingPlan),
    Bounds(BoundsPlan),
    Infr(InfrPlan),
}

impl Plan {
    pub fn experiment(&self) -> Experiment {
        match self {
            Plan::Simulate(_) => Experiment::Simulate,
            Plan::Smoothing(_) => Experiment::Smoothing,
            Plan::Bounds(_) => Experiment::Bounds,
            Plan::Infr(_) => Experiment::Infr,
        }
    }

    pub fn equation(&self) -> &EquationSpec {
        match self {
            Plan::Simulate(p) => &p.equation,
            Plan::Smoothing(p) => &p.config.equation,
            Plan::Bounds(p) => &p.probe.equation,
            Plan::Infr(p) => &p.equation,
        }
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("plans serialize");
        let canonical = serde_json::to_string(&value).expect("values serialize");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Grid or lattice description stamped on every output.
    pub fn grid_metadata(&self) -> serde_json::Value {
        let v = match self {
            Plan::Simulate(p) => serde_json::to_value(p.grid),
            Plan::Smoothing(p) => serde_json::to_value(p.config.grid),
            Plan::Bounds(p) => serde_json::to_value(p.probe.lattice),
            Plan::Infr(p) => serde_json::to_value(p.lattice),
        };
        v.expect("grids serialize")
    }
}

fn parse_kind(cfg: &ExperimentConfig, errors: &mut Vec<String>) -> Option<EquationKind> {
    match cfg.equation.kind.as_deref() {
        None => {
            errors.push("equation kind is required (--eq)".into());
            None
        }
        Some(k) => match k.parse::<EquationKind>() {
            Ok(kind) => Some(kind),
            Err(e) => {
                errors.push(e.to_string());
                None
            }
        },
    }
}

fn equation(cfg: &ExperimentConfig, kind: EquationKind, renormalize_default: bool) -> EquationSpec {
    EquationSpec::new(kind)
        .with_sign(cfg.equation.sign.unwrap_or_default())
        .with_coupling(cfg.equation.coupling.unwrap_or(1.0))
        .renormalized(cfg.equation.renormalize.unwrap_or(renormalize_default))
}

fn grid(cfg: &ExperimentConfig, base: SpectralGrid, errors: &mut Vec<String>) -> SpectralGrid {
    let g = SpectralGrid {
        dim: base.dim,
        box_length: cfg.grid.box_length.unwrap_or(base.box_length),
        modes: cfg.grid.modes.unwrap_or(base.modes),
        dealias_fraction: cfg.grid.dealias_fraction.unwrap_or(base.dealias_fraction),
    };
    if let Err(e) = g.validate() {
        errors.push(e.to_string());
    }
    g
}

fn stepper(cfg: &ExperimentConfig, base: StepperConfig, errors: &mut Vec<String>) -> StepperConfig {
    let mut st = StepperConfig::new(cfg.stepper.dt.unwrap_or(base.dt), cfg.stepper.t_end.unwrap_or(base.t_end));
    st.samples = cfg.stepper.samples.unwrap_or(base.samples);
    if let Err(e) = st.validate() {
        errors.push(e.to_string());
    }
    st
}

fn lattice(cfg: &ExperimentConfig, base: Lattice, errors: &mut Vec<String>) -> Lattice {
    let points = cfg.lattice.points.unwrap_or(base.points);
    let extent = cfg.lattice.extent.unwrap_or(if cfg.lattice.points.is_some() {
        base.spacing() * points as f64 / 2.0
    } else {
        base.extent
    });
    match Lattice::new(base.dim, points, extent) {
        Ok(l) => l,
        Err(e) => {
            errors.push(e.to_string());
            base
        }
    }
}

fn positive_list(name: &str, list: &[f64], errors: &mut Vec<String>) {
    if list.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        errors.push(format!("{name} values must be positive"));
    }
}

/// Resolves the configuration for one experiment and checks every module-level
/// invariant before anything runs.
pub fn resolve(cfg: &ExperimentConfig, experiment: Experiment) -> CliResult<Plan> {
    let mut errors = Vec::new();
    let kind = parse_kind(cfg, &mut errors);
    let Some(kind) = kind else {
        return Err(CliError::Validation(errors));
    };
    let plan = match experiment {
        Experiment::Simulate => {
            let defaults = SmoothingConfig::defaults(kind, kind.s_min().0 + 0.25);
            let linear = cfg.stepper.linear.unwrap_or(false);
            let mut eq = equation(cfg, kind, false);
            if linear {
                eq = eq.with_coupling(0.0);
            }
            let base_grid = match kind.dim() {
                Dim::One => SpectralGrid::line(128.0, 1024).expect("valid grid"),
                Dim::Two => SpectralGrid::plane(16.0, 128).expect("valid grid"),
            };
            let g = grid(cfg, base_grid, &mut errors);
            let st = stepper(cfg, StepperConfig::defaults_for(kind), &mut errors);
            let s = cfg.data.s.unwrap_or(defaults.s);
            Plan::Simulate(SimulatePlan {
                equation: eq,
                grid: g,
                s,
                amplitude: cfg.data.amplitude.unwrap_or(defaults.amplitude),
                margin: cfg.data.margin.unwrap_or(defaults.margin),
                weighted: cfg.data.weighted.unwrap_or(false),
                seed: cfg.seeds.start.unwrap_or(0),
                stepper: st,
            })
        }
        Experiment::Smoothing => {
            let Some(s) = cfg.data.s else {
                errors.push("data regularity s is required (--s)".into());
                return Err(CliError::Validation(errors));
            };
            let mut sc = SmoothingConfig::defaults(kind, s);
            sc.equation = equation(cfg, kind, true);
            sc.grid = grid(cfg, sc.grid, &mut errors);
            sc.stepper = stepper(cfg, sc.stepper, &mut errors);
            if let Some(a) = cfg.data.amplitude {
                sc.amplitude = a;
            }
            if let Some(m) = cfg.data.margin {
                sc.margin = m;
            }
            if let Some(w) = cfg.data.weighted {
                sc.weighted = w;
            }
            let start = cfg.seeds.start.unwrap_or(0);
            let count = cfg.seeds.count.unwrap_or(sc.seeds.len() as u64);
            sc.seeds = (start..start + count).collect();
            if let Err(e) = sc.validate() {
                errors.push(e.to_string());
            }
            let refine = match cfg.smoothing.refine.as_deref() {
                None => None,
                Some([c, f]) => Some((*c, *f)),
                Some(other) => {
                    errors.push(format!("refine expects two mode counts, got {other:?}"));
                    None
                }
            };
            if let Some((c, f)) = refine {
                for m in [c, f] {
                    if let Err(e) = sc.grid.with_modes(m) {
                        errors.push(e.to_string());
                    }
                }
                if f <= c {
                    errors.push(format!("refine fine modes {f} must exceed coarse {c}"));
                }
            }
            Plan::Smoothing(SmoothingPlan {
                config: sc,
                refine,
                refine_eps: cfg.smoothing.refine_eps.clone().unwrap_or_else(|| vec![0.3, 0.9]),
            })
        }
        Experiment::Bounds => {
            let b = &cfg.bounds;
            let term = b.term.unwrap_or(0);
            let eq = equation(cfg, kind, false);
            let mut probe = match BoundProbe::new(eq, term) {
                Ok(p) => p,
                Err(e) => {
                    errors.push(e.to_string());
                    return Err(CliError::Validation(errors));
                }
            };
            probe.lattice = lattice(cfg, probe.lattice, &mut errors);
            probe.set_s(cfg.data.s.unwrap_or(0.0));
            probe.eps = b.eps.unwrap_or(0.0);
            probe.sigma = b.sigma.unwrap_or(probe.sigma);
            probe.trials = b.trials.unwrap_or(probe.trials);
            probe.iterations = b.iterations.unwrap_or(probe.iterations);
            probe.seed = cfg.seeds.start.unwrap_or(0);
            probe.drop_resonant = !b.keep_resonant.unwrap_or(false);
            probe.cell_points = b.cell_points.unwrap_or(1).max(1);
            let operator = match b.operator.as_deref().unwrap_or("alphaM").parse::<OperatorKind>() {
                Ok(o) => o,
                Err(e) => {
                    errors.push(e.to_string());
                    OperatorKind::Band
                }
            };
            let mut widths = b.widths.clone().unwrap_or_default();
            let mut alphas = b.alpha.clone().unwrap_or_default();
            positive_list("M", &widths, &mut errors);
            if let [m] = widths[..] {
                probe.half_width = m;
                widths.clear();
            }
            if let [a] = alphas[..] {
                probe.alpha = a;
                alphas.clear();
            }
            let s_grid = b.s_grid.clone().unwrap_or_else(|| vec![probe.s]);
            let eps_grid = b.eps_grid.clone().unwrap_or_else(|| vec![probe.eps]);
            let sigma_grid = b.sigma_grid.clone().unwrap_or_else(|| vec![probe.sigma]);
            match operator {
                OperatorKind::Band => {
                    for (name, list) in [("M", &widths), ("alpha", &alphas)] {
                        if !list.is_empty() && list.len() < nlsmooth_lab::probe::MIN_SWEEP_VALUES {
                            errors.push(format!(
                                "{name} sweep needs at least {} values",
                                nlsmooth_lab::probe::MIN_SWEEP_VALUES
                            ));
                        }
                    }
                }
                OperatorKind::Smoothed => {
                    for &sg in &sigma_grid {
                        if !(sg > 0.0 && sg < 1.0) {
                            errors.push(format!("sigma must lie in (0, 1), got {sg}"));
                        }
                    }
                }
            }
            if let Err(e) = probe.validate() {
                errors.push(e.to_string());
            }
            Plan::Bounds(BoundsPlan {
                probe,
                operator,
                widths,
                alphas,
                s_grid,
                eps_grid,
                sigma_grid,
            })
        }
        Experiment::Infr => {
            let eq = equation(cfg, kind, false);
            let base = match kind.dim() {
                Dim::One => Lattice::line(128, 64.0).expect("valid lattice"),
                Dim::Two => Lattice::plane(16, 8.0).expect("valid lattice"),
            };
            let lat = lattice(cfg, base, &mut errors);
            let thresholds = cfg
                .infr
                .thresholds
                .clone()
                .unwrap_or_else(|| (4..=10).map(|p| 2f64.powi(p)).collect());
            let first = thresholds.first().copied().unwrap_or(16.0);
            let config = InfrConfig {
                threshold: first,
                sigma: cfg.infr.sigma.unwrap_or(0.6),
                max_step: 1,
                s: cfg.data.s.unwrap_or(0.3),
                eps: cfg.infr.eps.unwrap_or(0.3),
            };
            if let Err(e) = config.validate() {
                errors.push(e.to_string());
            }
            if thresholds.len() < nlsmooth_lab::probe::MIN_SWEEP_VALUES {
                errors.push(format!("need at least {} thresholds", nlsmooth_lab::probe::MIN_SWEEP_VALUES));
            }
            if thresholds.iter().any(|&n| !(n > 1.0)) {
                errors.push("thresholds N must exceed 1".into());
            }
            Plan::Infr(InfrPlan {
                equation: eq,
                config,
                thresholds,
                lattice: lat,
                ensemble: cfg.infr.ensemble.unwrap_or(4),
                operator_norm: cfg.infr.operator_norm.unwrap_or(false),
                seed: cfg.seeds.start.unwrap_or(0),
            })
        }
        Experiment::Report => {
            errors.push("report takes a directory, not a plan".into());
            return Err(CliError::Validation(errors));
        }
    };
    if let Some(w) = cfg.workers {
        if w == 0 {
            errors.push("worker count must be at least 1".into());
        }
    }
    if errors.is_empty() {
        Ok(plan)
    } else {
        Err(CliError::Validation(errors))
    }
}

/// Run directory: the configured output, or `<root>/<experiment>-<equation>-<hash>`
/// under `$NLSMOOTH_OUTPUT` (default `runs`).
pub fn run_dir(cfg: &ExperimentConfig, plan: &Plan) -> PathBuf {
    if let Some(out) = &cfg.output {
        return out.clone();
    }
    let root = std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
    root.join(format!(
        "{}-{}-{}",
        plan.experiment().name(),
        plan.equation().kind.name().to_ascii_lowercase(),
        &plan.hash()[..12]
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(kind: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.equation.kind = Some(kind.into());
        c
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            workers = 2
            [equation]
            kind = "nls"
            [data]
            s = 0.3
            [bounds]
            M = [1.0, 2.0]
            [infr]
            N = [16.0, 32.0]
        "#;
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.workers, Some(2));
        assert_eq!(c.bounds.widths, Some(vec![1.0, 2.0]));
        assert_eq!(c.infr.thresholds, Some(vec![16.0, 32.0]));
        assert!(ExperimentConfig::parse("[grid]\nbogus = 1").is_err());
    }

    #[test]
    fn smoothing_plan_records_theory() {
        let mut c = base("nls");
        c.data.s = Some(0.3);
        let Plan::Smoothing(p) = resolve(&c, Experiment::Smoothing).unwrap() else {
            panic!("wrong plan")
        };
        assert!((p.config.validate().unwrap() - 0.6).abs() < 1e-12);
        assert!(p.config.equation.renormalize);
    }

    #[test]
    fn validation_is_itemized() {
        let mut c = base("nls");
        c.data.s = Some(0.3);
        c.grid.modes = Some(1000);
        c.stepper.dt = Some(-1.0);
        match resolve(&c, Experiment::Smoothing) {
            Err(CliError::Validation(items)) => assert!(items.len() >= 2, "{items:?}"),
            other => panic!("{other:?}"),
        }
        assert!(resolve(&base("nope"), Experiment::Simulate).is_err());
    }

    #[test]
    fn hash_ignores_workers_and_output() {
        let mut a = base("mkdv");
        a.data.s = Some(0.5);
        let mut b = a.clone();
        b.workers = Some(8);
        b.output = Some("elsewhere".into());
        let pa = resolve(&a, Experiment::Smoothing).unwrap();
        let pb = resolve(&b, Experiment::Smoothing).unwrap();
        assert_eq!(pa.hash(), pb.hash());
        let mut c = a.clone();
        c.data.s = Some(0.6);
        assert_ne!(pa.hash(), resolve(&c, Experiment::Smoothing).unwrap().hash());
    }

    #[test]
    fn linear_simulation_switches_coupling_off() {
        let mut c = base("kdv");
        c.stepper.linear = Some(true);
        let Plan::Simulate(p) = resolve(&c, Experiment::Simulate).unwrap() else {
            panic!("wrong plan")
        };
        assert_eq!(p.equation.coupling, 0.0);
    }
}
