use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{self, Experiment, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::{report, run};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nlsmooth", version, about = "Nonlinear smoothing experiments for dispersive equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one rough datum and record norms and the final spectrum.
    Simulate(SimulateArgs),
    /// Measure the smoothing gain over a seed ensemble.
    Smoothing(SmoothingArgs),
    /// Probe the multilinear bound operators on a frequency lattice.
    Bounds(BoundsArgs),
    /// Fit the near-resonant and boundary-term scalings against the threshold N.
    Infr(InfrArgs),
    /// Summarize every report under a directory.
    Report { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (default `$NLSMOOTH_OUTPUT/<experiment>-<eq>-<hash>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output directory.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "eq")]
    pub equation: Option<String>,
    #[arg(long)]
    pub s: Option<f64>,
    /// First seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long = "L")]
    pub box_length: Option<f64>,
    #[arg(long = "n")]
    pub modes: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Switch the nonlinearity off.
    #[arg(long)]
    pub linear: bool,
}

#[derive(Debug, Args)]
pub struct SmoothingArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of seeds.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub weighted: Option<bool>,
    /// Coarse and fine mode counts, e.g. `2048,4096`.
    #[arg(long, value_delimiter = ',')]
    pub refine: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub refine_eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct LatticeArgs {
    /// Lattice points per axis.
    #[arg(long)]
    pub mf: Option<usize>,
    /// Lattice half extent.
    #[arg(long = "K")]
    pub extent: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// `alphaM` (band restriction) or `sigma` (smoothed operator).
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub term: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long = "M", value_delimiter = ',')]
    pub widths: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub s_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub sigma_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Keep exactly resonant tuples.
    #[arg(long)]
    pub keep_resonant: bool,
    /// Midpoints per axis when averaging the kernel over each lattice cell.
    #[arg(long)]
    pub cell_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct InfrArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long = "N", value_delimiter = ',')]
    pub thresholds: Option<Vec<f64>>,
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Use estimated operator norms instead of the random ensemble.
    #[arg(long)]
    pub operator_norm: bool,
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn base_config(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    set(&mut cfg.output, common.out.clone());
    set(&mut cfg.workers, common.workers);
    set(&mut cfg.equation.kind, common.equation.clone());
    set(&mut cfg.data.s, common.s);
    set(&mut cfg.seeds.start, common.seed);
    Ok(cfg)
}

fn apply_grid(cfg: &mut ExperimentConfig, g: &GridArgs) {
    set(&mut cfg.grid.box_length, g.box_length);
    set(&mut cfg.grid.modes, g.modes);
    set(&mut cfg.stepper.dt, g.dt);
    set(&mut cfg.stepper.t_end, g.t_end);
    set(&mut cfg.data.amplitude, g.amplitude);
}

fn apply_lattice(cfg: &mut ExperimentConfig, l: &LatticeArgs) {
    set(&mut cfg.lattice.points, l.mf);
    set(&mut cfg.lattice.extent, l.extent);
}

/// Merges the config file and flags for a run subcommand.
pub fn build_config(command: &Command) -> CliResult<(ExperimentConfig, Experiment, bool)> {
    let (mut cfg, experiment, force) = match command {
        Command::Simulate(a) => {
            let mut cfg = base_config(&a.common)?;
            apply_grid(&mut cfg, &a.grid);
            if a.linear {
                cfg.stepper.linear = Some(true);
            }
            (cfg, Experiment::Simulate, a.common.force)
        }
        Command::Smoothing(a) => {
            let mut cfg = base_config(&a.common)?;
            apply_grid(&mut cfg, &a.grid);
            set(&mut cfg.seeds.count, a.seeds);
            set(&mut cfg.data.weighted, a.weighted);
            set(&mut cfg.smoothing.refine, a.refine.clone());
            set(&mut cfg.smoothing.refine_eps, a.refine_eps.clone());
            (cfg, Experiment::Smoothing, a.common.force)
        }
        Command::Bounds(a) => {
            let mut cfg = base_config(&a.common)?;
            apply_lattice(&mut cfg, &a.lattice);
            let b = &mut cfg.bounds;
            set(&mut b.operator, a.kind.clone());
            set(&mut b.term, a.term);
            set(&mut b.eps, a.eps);
            set(&mut b.sigma, a.sigma);
            set(&mut b.alpha, a.alpha.clone());
            set(&mut b.widths, a.widths.clone());
            set(&mut b.s_grid, a.s_grid.clone());
            set(&mut b.eps_grid, a.eps_grid.clone());
            set(&mut b.sigma_grid, a.sigma_grid.clone());
            set(&mut b.trials, a.trials);
            set(&mut b.iterations, a.iterations);
            set(&mut b.cell_points, a.cell_points);
            if a.keep_resonant {
                b.keep_resonant = Some(true);
            }
            (cfg, Experiment::Bounds, a.common.force)
        }
        Command::Infr(a) => {
            let mut cfg = base_config(&a.common)?;
            apply_lattice(&mut cfg, &a.lattice);
            set(&mut cfg.infr.sigma, a.sigma);
            set(&mut cfg.infr.eps, a.eps);
            set(&mut cfg.infr.thresholds, a.thresholds.clone());
            set(&mut cfg.infr.ensemble, a.ensemble);
            if a.operator_norm {
                cfg.infr.operator_norm = Some(true);
            }
            (cfg, Experiment::Infr, a.common.force)
        }
        Command::Report { .. } => {
            return Err(CliError::Validation(vec!["report has no configuration".into()]));
        }
    };
    if let Some(e) = cfg.experiment {
        if e != experiment {
            return Err(CliError::Validation(vec![format!(
                "config is for '{}' but '{}' was requested",
                e.name(),
                experiment.name()
            )]));
        }
    }
    cfg.experiment = Some(experiment);
    Ok((cfg, experiment, force))
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    if let Command::Report { dir } = &cli.command {
        let summary = report::summarize(dir)?;
        print!("{}", summary.render());
        return Ok(if summary.all_pass() { EXIT_OK } else { EXIT_WARN });
    }
    let (cfg, experiment, force) = build_config(&cli.command)?;
    let plan = config::resolve(&cfg, experiment)?;
    let dir = config::run_dir(&cfg, &plan);
    let envelope = run::execute(&plan, &dir, cfg.workers, force)?;
    println!("{}", dir.display());
    for c in &envelope.checks {
        println!(
            "{:<28} {:>12.6} {:<24} {}",
            c.name,
            c.value,
            c.threshold,
            if c.pass { "pass" } else { "warn" }
        );
    }
    Ok(EXIT_OK)
}

/// Parses `args` (program name first), runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
