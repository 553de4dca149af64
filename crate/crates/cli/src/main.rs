use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::{
    Command, FieldKind, Functional, GeometryKind, ParamSource, PhysicalSpec, PotentialKind, RunConfig, SchemeSpec,
};
use error::CliError;

/// Energies, descent flows and cell problems for nonlocal raft functionals.
///
/// Every run writes `manifest.toml` (the resolved configuration) and
/// `summary.txt` (`key = value` lines) into the output directory, next to
/// the CSV and RAFTFIELD artifacts of the subcommand. Exit codes: 0 success,
/// 2 configuration error, 3 I/O or field-format error, 4 numerical failure.
/// `RAFTMIN_THREADS` bounds the worker pool.
#[derive(Parser, Debug)]
#[command(name = "raftmin", version)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Evaluate F* (or F on v) for one field.
    Energy {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum)]
        functional: Option<Functional>,
    },
    /// Run a descent flow on F*.
    Flow {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Tabulate single-mode energies F_qn.
    Modes {
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        nmax: Option<u32>,
    },
    /// Estimate the interface cost from the one-dimensional cell problem.
    Cell {
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        cell: CellArgs,
    },
    /// Compare recovery energies with the sharp-interface limit.
    Gamma {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        q: Option<f64>,
        #[command(flatten)]
        potential: PotentialArgs,
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, value_enum)]
        geometry: Option<GeometryKind>,
        /// Comma-separated list of ε values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[arg(long)]
        layer_half_width: Option<f64>,
        #[arg(long)]
        fixed_eps0: Option<f64>,
        #[arg(long)]
        side: Option<f64>,
    },
    /// Convert physical parameters to (ε, q).
    Nondim {
        #[command(flatten)]
        physical: PhysicalArgs,
    },
    /// Apply the resolvent (1 - ε²Δ)⁻¹ to a field.
    Helmholtz {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Re-run from a manifest written by an earlier run.
    Run { manifest: PathBuf },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Box side lengths, one per axis.
    #[arg(long, value_delimiter = ',')]
    extents: Option<Vec<f64>>,
    /// Points per axis.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    #[arg(long)]
    boundary: Option<String>,
}

#[derive(Args, Debug)]
struct PotentialArgs {
    #[arg(long, value_enum)]
    potential: Option<PotentialKind>,
    #[arg(long)]
    s0: Option<f64>,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[command(flatten)]
    potential: PotentialArgs,
    /// Take ε, q and W from the physical parameters.
    #[arg(long)]
    physical: bool,
    #[command(flatten)]
    params: PhysicalArgs,
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// Cosine mode `ψ_n = cos(2πn x)`, written `n=3` or `3`.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<u32>,
    /// Constant field.
    #[arg(long = "const")]
    constant: Option<f64>,
    /// Sign step `+1` left of the offset along the first axis.
    #[arg(long)]
    step: Option<f64>,
    /// Uniform noise around `--mean` with `--amplitude`.
    #[arg(long)]
    random: bool,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    /// RAFTFIELD file.
    #[arg(long)]
    field: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long, value_enum)]
    scheme: Option<SchemeSpec>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    stabilization: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[arg(long)]
    fixed_mean: bool,
}

#[derive(Args, Debug)]
struct CellArgs {
    #[arg(long)]
    knots: Option<usize>,
    #[arg(long)]
    clamp: Option<f64>,
    #[arg(long)]
    eps_min: Option<f64>,
    #[arg(long)]
    eps_max: Option<f64>,
    #[arg(long)]
    eps_count: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args, Debug)]
struct PhysicalArgs {
    /// Reset all physical parameters to the tabulated values.
    #[arg(long)]
    table1: bool,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    line_tension: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    coupling: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    /// Reject σ outside the tabulated range.
    #[arg(long)]
    strict: bool,
}

fn parse_mode(s: &str) -> Result<u32, String> {
    let v = s.strip_prefix("n=").unwrap_or(s);
    v.parse::<u32>().map_err(|_| format!("expected a mode index like `n=2`, got `{s}`"))
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl GridArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.grid.extents, self.extents);
        set(&mut c.grid.points, self.points);
        set(&mut c.grid.boundary, self.boundary);
    }
}

impl PotentialArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.potential.kind, self.potential);
        set(&mut c.potential.s0, self.s0);
    }
}

impl PhysicalArgs {
    fn apply(self, c: &mut RunConfig) {
        if self.table1 {
            c.physical = PhysicalSpec::table1();
        }
        let p = &mut c.physical;
        set(&mut p.sigma, self.sigma);
        set(&mut p.b, self.line_tension);
        set(&mut p.kappa, self.kappa);
        set(&mut p.lambda, self.coupling);
        set(&mut p.length, self.length);
        p.strict |= self.strict;
    }
}

impl ModelArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.energy.eps, self.eps);
        set(&mut c.energy.q, self.q);
        self.potential.apply(c);
        if self.physical {
            c.energy.source = ParamSource::Physical;
        }
        self.params.apply(c);
    }
}

impl FieldArgs {
    fn apply(self, c: &mut RunConfig) -> Result<(), CliError> {
        let f = &mut c.field;
        let chosen =
            [self.mode.is_some(), self.constant.is_some(), self.step.is_some(), self.random, self.field.is_some()];
        if chosen.iter().filter(|&&b| b).count() > 1 {
            return Err(CliError::Config("choose one of --mode, --const, --step, --random, --field".into()));
        }
        if let Some(n) = self.mode {
            f.kind = FieldKind::Mode;
            f.mode = n;
        }
        if let Some(v) = self.constant {
            f.kind = FieldKind::Constant;
            f.value = v;
        }
        if let Some(x) = self.step {
            f.kind = FieldKind::Step;
            f.offset = x;
        }
        if self.random {
            f.kind = FieldKind::Random;
        }
        if let Some(p) = self.field {
            f.kind = FieldKind::File;
            f.path = Some(p);
        }
        set(&mut f.amplitude, self.amplitude);
        set(&mut f.mean, self.mean);
        Ok(())
    }
}

impl FlowArgs {
    fn apply(self, c: &mut RunConfig) {
        let f = &mut c.flow;
        set(&mut f.scheme, self.scheme);
        set(&mut f.dt, self.dt);
        set(&mut f.max_steps, self.max_steps);
        set(&mut f.tolerance, self.tolerance);
        set(&mut f.stabilization, self.stabilization);
        set(&mut f.record_every, self.record_every);
        f.fixed_mean |= self.fixed_mean;
    }
}

impl CellArgs {
    fn apply(self, c: &mut RunConfig) {
        let k = &mut c.cell;
        set(&mut k.knots, self.knots);
        set(&mut k.clamp, self.clamp);
        set(&mut k.eps_min, self.eps_min);
        set(&mut k.eps_max, self.eps_max);
        set(&mut k.eps_count, self.eps_count);
        set(&mut k.max_iter, self.max_iter);
    }
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let mut c = match (&cli.command, &cli.config) {
        (Sub::Run { manifest }, None) => RunConfig::load(manifest)?,
        (Sub::Run { .. }, Some(_)) => {
            return Err(CliError::Config("`run` takes the manifest instead of --config".into()))
        }
        (_, Some(path)) => RunConfig::load(path)?,
        (_, None) => RunConfig::default(),
    };
    match cli.command {
        Sub::Energy { grid, model, field, functional } => {
            c.command = Command::Energy;
            grid.apply(&mut c);
            model.apply(&mut c);
            field.apply(&mut c)?;
            set(&mut c.energy.functional, functional);
        }
        Sub::Flow { grid, model, field, flow } => {
            c.command = Command::Flow;
            grid.apply(&mut c);
            model.apply(&mut c);
            field.apply(&mut c)?;
            flow.apply(&mut c);
        }
        Sub::Modes { eps, q, nmax } => {
            c.command = Command::Modes;
            set(&mut c.energy.eps, eps);
            set(&mut c.energy.q, q);
            set(&mut c.modes.nmax, nmax);
        }
        Sub::Cell { q, potential, cell } => {
            c.command = Command::Cell;
            set(&mut c.energy.q, q);
            potential.apply(&mut c);
            cell.apply(&mut c);
        }
        Sub::Gamma { grid, q, potential, cell, geometry, eps, layer_half_width, fixed_eps0, side } => {
            c.command = Command::Gamma;
            grid.apply(&mut c);
            set(&mut c.energy.q, q);
            potential.apply(&mut c);
            cell.apply(&mut c);
            set(&mut c.gamma.geometry, geometry);
            set(&mut c.gamma.eps, eps);
            set(&mut c.gamma.layer_half_width, layer_half_width);
            if fixed_eps0.is_some() {
                c.gamma.fixed_eps0 = fixed_eps0;
            }
            set(&mut c.gamma.side, side);
        }
        Sub::Nondim { physical } => {
            c.command = Command::Nondim;
            physical.apply(&mut c);
        }
        Sub::Helmholtz { grid, eps, field } => {
            c.command = Command::Helmholtz;
            grid.apply(&mut c);
            set(&mut c.energy.eps, eps);
            field.apply(&mut c)?;
        }
        Sub::Run { .. } => {}
    }
    set(&mut c.out_dir, cli.out);
    set(&mut c.seed, cli.seed);
    Ok(c)
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RAFTMIN_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("RAFTMIN_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| resolve(cli)).and_then(|c| commands::run(&c));
    match result {
        Ok(summary) => {
            for (k, v) in summary {
                println!("{k} = {v}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("raftmin: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
