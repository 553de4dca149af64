//! Run configuration.
//!
//! A run is described by one TOML document. Every section is optional and
//! unknown keys are rejected. Values are resolved in order: built-in
//! defaults, then the `--config` file, then command-line flags. The resolved
//! document is written back as `manifest.toml`, which `raftmin run` accepts
//! unchanged.
//!
//! ```toml
//! command = "flow"          # energy | flow | modes | cell | gamma | nondim | helmholtz
//! seed = 7
//! out_dir = "out"
//!
//! [grid]
//! extents = [2.0]           # one entry per axis; the box is centred at 0
//! points = [256]
//! boundary = "neumann"      # or "periodic" (odd point counts)
//!
//! [potential]
//! kind = "truncated"        # truncated | quartic | physical
//! s0 = 2.0
//!
//! [energy]
//! eps = 0.05
//! q = 0.75
//! functional = "fstar"      # fstar | fv
//! source = "direct"         # direct | physical (eps, q and W from [physical])
//!
//! [field]
//! kind = "random"           # mode | constant | step | random | file
//! amplitude = 0.1
//!
//! [flow]
//! dt = 0.05
//! max_steps = 50000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

const TABLE1: &str = include_str!("../data/table1.toml");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Energy,
    Flow,
    Modes,
    Cell,
    Gamma,
    Nondim,
    Helmholtz,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Flow => "flow",
            Command::Modes => "modes",
            Command::Cell => "cell",
            Command::Gamma => "gamma",
            Command::Nondim => "nondim",
            Command::Helmholtz => "helmholtz",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub energy: EnergySpec,
    pub field: FieldSpec,
    pub flow: FlowSpec,
    pub modes: ModesSpec,
    pub cell: CellSpec,
    pub gamma: GammaSpec,
    pub physical: PhysicalSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::default(),
            seed: 0,
            out_dir: PathBuf::from("raftmin-out"),
            grid: GridSpec::default(),
            potential: PotentialSpec::default(),
            energy: EnergySpec::default(),
            field: FieldSpec::default(),
            flow: FlowSpec::default(),
            modes: ModesSpec::default(),
            cell: CellSpec::default(),
            gamma: GammaSpec::default(),
            physical: PhysicalSpec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
    pub boundary: String,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { extents: vec![2.0], points: vec![256], boundary: "neumann".into() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    #[default]
    Truncated,
    Quartic,
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Crossover of the truncated quartic.
    pub s0: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { kind: PotentialKind::Truncated, s0: 2.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    #[default]
    Fstar,
    Fv,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSource {
    #[default]
    Direct,
    Physical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySpec {
    pub eps: f64,
    pub q: f64,
    pub functional: Functional,
    pub source: ParamSource,
}

impl Default for EnergySpec {
    fn default() -> Self {
        Self { eps: 0.1, q: 0.5, functional: Functional::Fstar, source: ParamSource::Direct }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    #[default]
    Mode,
    Constant,
    Step,
    Random,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub kind: FieldKind,
    /// `ψ_n = cos(2πn x₀)`.
    pub mode: u32,
    pub value: f64,
    /// Interface position of a step along the first axis.
    pub offset: f64,
    /// Noise amplitude of a random field.
    pub amplitude: f64,
    /// Mean of a random field.
    pub mean: f64,
    pub path: Option<PathBuf>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self { kind: FieldKind::Mode, mode: 1, value: 0.0, offset: 0.0, amplitude: 0.1, mean: 0.0, path: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    SemiImplicit,
    L2Descent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowSpec {
    pub scheme: SchemeSpec,
    pub dt: f64,
    pub max_steps: usize,
    pub tolerance: f64,
    pub stabilization: f64,
    pub record_every: usize,
    /// Freezes the mean at the initial value.
    pub fixed_mean: bool,
}

impl Default for FlowSpec {
    fn default() -> Self {
        Self {
            scheme: SchemeSpec::SemiImplicit,
            dt: 1e-3,
            max_steps: 10_000,
            tolerance: 1e-6,
            stabilization: 4.0,
            record_every: 10,
            fixed_mean: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSpec {
    pub nmax: u32,
}

impl Default for ModesSpec {
    fn default() -> Self {
        Self { nmax: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CellSpec {
    pub knots: usize,
    pub clamp: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub max_iter: usize,
    /// Samples of the optimal profile written to `profile.csv`.
    pub profile_samples: usize,
}

impl Default for CellSpec {
    fn default() -> Self {
        Self {
            knots: 512,
            clamp: 0.05,
            eps_min: 0.02,
            eps_max: 1.0,
            eps_count: 16,
            max_iter: 200,
            profile_samples: 401,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    #[default]
    Slab,
    Square,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GammaSpec {
    pub geometry: GeometryKind,
    pub eps: Vec<f64>,
    pub layer_half_width: f64,
    pub fixed_eps0: Option<f64>,
    /// Slab axis and offset.
    pub axis: usize,
    pub offset: f64,
    /// Side of the square, centred at the origin.
    pub side: f64,
    pub delta: f64,
    pub eta: f64,
}

impl Default for GammaSpec {
    fn default() -> Self {
        Self {
            geometry: GeometryKind::Slab,
            eps: vec![0.1, 0.05, 0.02],
            layer_half_width: 0.2,
            fixed_eps0: None,
            axis: 0,
            offset: 0.0,
            side: 0.5,
            delta: 0.1,
            eta: 0.04,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalSpec {
    pub a2: f64,
    pub a4: f64,
    pub b: f64,
    pub sigma: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub length: f64,
    /// Require `sigma` inside the tabulated range.
    pub strict: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Table1 {
    a2: f64,
    a4: f64,
    b: f64,
    kappa: f64,
    lambda: f64,
    length: f64,
    sigma: f64,
    sigma_min: f64,
    sigma_max: f64,
}

fn table1() -> Table1 {
    toml::from_str(TABLE1).expect("bundled table1.toml parses")
}

/// Tabulated surface tension range.
pub fn table1_sigma_range() -> (f64, f64) {
    let t = table1();
    (t.sigma_min, t.sigma_max)
}

impl PhysicalSpec {
    pub fn table1() -> Self {
        let t = table1();
        Self {
            a2: t.a2,
            a4: t.a4,
            b: t.b,
            sigma: t.sigma,
            kappa: t.kappa,
            lambda: t.lambda,
            length: t.length,
            strict: false,
        }
    }
}

impl Default for PhysicalSpec {
    fn default() -> Self {
        Self::table1()
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }
}
