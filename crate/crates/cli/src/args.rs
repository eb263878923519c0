use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "annspec", version, about = "Dirichlet eigenpairs, heat kernels and metric-measure audits", args_override_self = true)]
pub struct Cli {
    /// Output directory; defaults to $OUT_DIR, then ./annspec-out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` file whose entries act as flags given before the command line's own.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Recorded in every artifact. The solvers use fixed start vectors, so it does not change results.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// File stem for the CSV and JSON artifacts; defaults to the command name.
    #[arg(long, global = true)]
    pub name: Option<String>,
    /// Skip printing the JSON summary.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Principal radial eigenvalues of an annular domain.
    Solve(SolveArgs),
    /// Closed-form eigenvalue interval of a spherical shell.
    Bounds(BoundsArgs),
    /// Comparability of a radial eigenfunction with its caricature.
    Caricature(CaricatureArgs),
    /// t³|Φ₁′(t)| for Φ₁(t) = λ(A_{1,1+t}).
    Hadamard(HadamardArgs),
    /// Volume-doubling ratios over a radius ladder.
    VdAudit(VdArgs),
    /// Poincaré constants over a radius ladder.
    PiAudit(PiArgs),
    /// Equilibration of the normalized heat kernel.
    HeatKernel(HeatKernelArgs),
    /// Box kernel envelopes from exact interval sums.
    BoxKernel(BoxKernelArgs),
    /// Gaussian two-sided heat kernel fit on a thin annulus.
    HkeFit(HkeArgs),
    /// Thin-sector doubling counterexample.
    Sector(SectorArgs),
    /// Box sandwich perturbation audit.
    PerturbBox(PerturbBoxArgs),
    /// Annulus sandwich perturbation audit.
    PerturbAnnulus(PerturbAnnulusArgs),
    /// Aggregate JSON summaries into a pass/fail table.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Bounds(_) => "bounds",
            Command::Caricature(_) => "caricature",
            Command::Hadamard(_) => "hadamard",
            Command::VdAudit(_) => "vd-audit",
            Command::PiAudit(_) => "pi-audit",
            Command::HeatKernel(_) => "heat-kernel",
            Command::BoxKernel(_) => "box-kernel",
            Command::HkeFit(_) => "hke-fit",
            Command::Sector(_) => "sector",
            Command::PerturbBox(_) => "perturb-box",
            Command::PerturbAnnulus(_) => "perturb-annulus",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseArg {
    Full,
    Arc,
    Orthant,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = BaseArg::Full)]
    pub base: BaseArg,
    /// Arc opening for `--base arc`.
    #[arg(long, default_value_t = PI)]
    pub theta1: f64,
    /// Number of positive coordinates for `--base orthant`.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
    #[arg(long, default_value_t = 1)]
    pub modes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    #[arg(long, default_value_t = 4096)]
    pub grid: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaricatureArg {
    Thin,
    NonThin,
    Cosine,
}

#[derive(Debug, Args, Serialize)]
pub struct CaricatureArgs {
    #[arg(long, value_enum, default_value_t = CaricatureArg::Thin)]
    pub kind: CaricatureArg,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.5)]
    pub b: f64,
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Relative depth below which samples are dropped.
    #[arg(long, default_value_t = 0.02)]
    pub margin: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct HadamardArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.5,1")]
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    Phi2,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Annulus,
    Interval,
}

#[derive(Debug, Args, Serialize)]
pub struct VdArgs {
    #[arg(long, value_enum, default_value_t = MetricArg::Annulus)]
    pub domain: MetricArg,
    /// Thickness of `(a, a+ε)×S¹`, or the smallest ladder scale on an interval.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Interval length.
    #[arg(long, default_value_t = 1.0)]
    pub length: f64,
    #[arg(long, value_enum, default_value_t = WeightArg::Phi2)]
    pub weight: WeightArg,
    /// Radial (or interval) quadrature cells.
    #[arg(long)]
    pub n1: Option<usize>,
    /// Angular quadrature cells; defaults to resolve ε/64.
    #[arg(long)]
    pub n2: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiModeArg {
    Continuous,
    Discrete,
}

#[derive(Debug, Args, Serialize)]
pub struct PiArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, value_enum, default_value_t = WeightArg::Phi2)]
    pub weight: WeightArg,
    #[arg(long, value_enum, default_value_t = PiModeArg::Continuous)]
    pub mode: PiModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelDomainArg {
    Box,
    Annulus,
}

#[derive(Debug, Args, Serialize)]
pub struct HeatKernelArgs {
    #[arg(long, value_enum, default_value_t = KernelDomainArg::Box)]
    pub domain: KernelDomainArg,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub half_widths: Vec<f64>,
    /// Annulus thickness.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Eigenvalue cut for box spectra.
    #[arg(long, default_value_t = 4000.0)]
    pub cut: f64,
    /// Sample points per box dimension.
    #[arg(long, default_value_t = 12)]
    pub per_dim: usize,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoxKernelArgs {
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub half_widths: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t1: f64,
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    #[arg(long, default_value_t = 40)]
    pub per_dim: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct HkeArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// First time; defaults to ε².
    #[arg(long)]
    pub t0: Option<f64>,
    /// Last time; defaults to π².
    #[arg(long)]
    pub t1: Option<f64>,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    #[arg(long, default_value_t = 64)]
    pub n1: usize,
    /// Angular cells of the ball-volume grid; defaults to 64·2π/ε.
    #[arg(long)]
    pub n2: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SectorArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.3333333333333333,0.25,0.2")]
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SandwichArg {
    Inner,
    Outer,
    Notched,
}

#[derive(Debug, Args, Serialize)]
pub struct PerturbBoxArgs {
    /// TOML scenario file; replaces the geometry flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "1,1")]
    pub inner: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.05,1.05")]
    pub outer: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SandwichArg::Notched)]
    pub sandwich: SandwichArg,
    #[arg(long, default_value_t = 1.0)]
    pub fraction: f64,
    #[arg(long, default_value_t = 0.1025)]
    pub c1: f64,
    #[arg(long, default_value_t = 1.05)]
    pub c2: f64,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetArg {
    Identity,
    Bumpy,
    Arc,
}

#[derive(Debug, Args, Serialize)]
pub struct PerturbAnnulusArgs {
    /// TOML scenario file; replaces the preset flags.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PresetArg::Bumpy)]
    pub preset: PresetArg,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eta: f64,
    #[arg(long, default_value_t = 64)]
    pub nr: usize,
    #[arg(long, default_value_t = 360)]
    pub ntheta: usize,
    /// Also run the exploratory a_ε = b_ε = ε^p sweep.
    #[arg(long)]
    pub sweep: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3")]
    pub sweep_eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2,2.5,3")]
    pub sweep_powers: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Directory holding JSON summaries; defaults to the output directory.
    #[arg(long)]
    pub inputs: Option<PathBuf>,
}
