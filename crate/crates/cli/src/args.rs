//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "serrin",
    version,
    about = "Solve Δu + nku = -1 on balls, slabs and planar domains and check integral identities"
)]
pub struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand;
    /// flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Geodesic ball about the pole of a warped product.
    VerifyBall(BallArgs),
    /// Slab `a <= t <= b` of a warped product.
    VerifySlab(SlabArgs),
    /// Planar domain in a surface of constant curvature, by P1 finite elements.
    VerifyFem(FemArgs),
    /// Runs one of the verifiers over a range of a single parameter.
    Sweep(SweepArgs),
    /// Generates a mesh and writes it (or its statistics).
    Mesh(MeshArgs),
    /// Lists the warp catalog with its curvature data, and the identity names.
    Catalog(CatalogArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyBall(_) => "verify-ball",
            Command::VerifySlab(_) => "verify-slab",
            Command::VerifyFem(_) => "verify-fem",
            Command::Sweep(_) => "sweep",
            Command::Mesh(_) => "mesh",
            Command::Catalog(_) => "catalog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Reserved. Every algorithm is deterministic, so the value is ignored.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Run on the calling thread only.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// Dimension of the manifold.
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    /// Model constant in `Δu + nku = -1`.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub k: f64,

    /// Warp function: euclidean, sphere, hyperbolic, exp, cosh or
    /// custom:<expression in t>. Defaults to the space form of curvature k.
    #[arg(long)]
    pub warp: Option<String>,

    /// Scalar curvature of the fiber. Defaults to the round sphere for warps
    /// with a pole, `-(n-1)(n-2)` for cosh and 0 otherwise.
    #[arg(long, allow_negative_numbers = true)]
    pub fiber_scalar: Option<f64>,

    /// Volume of the fiber. Defaults to the unit sphere area for warps with a
    /// pole and a round fiber, 1 otherwise.
    #[arg(long)]
    pub fiber_volume: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ToleranceArgs {
    /// Relative tolerance of the radial identities.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Minimum fitted convergence rate of FEM defects.
    #[arg(long, default_value_t = 1.0)]
    pub fem_rate: f64,

    /// A FEM solution counts as overdetermined when the relative spread of
    /// |u_ν| is at most this multiple of h.
    #[arg(long, default_value_t = 0.5)]
    pub overdet_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BallSolver {
    /// Closed form on space forms, shooting otherwise.
    Auto,
    Closed,
    Numeric,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct BallArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Geodesic radius of the ball.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    #[command(flatten)]
    pub checks: CheckArgs,

    #[arg(long, value_enum, default_value_t = BallSolver::Auto)]
    pub solver: BallSolver,

    /// Solve even when the solution cannot be positive.
    #[arg(long)]
    pub allow_nonpositive: bool,

    #[command(flatten)]
    pub tolerance: ToleranceArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SlabArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,

    #[arg(long, allow_negative_numbers = true)]
    pub b: f64,

    #[command(flatten)]
    pub checks: CheckArgs,

    #[command(flatten)]
    pub tolerance: ToleranceArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    /// Comma-separated identity names, or `all`.
    #[arg(long, default_value = "all")]
    pub identities: String,

    /// Radial test function for the Reilly and Bochner checks: square,
    /// half-square, quartic, cosh, exp or solution.
    #[arg(long, default_value = "square")]
    pub test_function: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Disk,
    Ellipse,
    PerturbedDisk,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DomainArgs {
    #[arg(long, value_enum, default_value_t = DomainKind::Disk)]
    pub domain: DomainKind,

    /// Geodesic radius of the disk (also the base radius of perturbed-disk).
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,

    /// Ellipse semi-axis along x.
    #[arg(long, default_value_t = 1.5)]
    pub a: f64,

    /// Ellipse semi-axis along y.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,

    /// Amplitude of the perturbed disk `R(1 + ε cos mθ)`.
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub eps: f64,

    /// Frequency of the perturbed disk.
    #[arg(long, default_value_t = 3)]
    pub m: u32,

    /// Curvature of the surface.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub k: f64,

    /// Maximum edge length of the coarsest mesh.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct FemArgs {
    #[command(flatten)]
    pub domain: DomainArgs,

    /// Comma-separated identity names, or `all` (every check with a FEM
    /// counterpart).
    #[arg(long, default_value = "all")]
    pub identities: String,

    /// Meshes h, h/2, ... used to judge convergence.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,

    /// Boundary gradient recovery: average, patch or polynomial.
    #[arg(long, default_value = "polynomial")]
    pub recovery: String,

    /// Solve on this mesh file instead of generating meshes; the domain
    /// options still describe the analytic boundary. Implies one level.
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<std::path::PathBuf>,

    #[command(flatten)]
    pub tolerance: ToleranceArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepTarget {
    Ball,
    Fem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Radius,
    K,
    A,
    B,
    Eps,
    H,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct SweepArgs {
    /// Parameter to vary.
    #[arg(long, value_enum)]
    pub param: SweepParam,

    /// Ball (radial) or planar FEM problems. Defaults to fem when the
    /// parameter only makes sense there.
    #[arg(long, value_enum)]
    pub target: Option<SweepTarget>,

    #[arg(long, allow_negative_numbers = true)]
    pub from: Option<f64>,

    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,

    /// Number of points, ends included.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Explicit comma-separated values instead of from/to/steps.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub values: Option<Vec<f64>>,

    #[arg(long, default_value_t = 3)]
    pub n: usize,

    #[arg(long)]
    pub warp: Option<String>,

    #[arg(long, allow_negative_numbers = true)]
    pub fiber_scalar: Option<f64>,

    #[arg(long)]
    pub fiber_volume: Option<f64>,

    #[command(flatten)]
    pub domain: DomainArgs,

    /// Comma-separated identity names, or `all`.
    #[arg(long, default_value = "all")]
    pub identities: String,

    #[arg(long, default_value = "square")]
    pub test_function: String,

    #[arg(long, default_value = "polynomial")]
    pub recovery: String,

    #[arg(long)]
    pub allow_nonpositive: bool,

    #[command(flatten)]
    pub tolerance: ToleranceArgs,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshFormat {
    /// The mesh file itself.
    Text,
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct MeshArgs {
    #[command(flatten)]
    pub domain: DomainArgs,

    /// `text` writes the mesh; the other formats write its statistics.
    #[arg(long, value_enum, default_value_t = MeshFormat::Text)]
    pub format: MeshFormat,

    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(args_override_self = true)]
pub struct CatalogArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,

    /// Extra custom warp to list, e.g. `custom:t + 0.1*t^3`.
    #[arg(long)]
    pub warp: Option<String>,

    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}
