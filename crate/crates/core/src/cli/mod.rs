//! Command-line front end: argument and config parsing, output files and
//! run manifests.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Params;
pub use manifest::{OutputFile, Outputs, RunManifest, Timing};

use crate::{Error, Result};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid configuration or parameters.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for a numerical failure.
pub const EXIT_NUMERIC: i32 = 3;

const CONFIG_HELP: &str = "Every long option can also be set as `key = value` (key = option name without dashes) \
in the [<subcommand>] section or the top-level section of the --config file. Lists are comma-separated; \
flags override file values.";

#[derive(Debug, Parser)]
#[command(name = "twistband", version, about = "Spectra of twisted thin strips", after_help = CONFIG_HELP)]
pub struct Cli {
    /// INI-style config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "TWISTBAND_JOBS")]
    pub jobs: Option<usize>,
    /// Seed for the iterative eigensolver.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Band functions of the transverse operators and the essential threshold.
    #[command(after_help = CONFIG_HELP)]
    Bands(BandsArgs),
    /// Lowest eigenvalues of the truncated two-dimensional problem.
    #[command(after_help = CONFIG_HELP)]
    Spectrum2d(Spectrum2dArgs),
    /// Rayleigh-gap certificates on a delta x eps grid.
    #[command(after_help = CONFIG_HELP)]
    Certify(CertifyArgs),
    /// Thin-strip limit: sandwich bounds, eigenvalue counts, perturbation coefficients.
    #[command(after_help = CONFIG_HELP)]
    Thin(ThinArgs),
    /// Relatively parallel frame along a curve with given curvatures.
    #[command(after_help = CONFIG_HELP)]
    Frame(FrameArgs),
    /// Quad mesh and det J samples of the strip surface.
    #[command(after_help = CONFIG_HELP)]
    ExportSurface(SurfaceArgs),
    /// Conditions (I)-(IX) for a mollified family.
    #[command(after_help = CONFIG_HELP)]
    ValidateFamily(FamilyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bands(_) => "bands",
            Command::Spectrum2d(_) => "spectrum2d",
            Command::Certify(_) => "certify",
            Command::Thin(_) => "thin",
            Command::Frame(_) => "frame",
            Command::ExportSurface(_) => "export-surface",
            Command::ValidateFamily(_) => "validate-family",
        }
    }
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    /// Twist rate (default 1).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of bands (default 4).
    #[arg(long)]
    pub n_bands: Option<usize>,
    /// Largest |p| (default 8 / max(1, gamma eps)).
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Grid points on [0, p_max] (default 64).
    #[arg(long)]
    pub p_half: Option<usize>,
    /// Transverse interior nodes (default 512).
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Spectrum2dArgs {
    /// triangle | signed | zero | plateau (default triangle).
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Truncation half-length.
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// c | d (default c).
    #[arg(long)]
    pub form: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// triangle | signed | zero (default triangle).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// zero | sqrt-delta | a fixed number (default: sqrt-delta for signed).
    #[arg(long)]
    pub eta: Option<String>,
    /// Also solve the 2D problem at the smallest eps.
    #[arg(long)]
    pub cross_check: bool,
}

#[derive(Debug, Args)]
pub struct ThinArgs {
    /// square-twist | constant (default square-twist).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    /// Rate of the constant family.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Eigenvalues per eps (default 3).
    #[arg(long)]
    pub k: Option<usize>,
    /// Add the 2D sandwich check.
    #[arg(long)]
    pub two_d: bool,
    /// Also write the per-condition table.
    #[arg(long)]
    pub check_conditions: bool,
}

#[derive(Debug, Args)]
pub struct FrameArgs {
    /// Constant curvatures k1,...,kn (default 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub curvatures: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub s_start: Option<f64>,
    /// Default 2 pi.
    #[arg(long, allow_negative_numbers = true)]
    pub s_end: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Write every n-th sample (default 10).
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    /// constant | triangle | signed | square | mollified | untwisted (default constant).
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Corner of the mollified square twist.
    #[arg(long)]
    pub corner: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Constant curvatures (default 0,0: straight line in R^3).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub curvatures: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub s_start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub s_end: Option<f64>,
    #[arg(long)]
    pub ns: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// square-twist | constant (default square-twist).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Bound constant of condition (VI).
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

/// Runs one command inside a thread pool of `--jobs` workers.
pub fn run(cli: Cli) -> Result<RunManifest> {
    let mut params = Params::new(cli.command.name(), cli.config.as_deref())?;
    let out: String = params.or("out", cli.out.as_ref().map(|p| p.display().to_string()), "out".to_string())?;
    let seed: u64 = params.or("seed", cli.seed, 0)?;
    let jobs: Option<usize> = params.get("jobs", cli.jobs)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Error::Config("parameter `jobs` must be at least 1".into()));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let (manifest, outputs) = pool.install(|| commands::dispatch(&cli.command, &mut params, seed))?;
    let mut manifest = manifest;
    manifest.config = params.resolved;
    outputs.write(std::path::Path::new(&out), manifest)
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERIC
    }
}
