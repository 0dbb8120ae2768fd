//! Command-line grammar. Every option is also accepted as a key of the JSON
//! file given by `--config`; command-line values take precedence.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "c2mm",
    version,
    about = "Numerics for the chiral two-matrix model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Biorthogonal polynomials: bimoments, biorthogonality and MOP residuals
    Biortho(BiorthArgs),
    /// Correlation kernel: density on a grid, K(x, y), trace and reproducing checks
    Kernel(KernelArgs),
    /// Compare the rescaled kernel with the sine, Airy or Bessel limit
    Scaling(ScalingArgs),
    /// Third-order ODE, jumps, Wronskian, large-z fits and q-function identities
    OdeCheck(OdeCheckArgs),
    /// Limiting density by extrapolation in n
    Density(DensityArgs),
    /// Classify a point of the (alpha, tau) plane
    Phase(PhaseArgs),
    /// Classify a raster of the (alpha, tau) plane
    PhaseMap(PhaseMapArgs),
    /// gamma(alpha, tau), or its expansion along a scaling path
    Gamma(GammaArgs),
    /// Triple-scaling convergence probe near the multicritical point
    Triple(TripleArgs),
    /// Sample squared singular values of Phi_1
    Sample(SampleArgs),
    /// Sample and compare with the kernel
    Compare(CompareArgs),
    /// Gap probability det(I - K) on [a, b]
    Gap(GapArgs),
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct BiorthArgs {
    /// JSON file with default option values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// model spec (JSON with nu, tau, n, V, W)
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// number of polynomials in each family [default: 16]
    #[arg(long)]
    pub degree: Option<usize>,
    /// double | extended | quad | octo [default: escalate from extended]
    #[arg(long)]
    pub precision: Option<String>,
    /// bound on the off-diagonal residual [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// bound on the MOP residuals [default: 1e-7]
    #[arg(long)]
    pub mop_tol: Option<f64>,
    /// which MOP checks to enforce: mop1, mop2 [default: mop1,mop2]
    #[arg(long, value_delimiter = ',')]
    pub check: Option<Vec<String>>,
    /// JSON report
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct KernelArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub precision: Option<String>,
    /// density grid: "default", a JSON file, "a:b:points" or a comma list
    #[arg(long)]
    pub density: Option<String>,
    /// gap probability on [a, b], appended as columns of the CSV
    #[arg(long, value_delimiter = ',')]
    pub gap: Option<Vec<f64>>,
    /// Nystrom nodes for --gap [default: 32]
    #[arg(long)]
    pub m: Option<usize>,
    /// evaluate K(x, y) at one pair
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// trace and reproducing identities
    #[arg(long)]
    pub checks: bool,
    /// tolerance for --checks [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,
    /// density CSV (x,rho_n); standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report of the checks
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// SVG figure of the density
    #[arg(long)]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub precision: Option<String>,
    /// bulk | soft | hard
    #[arg(long)]
    pub regime: Option<String>,
    /// bulk point
    #[arg(long)]
    pub x_star: Option<f64>,
    /// left | right (soft edge)
    #[arg(long)]
    pub side: Option<String>,
    /// window in the local variable, "a:b"
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    /// fail when the sup deviation exceeds this
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct OdeCheckArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// spec with W = y^2/2 + alpha y
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// JSON list of [re, im] points for the ODE residual
    #[arg(long)]
    pub points: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct DensityArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// values of n, multiples of 3 [default: 9,18,36]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// "a:b:points" or a comma list [default: 0.5:3:126]
    #[arg(long)]
    pub grid: Option<String>,
    /// log-log fit window near the origin, "lo:hi" [default: 0.05:1]
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub precision: Option<String>,
    /// bound on |mass - 1| [default: 2e-3]
    #[arg(long)]
    pub mass_tol: Option<f64>,
    /// CSV of rho_n per n, the extrapolation and its error estimate
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseMapArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// "a:b" [default: -4:3]
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_range: Option<String>,
    /// "a:b" [default: 0.05:3]
    #[arg(long, allow_hyphen_values = true)]
    pub tau_range: Option<String>,
    /// [default: 141]
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// [default: 120]
    #[arg(long)]
    pub tau_steps: Option<usize>,
    /// CSV alpha,tau,case,gamma; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct GammaArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// scaling-path coefficient of n^(-1/3)
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// scaling-path coefficient of n^(-2/3)
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// log-spaced n in [1e3, 1e6] [default: 25]
    #[arg(long)]
    pub points: Option<usize>,
    /// highest power of n^(-1/3) in the fit [default: 5]
    #[arg(long)]
    pub degree: Option<usize>,
    /// bound on the relative coefficient errors [default: 0.01]
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct TripleArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// [default: 9,18,36]
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// u and v values [default: 0.5,1,2]
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long)]
    pub precision: Option<String>,
    /// CSV n,u,v,khat
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct SampleArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// gaussian | mcmc [default: gaussian]
    #[arg(long)]
    pub mode: Option<String>,
    /// [default: 1000]
    #[arg(long)]
    pub count: Option<usize>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// MCMC chains [default: 4]
    #[arg(long)]
    pub chains: Option<usize>,
    /// MCMC burn-in sweeps [default: 2000]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// initial MCMC proposal scale [default: 0.5]
    #[arg(long)]
    pub step: Option<f64>,
    /// CSV sv1..svn, one row per configuration; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct CompareArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub mode: Option<String>,
    /// [default: 10000]
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub precision: Option<String>,
    /// bound on the KS distance [default: 0.03]
    #[arg(long)]
    pub ks_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG of the empirical and kernel CDFs
    #[arg(long)]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Args, Serialize, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct GapArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub precision: Option<String>,
    /// [default: 0]
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// Nystrom nodes [default: 32]
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
