use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Monte-Carlo risk of equivariant Fréchet-mean estimators.
#[derive(Debug, Parser)]
#[command(name = "eqfrechet", version)]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Wishart risk table (log-Euclidean loss on SPD matrices).
    Table1(TableArgs),
    /// Torus risk table with risk ratios to the adaptive MRE.
    Table2(TableArgs),
    /// Run one estimator on a data file.
    Estimate(EstimateArgs),
    /// Draw a sample from one of the families.
    Sample(SampleArgs),
    /// Sample Fréchet mean of a data file.
    FrechetMean(FrechetArgs),
}

/// Flags shared by every subcommand. Values are kept as text so that a config file
/// and the command line go through the same parser.
#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` file; keys are the long flag names.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<String>,
    /// csv or json.
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// Worker threads; defaults to $EQFRECHET_THREADS, then to the core count.
    #[arg(long, value_name = "N")]
    pub threads: Option<String>,
}

/// Chain settings.
#[derive(Debug, Args)]
pub struct Chain {
    #[arg(long = "mcmc-iters", value_name = "N")]
    pub mcmc_iters: Option<String>,
    #[arg(long = "burn-in", value_name = "N")]
    pub burn_in: Option<String>,
    /// haar, auto, or rw:<scale>.
    #[arg(long, value_name = "KIND")]
    pub proposal: Option<String>,
    /// Draws behind population Fréchet means without a closed form.
    #[arg(long = "population-draws", value_name = "N")]
    pub population_draws: Option<String>,
    /// Draws behind the Wishart MLE and method-of-moments inner loops.
    #[arg(long = "inner-draws", value_name = "N")]
    pub inner_draws: Option<String>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub chain: Chain,
    #[arg(long, value_name = "N")]
    pub reps: Option<String>,
    /// Dimension filter, comma-separated.
    #[arg(long, value_name = "LIST")]
    pub p: Option<String>,
    /// Degrees of freedom (Table 1) or sample size (Table 2) filter.
    #[arg(long, value_name = "LIST")]
    pub n: Option<String>,
    #[arg(long, value_name = "LIST")]
    pub kappa: Option<String>,
    #[arg(long, value_name = "LIST")]
    pub lambda: Option<String>,
    /// Estimator ids, comma-separated.
    #[arg(long, value_name = "LIST")]
    pub estimators: Option<String>,
    /// Gibbs sweeps between retained torus observations.
    #[arg(long = "gibbs-thin", value_name = "N")]
    pub gibbs_thin: Option<String>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub chain: Chain,
    /// Data file: a `# manifold=..` header, then one JSON array per line.
    #[arg(long, value_name = "FILE")]
    pub data: Option<String>,
    /// sample_frechet, mle, mre (orbit from the flags), mre_mle_orbit or mre_mom_orbit.
    #[arg(long, value_name = "ID")]
    pub estimator: Option<String>,
    #[arg(long, value_name = "X")]
    pub kappa: Option<String>,
    #[arg(long, value_name = "X")]
    pub lambda: Option<String>,
    /// Wishart degrees of freedom (SPD data).
    #[arg(long, value_name = "N")]
    pub dof: Option<String>,
    /// Comma-separated eigenvalues of the Wishart orbit for `mre`.
    #[arg(long = "sigma-eigs", value_name = "LIST")]
    pub sigma_eigs: Option<String>,
    /// Debug: write the chain's per-step trace as CSV.
    #[arg(long = "trace-out", value_name = "FILE")]
    pub trace_out: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    /// vmf, hyperbolic, langevin, wishart or torus.
    #[arg(long, value_name = "NAME")]
    pub family: Option<String>,
    /// S^d, H^d, T^d, d×d SPD, or d-row Stiefel frames.
    #[arg(long, value_name = "D")]
    pub dim: Option<String>,
    /// Stiefel column count.
    #[arg(long, value_name = "K")]
    pub cols: Option<String>,
    #[arg(long, value_name = "N")]
    pub n: Option<String>,
    #[arg(long, value_name = "X")]
    pub kappa: Option<String>,
    #[arg(long, value_name = "X")]
    pub lambda: Option<String>,
    #[arg(long, value_name = "N")]
    pub dof: Option<String>,
    /// Hyperboloid radius.
    #[arg(long, value_name = "R")]
    pub radius: Option<String>,
    /// Comma-separated diagonal of the Wishart scale matrix.
    #[arg(long = "sigma-diag", value_name = "LIST")]
    pub sigma_diag: Option<String>,
    /// Gibbs burn-in sweeps for torus draws.
    #[arg(long = "burn-in", value_name = "N")]
    pub burn_in: Option<String>,
    #[arg(long = "gibbs-thin", value_name = "N")]
    pub gibbs_thin: Option<String>,
}

#[derive(Debug, Args)]
pub struct FrechetArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "FILE")]
    pub data: Option<String>,
}
