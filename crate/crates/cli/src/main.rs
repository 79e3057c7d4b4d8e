use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entrolab_cli::config::{parse_quadrature, parse_tolerance, DEFAULT_EPSILON, DEFAULT_SEED, DEFAULT_TRIALS};
use entrolab_cli::{execute, CliError, Command, InspectInputs, OutputFormat, RunConfig, SweepOptions, EXIT_CONFIG};
use entrolab_core::linalg::BipartiteDims;
use entrolab_core::statesgen::{EnsembleKind, TauKind};

/// Numerical checks of the quasi-factorization bound for quantum relative entropy.
#[derive(Parser)]
#[command(name = "entrolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every check over seeded random pairs.
    Verify {
        #[command(flatten)]
        checks: CheckArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate ||H||, ||L||, alpha and the achieved ratio over epsilon.
    Sweep {
        #[command(flatten)]
        checks: CheckArgs,
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Comma-separated epsilon grid (default 0, 0.05, ..., 1).
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        /// Perturbation: ginibre or maximally_entangled.
        #[arg(long, default_value = "ginibre")]
        tau: String,
    },
    /// Print the full breakdown for a pair of matrix files.
    Inspect {
        #[command(flatten)]
        checks: CheckArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
    },
    /// Re-run a configuration, e.g. one copied from a report header.
    Replay {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Args)]
struct CheckArgs {
    /// Subsystem dimensions.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [2, 2])]
    dims: Vec<usize>,
    /// Quadrature for the modular-average channel.
    #[arg(long, value_name = "T,PANELS,NODES")]
    quadrature: Option<String>,
    /// Override a tolerance (inequality, composite, nonnegativity, homogeneity).
    #[arg(long = "tolerance", value_name = "NAME=VAL")]
    tolerances: Vec<String>,
    /// Mix rank-deficient inputs with a little of the maximally mixed state.
    #[arg(long)]
    smooth: bool,
}

#[derive(Args)]
struct EnsembleArgs {
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, env = "ENTROLAB_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// ginibre_full_rank, product, product_perturbed, pure_smoothed or classical_diagonal.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct OutputArgs {
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

fn base_config(command: Command, checks: &CheckArgs, output: &OutputArgs) -> Result<RunConfig, CliError> {
    let dims = BipartiteDims::new(checks.dims[0], checks.dims[1])?;
    let mut cfg = RunConfig::new(command, dims);
    if let Some(q) = &checks.quadrature {
        cfg.quadrature = parse_quadrature(q)?;
    }
    for t in &checks.tolerances {
        let (name, value) = parse_tolerance(t)?;
        cfg.tolerance_overrides.insert(name, value);
    }
    cfg.smooth = checks.smooth;
    cfg.format = output.format.parse::<OutputFormat>()?;
    cfg.out = output.out.clone();
    cfg.timestamp = !output.no_timestamp;
    Ok(cfg)
}

fn apply_ensemble(cfg: &mut RunConfig, e: &EnsembleArgs) -> Result<(), CliError> {
    cfg.trials = e.trials;
    cfg.ensemble.seed = e.seed;
    cfg.ensemble.epsilon = e.epsilon;
    if let Some(kind) = &e.ensemble {
        cfg.ensemble.kind = kind.parse::<EnsembleKind>()?;
    }
    cfg.jobs = e.jobs;
    Ok(())
}

fn build(cli: Cli) -> Result<RunConfig, CliError> {
    let cfg = match cli.command {
        Cmd::Verify { checks, ensemble, output } => {
            let mut cfg = base_config(Command::Verify, &checks, &output)?;
            apply_ensemble(&mut cfg, &ensemble)?;
            cfg
        }
        Cmd::Sweep { checks, ensemble, output, epsilons, tau } => {
            let mut cfg = base_config(Command::Sweep, &checks, &output)?;
            apply_ensemble(&mut cfg, &ensemble)?;
            let mut sweep = SweepOptions::default();
            if let Some(eps) = epsilons {
                sweep.epsilons = eps;
            }
            sweep.tau = tau.parse::<TauKind>()?;
            cfg.sweep = Some(sweep);
            cfg
        }
        Cmd::Inspect { checks, output, rho, sigma } => {
            let mut cfg = base_config(Command::Inspect, &checks, &output)?;
            cfg.inputs = Some(InspectInputs { rho, sigma });
            cfg
        }
        Cmd::Replay { config, jobs } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
            let mut cfg: RunConfig = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            cfg.jobs = jobs;
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match build(cli) {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            eprintln!("entrolab: {e}");
            EXIT_CONFIG
        }
    };
    ExitCode::from(code as u8)
}
