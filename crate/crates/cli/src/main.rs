mod commands;
mod error;
mod output;
mod state;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use measdiv::BipartiteShape;

use commands::{parse_alpha, parse_shape, DirectionArg, FSpec, SolverSettings};
use error::CliResult;

#[derive(Parser)]
#[command(name = "measdiv", version, about = "Measured f-divergences, Uhlmann extensions and polar duality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Solver {
    /// Gradient-norm tolerance of the variational ascent.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 5000)]
    max_iter: usize,
    /// Random seed; defaults to MEASURED_DIV_SEED, then 0.
    #[arg(long, env = "MEASURED_DIV_SEED", default_value_t = 0)]
    seed: u64,
}

impl From<Solver> for SolverSettings {
    fn from(s: Solver) -> Self {
        SolverSettings { tol: s.tol, max_iter: s.max_iter, seed: s.seed }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Measured divergence of two states.
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// renyi:ALPHA, kl or tv.
        #[arg(long)]
        f: FSpec,
        #[command(flatten)]
        solver: Solver,
        /// Result record, .json or .csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Writes the optimal witness as a matrix file.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Minimizes the divergence over extensions of a marginal.
    Uhlmann {
        #[arg(long, value_enum)]
        direction: DirectionArg,
        #[arg(long)]
        fixed: PathBuf,
        #[arg(long)]
        marginal: PathBuf,
        /// dA,dR
        #[arg(long, value_parser = parse_shape)]
        shape: BipartiteShape,
        /// Renyi order; inf selects the max-divergence.
        #[arg(long, value_parser = parse_alpha)]
        alpha: f64,
        #[command(flatten)]
        solver: Solver,
        /// Writes the optimal extension as a state file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-checks the variational value against measurement searches.
    Verify {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        f: FSpec,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        solver: Solver,
    },
    /// Checks the duality between the hull relative entropy and the polar measured entropy.
    Duality {
        #[arg(long)]
        rho: PathBuf,
        /// Generator files of the convex hull.
        #[arg(long, value_delimiter = ',', required = true)]
        hull: Vec<PathBuf>,
        #[command(flatten)]
        solver: Solver,
    },
    /// Measured and sandwiched Renyi divergences over a grid of orders.
    Sweep {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_alpha)]
        alphas: Vec<f64>,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Divergence { rho, sigma, f, solver, out, witness } => commands::divergence(commands::DivergenceArgs {
            rho: &rho,
            sigma: &sigma,
            f,
            settings: solver.into(),
            out: out.as_deref(),
            witness: witness.as_deref(),
        }),
        Command::Uhlmann { direction, fixed, marginal, shape, alpha, solver, out } => {
            commands::uhlmann(commands::UhlmannArgs {
                direction,
                fixed: &fixed,
                marginal: &marginal,
                shape,
                alpha,
                settings: solver.into(),
                out: out.as_deref(),
            })
        }
        Command::Verify { rho, sigma, f, trials, solver } => commands::verify(commands::VerifyArgs {
            rho: &rho,
            sigma: &sigma,
            f,
            trials,
            settings: solver.into(),
        }),
        Command::Duality { rho, hull, solver } => commands::duality(&rho, &hull, solver.into()),
        Command::Sweep { rho, sigma, alphas, solver, out } => {
            commands::sweep(&rho, &sigma, &alphas, solver.into(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("measdiv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
