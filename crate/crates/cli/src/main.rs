//! Command-line experiment driver.
//!
//! Exit codes: 0 when every solver converged, 2 when any hit the iteration
//! cap, 1 for a breakdown or numerical error, 3 for bad input.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{ArgGroup, Parser, ValueEnum};
use sqd_krylov::{
    run_experiment, Error, ExperimentConfig, ExperimentOutcome, PreconditionerKind, ProblemSource, Sign,
    SolverKind, SolverOptions, Status, SyntheticSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Tricg,
    Trimr,
    Symmlq,
    Minres,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecondArg {
    Identity,
    Diagonal,
    Lowrank,
}

/// Runs TriCG, TriMR, SYMMLQ and MINRES on a symmetric quasi-definite
/// system and writes residual histories as CSV.
#[derive(Debug, Parser)]
#[command(name = "sqd-krylov", version, about)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "synthetic"])))]
struct Cli {
    #[arg(long, value_enum, default_value = "all")]
    solver: SolverArg,

    /// Matrix Market file holding A.
    #[arg(long, value_name = "PATH")]
    matrix: Option<PathBuf>,

    /// Random sparse A of size M x N with the given density.
    #[arg(long, num_args = 3, value_names = ["M", "N", "DENSITY"])]
    synthetic: Option<Vec<String>>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Preconditioners for synthetic problems.
    #[arg(long, value_enum, default_value = "identity")]
    precond: PrecondArg,

    #[arg(long, default_value_t = 1e-12)]
    atol: f64,

    #[arg(long, default_value_t = 1e-10)]
    rtol: f64,

    /// Iteration cap; defaults to 2(m + n).
    #[arg(long)]
    maxit: Option<usize>,

    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    tau: i8,

    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    nu: i8,

    /// Adds this multiple of the identity to N.
    #[arg(long, default_value_t = 0.0)]
    nshift: f64,

    /// Recompute the residual from scratch at every iteration.
    #[arg(long)]
    explicit_residual: bool,

    /// Directory for the residual-history CSV files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.summary());
            ExitCode::from(exit_code(&out))
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<ExperimentOutcome> {
    let tau = Sign::try_from(cli.tau).context("--tau")?;
    let nu = Sign::try_from(cli.nu).context("--nu")?;
    if tau == Sign::Zero {
        bail!("--tau must be 1 or -1");
    }
    let source = match (&cli.matrix, &cli.synthetic) {
        (Some(path), None) => ProblemSource::MatrixMarket {
            path: path.clone(),
            tau,
            nu,
            nshift: cli.nshift,
        },
        (None, Some(v)) => {
            let m: usize = v[0].parse().context("--synthetic M")?;
            let n: usize = v[1].parse().context("--synthetic N")?;
            let density: f64 = v[2].parse().context("--synthetic DENSITY")?;
            let mut spec = SyntheticSpec::new(m, n, density, cli.seed);
            spec.tau = tau;
            spec.nu = nu;
            spec.nshift = cli.nshift;
            spec.preconditioner = match cli.precond {
                PrecondArg::Identity => PreconditionerKind::Identity,
                PrecondArg::Diagonal => PreconditionerKind::Diagonal,
                PrecondArg::Lowrank => PreconditionerKind::DiagonalPlusLowRank { rank: 2 },
            };
            ProblemSource::Synthetic(spec)
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let config = ExperimentConfig {
        source,
        solvers: solvers(cli.solver, tau, nu),
        options: SolverOptions {
            atol: cli.atol,
            rtol: cli.rtol,
            max_iterations: cli.maxit,
            explicit_residual: cli.explicit_residual,
            ..SolverOptions::default()
        },
        output_dir: cli.out.clone(),
    };
    Ok(run_experiment(&config)?)
}

// `all` leaves out TriCG unless τν = −1, the only sign pattern it handles.
fn solvers(arg: SolverArg, tau: Sign, nu: Sign) -> Vec<SolverKind> {
    match arg {
        SolverArg::Tricg => vec![SolverKind::TriCg],
        SolverArg::Trimr => vec![SolverKind::TriMr],
        SolverArg::Symmlq => vec![SolverKind::Symmlq],
        SolverArg::Minres => vec![SolverKind::Minres],
        SolverArg::All => SolverKind::ALL
            .into_iter()
            .filter(|&k| k != SolverKind::TriCg || tau.as_i8() * nu.as_i8() == -1)
            .collect(),
    }
}

// The most severe outcome wins: input error, then iteration cap, then
// breakdown.
fn exit_code(out: &ExperimentOutcome) -> u8 {
    let mut code = 0;
    for run in &out.runs {
        let c = match &run.outcome {
            Err(Error::Io(_) | Error::Csv(_) | Error::Format(_) | Error::Parse { .. }) => 3,
            Err(
                Error::UnsupportedSigns { .. }
                | Error::InvalidArgument(_)
                | Error::DegenerateRhs(_)
                | Error::ZeroInitialVector(_)
                | Error::MissingForwardOperator(_)
                | Error::Shape { .. },
            ) => 3,
            Err(_) => 1,
            Ok(r) => match r.status {
                Status::Converged => 0,
                Status::MaxIterations => 2,
                Status::BreakdownTerminated | Status::Error => 1,
            },
        };
        code = code.max(c);
    }
    code
}
