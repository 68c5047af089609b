use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::baselines::{minres_solve, symmlq_solve, FullSystemView};
use crate::error::{Error, Result};
use crate::operators::{OperatorHandle, SpdOperator};
use crate::problem::{Sign, SolverOptions, SqdProblem};
use crate::report::SolveReport;
use crate::tricg::tricg_solve;
use crate::trimr::trimr_solve;

use super::generate::{build_known_solution, generate_sqd, SyntheticSpec};
use super::matrix_market::read_matrix_market;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    TriCg,
    TriMr,
    Symmlq,
    Minres,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::TriCg, SolverKind::TriMr, SolverKind::Symmlq, SolverKind::Minres];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::TriCg => "tricg",
            SolverKind::TriMr => "trimr",
            SolverKind::Symmlq => "symmlq",
            SolverKind::Minres => "minres",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown solver {s:?}")))
    }
}

/// Runs one solver on a problem. The baselines go through
/// [`FullSystemView`], so they need forward preconditioners.
pub fn solve_with(kind: SolverKind, problem: &SqdProblem, opts: &SolverOptions) -> Result<SolveReport> {
    match kind {
        SolverKind::TriCg => tricg_solve(problem, opts),
        SolverKind::TriMr => trimr_solve(problem, opts),
        SolverKind::Symmlq => symmlq_solve(&FullSystemView::new(problem)?, opts),
        SolverKind::Minres => minres_solve(&FullSystemView::new(problem)?, opts),
    }
}

/// Where the system comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    /// `A` from a Matrix Market file, `M = I`, `N = (1 + nshift)I`, and the
    /// right-hand side that makes the vector of ones the solution.
    MatrixMarket {
        path: PathBuf,
        tau: Sign,
        nu: Sign,
        nshift: f64,
    },
    Synthetic(SyntheticSpec),
}

impl ProblemSource {
    /// A short name used in CSV file names.
    pub fn name(&self) -> String {
        match self {
            ProblemSource::MatrixMarket { path, .. } => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "matrix".into()),
            ProblemSource::Synthetic(s) => format!("synthetic_{}x{}_seed{}", s.m, s.n, s.seed),
        }
    }

    pub fn build(&self) -> Result<SqdProblem> {
        match self {
            ProblemSource::MatrixMarket { path, tau, nu, nshift } => {
                let a = read_matrix_market(path)?;
                let (m, n) = (a.nrows(), a.ncols());
                let nn = SpdOperator::identity(n).shifted(*nshift)?;
                build_known_solution(OperatorHandle::from_csr(a), &SpdOperator::identity(m), &nn, *tau, *nu)
            }
            ProblemSource::Synthetic(spec) => generate_sqd(spec),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: ProblemSource,
    pub solvers: Vec<SolverKind>,
    pub options: SolverOptions,
    /// Directory for the residual-history CSV files; `None` writes nothing.
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.solvers.is_empty() {
            return Err(Error::InvalidArgument("at least one solver is required".into()));
        }
        self.options.validate()
    }
}

/// One solver's part of an experiment.
#[derive(Debug)]
pub struct SolverRun {
    pub solver: SolverKind,
    /// A setup failure (such as TriCG asked to solve a definite system)
    /// is kept here instead of aborting the experiment.
    pub outcome: Result<SolveReport>,
    pub csv_path: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub problem: String,
    pub dims: (usize, usize),
    pub runs: Vec<SolverRun>,
}

impl ExperimentOutcome {
    pub fn run(&self, kind: SolverKind) -> Option<&SolverRun> {
        self.runs.iter().find(|r| r.solver == kind)
    }

    /// One line per solver: status, iterations and final residual.
    pub fn summary(&self) -> String {
        let (m, n) = self.dims;
        let mut s = format!("problem {} ({m} x {n})\n", self.problem);
        for run in &self.runs {
            match &run.outcome {
                Ok(r) => s.push_str(&format!(
                    "{:<7} {:<20} iterations {:>6}  residual {:.3e}\n",
                    run.solver,
                    r.status.as_str(),
                    r.iterations,
                    r.final_residual()
                )),
                Err(e) => s.push_str(&format!("{:<7} failed: {e}\n", run.solver)),
            }
        }
        s
    }
}

/// Builds the problem, runs every solver (in parallel, one thread each) and
/// writes one `iter,rnorm` CSV per successful solver.
///
/// ```
/// use sqd_krylov::{run_experiment, ExperimentConfig, ProblemSource, SolverKind, SolverOptions, SyntheticSpec};
///
/// let dir = std::env::temp_dir().join("sqd_krylov_doc_experiment");
/// let config = ExperimentConfig {
///     source: ProblemSource::Synthetic(SyntheticSpec::new(30, 20, 0.2, 1)),
///     solvers: SolverKind::ALL.to_vec(),
///     options: SolverOptions::default(),
///     output_dir: Some(dir.clone()),
/// };
/// let out = run_experiment(&config)?;
/// assert!(out.runs.iter().all(|r| r.outcome.as_ref().unwrap().converged()));
/// assert!(dir.join("synthetic_30x20_seed1_tricg.csv").exists());
/// # Ok::<(), sqd_krylov::Error>(())
/// ```
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let problem = config.source.build()?;
    let name = config.source.name();
    if let Some(dir) = &config.output_dir {
        fs::create_dir_all(dir)?;
    }
    let outcomes: Vec<Result<SolveReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = config
            .solvers
            .iter()
            .map(|&kind| {
                let problem = &problem;
                s.spawn(move || solve_with(kind, problem, &config.options))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
    });

    let mut runs = Vec::with_capacity(outcomes.len());
    for (&solver, outcome) in config.solvers.iter().zip(outcomes) {
        let mut csv_path = None;
        if let (Some(dir), Ok(report)) = (&config.output_dir, &outcome) {
            let path = dir.join(format!("{name}_{solver}.csv"));
            write_history_csv(&path, &report.residual_history)?;
            csv_path = Some(path);
        }
        runs.push(SolverRun {
            solver,
            outcome,
            csv_path,
        });
    }
    Ok(ExperimentOutcome {
        problem: name,
        dims: problem.dims(),
        runs,
    })
}

/// Writes `iter,rnorm` rows from `k = 0` with 17 significant digits, so
/// [`read_history_csv`] returns the same values bit for bit.
pub fn write_history_csv(path: impl AsRef<Path>, history: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(["iter", "rnorm"])?;
    for (k, r) in history.iter().enumerate() {
        w.write_record([k.to_string(), format!("{r:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["iter", "rnorm"] {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header iter,rnorm, found {}", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let bad = |m: String| Error::Parse { line, message: m };
        let iter: usize = rec[0].parse().map_err(|_| bad(format!("invalid iteration {:?}", &rec[0])))?;
        if iter != k {
            return Err(bad(format!("expected iteration {k}, found {iter}")));
        }
        out.push(rec[1].parse().map_err(|_| bad(format!("invalid residual {:?}", &rec[1])))?);
    }
    Ok(out)
}
