#[cfg(doctest)]
mod book;
mod baselines;
mod error;
mod givens;
mod harness;
mod operators;
mod problem;
mod report;
mod ssy;
mod tricg;
mod trimr;
mod vector;

pub use baselines::{minres_solve, symmlq_solve, FullSystemView};
pub use error::{Block, Error, Result};
pub use operators::{
    spd_inverse_from_dense, Cholesky, CsrMatrix, LinearOperator, OperatorHandle, SpdInverse, SpdKind, SpdOperator,
};
pub use problem::{stopping_check, Sign, SolverOptions, SqdProblem};
pub use report::{SolveReport, Status};
pub use ssy::{
    assemble_s, block_lanczos_reference, BlockLanczosBasis, BlockLanczosStatus, SsyCoefficients, SsyProcess, SsyStep,
    StorageReport,
};
pub use vector::{weighted_dot, DenseVector};
pub use harness::{
    build_known_solution, build_sqd_from_a, generate_random_sparse, generate_random_sqd, generate_sqd, parse_matrix_market,
    read_history_csv, read_matrix_market, run_experiment, solve_with, write_history_csv, write_matrix_market,
    ExperimentConfig, ExperimentOutcome, PreconditionerKind, ProblemSource, SolverKind, SolverRun, SyntheticSpec,
};
pub use givens::{sym_givens, GivensPair};
pub use tricg::{
    ldlt_step, tricg_pi_update, tricg_residual_norm, tricg_solve, LdltHistory, LdltScalars, PiHistory, TriCg, TriCgStep,
};
pub use trimr::{trimr_pbar_update, trimr_solve, PiBarUpdate, QrColumns, StreamingQr, TriMr, TriMrStep};
