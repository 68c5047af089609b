//! Problem construction, experiment driver and CSV output.

mod experiment;
mod generate;
mod matrix_market;

pub use experiment::{
    read_history_csv, run_experiment, solve_with, write_history_csv, ExperimentConfig, ExperimentOutcome,
    ProblemSource, SolverKind, SolverRun,
};
pub use generate::{
    build_known_solution, build_sqd_from_a, generate_random_sparse, generate_random_sqd, generate_sqd,
    PreconditionerKind, SyntheticSpec,
};
pub use matrix_market::{parse_matrix_market, read_matrix_market, write_matrix_market};
