use std::fmt;
use std::time::Duration;

use crate::vector::DenseVector;

/// Why a solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    MaxIterations,
    /// The Krylov basis could not be extended and the residual was still
    /// above tolerance.
    BreakdownTerminated,
    /// A numerical failure mid-run (pivot underflow, non-finite value).
    /// [`SolveReport::message`] says which.
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIterations => "max_iterations",
            Status::BreakdownTerminated => "breakdown_terminated",
            Status::Error => "error",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Outcome of one solve.
///
/// `residual_history[k]` is `‖rₖ‖_{H⁻¹}`, starting at `k = 0`, so its length
/// is always `iterations + 1`.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: Status,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub x: DenseVector,
    pub y: DenseVector,
    pub elapsed: Duration,
    pub message: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history always holds r₀")
    }
}
