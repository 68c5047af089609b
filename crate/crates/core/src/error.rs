use std::fmt;

/// Which half of the block right-hand side `(b, c)` an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// The leading block `b` (length `m`), paired with `M`.
    B,
    /// The trailing block `c` (length `n`), paired with `N`.
    C,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::B => f.write_str("b"),
            Block::C => f.write_str("c"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("matrix not symmetric: entries ({row}, {col}) and ({col}, {row}) differ")]
    NotSymmetric { row: usize, col: usize },

    #[error("matrix not SPD: pivot {pivot:e} at index {index}")]
    NotSpd { index: usize, pivot: f64 },

    #[error("zero initial vector: block {0} of the right-hand side is zero")]
    ZeroInitialVector(Block),

    #[error("preconditioner not SPD: squared norm {value:e} for block {block} at step {step}")]
    PreconditionerNotSpd { block: Block, step: usize, value: f64 },

    #[error("factorization pivot underflow at step {step}: |d| = {value:e}")]
    PivotUnderflow { step: usize, value: f64 },

    #[error("unsupported sign pattern (tau = {tau}, nu = {nu}) for {solver}")]
    UnsupportedSigns {
        solver: &'static str,
        tau: i8,
        nu: i8,
    },

    #[error("forward operator for {0} is required but was not supplied")]
    MissingForwardOperator(&'static str),

    #[error("degenerate right-hand side: block {0} is zero; choose a different right-hand side")]
    DegenerateRhs(Block),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported Matrix Market header: {0}")]
    Format(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Shape {
            context,
            expected,
            found,
        })
    }
}
