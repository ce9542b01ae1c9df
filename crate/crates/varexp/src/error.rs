use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),
    #[error("invalid exponent field: {0}")]
    InvalidExponent(String),
    #[error("supercritical exponent at cell {cell}: q exceeds p* by {excess:.6e}")]
    SupercriticalExponent { cell: usize, excess: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("no convergence after {0} iterations")]
    NonConvergence(u32),
    #[error("the zero function cannot be projected onto the unit ball")]
    ZeroFunction,
    #[error("infeasible problem: {0}")]
    InfeasibleProblem(String),
    #[error("ball radius {radius} below resolution limit {min}")]
    BallTooSmall { radius: f64, min: f64 },
    #[error("dichotomy classification needs at least 3 records, got {0}")]
    TooFewRecords(usize),
    #[error("bubble support touches the boundary: {0}")]
    BubbleTouchesBoundary(String),
    #[error("bubble target mass infeasible: {0}")]
    TargetMassInfeasible(String),
    #[error("bubble supports of atoms {0} and {1} overlap")]
    OverlappingSupports(usize, usize),
    #[error("atom masses sum to {0}; the total must stay strictly below 1")]
    MassBudgetExceeded(f64),
    #[error("no localized constant supplied for atom cell {0}")]
    MissingLocalizedConstant(usize),
    #[error("critical set is empty")]
    EmptyCriticalSet,
    #[error("sobolev conjugate is infinite at cell {0}")]
    InfiniteSobolevConjugate(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
