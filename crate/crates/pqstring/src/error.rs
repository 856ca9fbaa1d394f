use thiserror::Error;

/// Errors produced by the symbolic and numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid symbol name `{0}`")]
    InvalidSymbol(String),

    #[error("cyclic substitution: `{0}` appears in a rule image")]
    CyclicSubstitution(String),

    #[error("not a total derivative: {0}")]
    NotExact(String),

    #[error("coefficient of D^{requested} requested below the valid horizon D^{horizon}")]
    HorizonUnderflow { requested: i32, horizon: i32 },

    #[error("operator is not monic of order {0}")]
    NonMonic(usize),

    #[error("operator has a nonzero D^{0} coefficient")]
    SubleadingTerm(usize),

    #[error("expected a purely differential operator")]
    NotDifferential,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unresolved jets after substitution: {0}")]
    Unresolved(String),

    #[error("Newton iteration failed after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("pole detected near x = {x}")]
    Pole { x: f64 },

    #[error("step size collapsed at lambda = {lambda}")]
    StepCollapse { lambda: f64 },

    #[error("Wronskian drift {drift:e} exceeds tolerance {tol:e}")]
    WronskianDrift { drift: f64, tol: f64 },

    #[error("lambda = {0} lies outside the integrated range")]
    OutOfRange(f64),

    #[error("factorization breakdown: {0}")]
    Factorization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("golden mismatch: {0}")]
    GoldenMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
