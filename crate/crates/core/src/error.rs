use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("angle sum violated: sum of (1 - alpha) is {sum}, expected 2")]
    AngleSum { sum: f64 },

    #[error("prevertices do not close the polygon: |sum (1 - alpha_p) z_p| = {residue:.3e}")]
    Residue { residue: f64 },

    #[error("boundary polyline is not simple: segments {first} and {second} intersect ({points} samples)")]
    NotSimple {
        first: usize,
        second: usize,
        points: usize,
    },

    #[error("series holds {available} coefficients but {required} are needed")]
    SeriesTooShort { available: usize, required: usize },

    #[error("sampling grid too small: M = {m} < 4N = {min}")]
    GridTooSmall { m: usize, min: usize },

    #[error("branch unwrap failed ({context}): kernel winds by {winding:.3} rad around the torus")]
    BranchUnwrap { context: &'static str, winding: f64 },

    #[error("kernel denominator vanished at a grid node (|g(z) - g(w)| = {0:.3e})")]
    RadiiCollision(f64),

    #[error("capacity {0} is not 1; rescale the map first")]
    CapacityNotNormalized(f64),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error("eigenvalue {value} of the truncated product lies outside [0, 1)")]
    SpectrumOutOfRange { value: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("estimated memory {needed_mb} MB exceeds the budget of {budget_mb} MB")]
    MemoryBudget { needed_mb: usize, budget_mb: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
