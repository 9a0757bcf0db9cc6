use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid with n = {n} is too small, operation needs n >= {required}")]
    GridTooSmall { n: usize, required: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at node ({}, {}, {}), x = ({}, {}, {})",
        .node[0], .node[1], .node[2], .position[0], .position[1], .position[2])]
    NonFinite { node: [usize; 3], position: [f64; 3] },

    #[error("invalid decay class: {0}")]
    InvalidDecay(String),

    #[error("decay exponent gamma = {gamma} does not exceed the required {required}")]
    SlowDecay { gamma: f64, required: f64 },

    #[error(
        "field violates its decay bound at node ({}, {}, {}): |v|(1+|x|)^gamma / c = {ratio}",
        .node[0], .node[1], .node[2]
    )]
    DecayViolation { node: [usize; 3], ratio: f64 },

    #[error("Levi-Civita index {0} is outside 1..=3")]
    IndexOutOfRange(usize),

    #[error("{0}")]
    Domain(String),

    #[error("iterative solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("malformed field file at byte {offset}: {message}")]
    Format { offset: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the decay hypotheses of the potential formulas.
    pub fn is_decay_violation(&self) -> bool {
        matches!(self, Error::SlowDecay { .. } | Error::DecayViolation { .. })
    }
}
