use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    #[error("frequency must be finite, got {0}")]
    NonFiniteFrequency(f64),

    #[error("equal wave speeds (k1/rho1 = k2/rho2): {0}")]
    EqualSpeeds(String),

    #[error("distinct wave speeds: {0}")]
    DistinctSpeeds(String),

    #[error("integration failed at xi={xi}: step size underflow near t={t_reached}")]
    StepUnderflow { xi: f64, t_reached: f64 },

    #[error("time grid invalid: {0}")]
    BadTimeGrid(String),

    #[error("empty lambda4 interval: lower bound {lo} >= upper bound {hi}")]
    EmptyLambdaInterval { lo: f64, hi: f64 },

    #[error("coefficients were selected at xi={expected} but evaluated at xi={got}")]
    MismatchedXi { expected: f64, got: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("non-positive value where positive is required: {0}")]
    NonPositive(String),

    #[error("no decay detected for distinct speeds (possible bug): {0}")]
    DecayAnomaly(String),

    #[error("eigendecomposition failed: {0}")]
    Eig(String),

    #[error("physical reconstruction under-resolved: {0}")]
    Resolution(String),

    #[error("derivative order out of range: {0}")]
    OrderOutOfRange(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
