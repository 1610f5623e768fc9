use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {detail}")]
    MalformedRow { row: usize, detail: String },

    #[error("row {row}: time {time} decreases below {prev} beyond tolerance")]
    OrderViolation { row: usize, prev: f64, time: f64 },

    #[error("message/orderbook streams misaligned: {messages} message rows vs {orderbook} orderbook rows")]
    StreamMisalignment { messages: usize, orderbook: usize },

    #[error("crossed book at index {index}: ask {ask} < bid {bid}")]
    CrossedBook { index: usize, bid: i64, ask: i64 },

    #[error("invalid session config: {0}")]
    InvalidSession(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no {0} jumps observed; both signs are required")]
    MissingState(&'static str),

    #[error("quantile binning collapsed below two states")]
    DegenerateBinning,

    #[error("state {state} has no outgoing transition; row undefined")]
    UndefinedRow { state: usize },

    #[error("state {state} never occurs as a predecessor; sojourn mean undefined")]
    UndefinedSojournMean { state: usize },

    #[error("transition matrix is reducible; no unique stationary distribution")]
    ReducibleChain,

    #[error("matrix is singular or ill-conditioned (condition estimate {cond:.3e})")]
    Singular { cond: f64 },

    #[error("singular denominator: p_cont + p_cont' = 2")]
    SingularDenominator,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no spread-delta time observed; intensities undefined")]
    UndefinedIntensity,

    #[error("quadrature did not reach requested accuracy (error estimate {0:.3e})")]
    Accuracy(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("regressor has zero variance; fit is singular")]
    SingularFit,

    #[error("no qualifying observations; density is empty")]
    EmptyDensity,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
