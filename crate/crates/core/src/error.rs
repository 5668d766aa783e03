use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed form document: {0}")]
    Parse(String),

    #[error("input polynomial is not homogeneous of the declared degree")]
    NonHomogeneous,

    #[error("zero linear factor")]
    ZeroFactor,

    #[error("conjugate pairing violated: {0}")]
    PairingViolated(String),

    #[error("transform is singular (|det| = {0:.3e})")]
    SingularTransform(f64),

    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),

    #[error("factors do not span: {0}")]
    RankDeficient(String),

    #[error("factor selection exhausted all indices: {0}")]
    SelectionExhausted(String),

    #[error("{0} out of range: {1}")]
    OutOfRange(&'static str, String),

    #[error("ill-conditioned root cluster: {0}")]
    IllConditioned(String),

    #[error("weights invalid: {0}")]
    InvalidWeights(String),

    #[error("no linearly independent factor tuple exists")]
    NoIndependentTuple,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("integer overflow during exact evaluation")]
    Overflow,

    #[error("unsupported: {0}")]
    Unsupported(String),
}
