use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("lambda must lie strictly between 0 and 1, got {0}")]
    LambdaOutOfRange(f64),
    #[error("anchor points span an affine subspace of dimension {affine}, expected {ambient}")]
    DegenerateAffineHull { affine: usize, ambient: usize },
    #[error("anchor points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
    #[error("at least two anchor points are required, got {0}")]
    TooFewPoints(usize),
    #[error("digit {digit} out of range for an alphabet of size {m}")]
    DigitOutOfRange { digit: usize, m: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point lies outside the convex hull of the anchor points")]
    PointOutsideOmega,
    #[error("node budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("no-holes certificate does not match this system")]
    CertificateMismatch,
    #[error("no block length found within {0} iterations")]
    NoEllFound(usize),
    #[error("digits must be strictly increasing")]
    UnsortedDigits,
    #[error("exact arithmetic requires rational input: {0}")]
    IrrationalInput(String),
    #[error("invalid probability vector: {0}")]
    BadProbabilityVector(String),
    #[error("need at least 3 distinct decreasing scales, got {0}")]
    TooFewScales(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
