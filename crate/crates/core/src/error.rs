use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure constants are not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NotAssociative(String, String, String),

    #[error("grading is not multiplicative: {0}*{1} leaves the parity {2} component")]
    GradingNotMultiplicative(String, String, u8),

    #[error("unit element fails on basis element {0}")]
    BadUnit(String),

    #[error("constraints leave an empty algebra")]
    EmptyAlgebra,

    #[error("constraints identify entries of different parity: {0}")]
    MixedParity(String),

    #[error("span of the constrained entries is not closed under multiplication: {0}")]
    NotClosed(String),

    #[error("invalid definition: {0}")]
    Definition(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("parity mismatch for argument {index}")]
    ParityMismatch { index: usize },

    #[error("degree mismatch: polynomial has degree {poly}, got {args} arguments")]
    DegreeMismatch { poly: usize, args: usize },

    #[error("value is not homogeneous")]
    NotHomogeneous,

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("missing or invalid Wedderburn data: {0}")]
    Wedderburn(String),

    #[error("unknown algebra {name}; available: {available}")]
    UnknownAlgebra { name: String, available: String },

    #[error("pattern verification failed: {0}")]
    Pattern(String),
}

pub type Result<T> = std::result::Result<T, Error>;
