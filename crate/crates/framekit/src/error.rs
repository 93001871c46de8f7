//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("observables live on different phase spaces")]
    SpaceMismatch,

    #[error("unsupported degree: {0}")]
    UnsupportedDegree(String),

    #[error("matrix is not symplectic: entry ({row},{col}) of M^T Omega M is {value}")]
    NotSymplectic { row: usize, col: usize, value: String },

    #[error("flow generator is not nilpotent; no exact rational flow exists")]
    NonNilpotentFlow,

    #[error("inconsistent dynamics (consistency reached 1 = 0): {0}")]
    InconsistentDynamics(String),

    #[error("singular second-class matrix C")]
    SingularC,

    #[error("gauge generator is not first class: {0}")]
    NotFirstClass(String),

    #[error("free multipliers without supplied values: {0:?}")]
    FreeMultipliers(Vec<String>),

    #[error("embedding does not annihilate constraint `{0}`")]
    EmbeddingConstraint(String),

    #[error("embedding matrix is rank deficient")]
    EmbeddingRank,

    #[error("no solution: violated condition {0}")]
    NoSolution(String),

    #[error("invalid abelian conversion matrix X: {0}")]
    InvalidX(String),

    #[error("unsupported gauge condition: {0}")]
    UnsupportedGauge(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("frames belong to different systems")]
    FrameMismatch,

    #[error("trivialized constraint is not supported on a single coordinate: {0}")]
    Reduction(String),

    #[error("no real-logarithm factorization found; spectrum: {0}")]
    Representation(String),

    #[error("map rejected: not symplectic within tolerance ({0})")]
    FloatSymplectic(String),

    #[error("coordinate already sharp: zero variance in conditioned coordinate")]
    AlreadySharp,

    #[error("covariance violates the uncertainty bound (min eigenvalue {0})")]
    Unphysical(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
