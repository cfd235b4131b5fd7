//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    VarCountMismatch(usize, usize),
    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("division by zero scalar")]
    DivisionByZero,
    #[error("imaginary coefficients require gaussian field mode")]
    RationalModeViolation,
    #[error("operation requires gaussian field mode")]
    NotGaussianMode,
    #[error("rescaling factor must be nonzero")]
    ZeroRescale,
    #[error("frame is not isotropic: pairing of generators {0} and {1} is {2}")]
    NotIsotropic(usize, usize, String),
    #[error("family has generic rank {found}, expected {expected}")]
    RankDefect { expected: usize, found: usize },
    #[error("product of families is not generically lagrangian (pruned rank {found} of {expected})")]
    ProductNotGenericallyLagrangian { expected: usize, found: usize },
    #[error("stretch result has generic rank {found}, expected {expected}")]
    StretchRankDefect { expected: usize, found: usize },
    #[error("shift result has generic rank {found}, expected {expected}")]
    ShiftRankDefect { expected: usize, found: usize },
    #[error("distribution frame has generic rank {found}, declared {declared}")]
    DistributionRankDefect { declared: usize, found: usize },
    #[error("matrix must be antisymmetric: entry ({0},{1})")]
    NotAntisymmetric(usize, usize),
    #[error("pushforward is not basic: coefficient {coefficient} of generator {generator} depends on fiber coordinate x{fiber}")]
    NotProjectable {
        generator: usize,
        coefficient: String,
        fiber: usize,
    },
    #[error("witness subbundle is not adapted: E ∩ TX does not match the projection fibers ({0})")]
    NotAdapted(String),
    #[error("distribution is not spanned by constant coordinate directions: generator {0}")]
    NotCoordinateSpanned(String),
    #[error("coordinate change matrix is not invertible")]
    SingularCoordinateChange,
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("document error: {0}")]
    Document(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
