use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate lattice: {0}")]
    Degenerate(String),

    #[error("zero vector has no divisibility or primitivity")]
    ZeroVector,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not an isometry of lattice {0}")]
    NotIsometry(String),

    #[error("group closure exceeded the cap of {cap} elements")]
    GroupTooLarge { cap: usize },

    #[error("element is not of finite order: {0}")]
    NotFiniteOrder(String),

    #[error("series leading coefficient {0} is not a unit")]
    NonUnitLeading(String),

    #[error("kernel lattice is not negative definite: {0}")]
    NotNegativeDefinite(String),

    #[error("operands live in different ambient lattices")]
    CrossAmbient,

    #[error("adjoint map is not integral: {0}")]
    NonIntegralAdjoint(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown reference `{0}`")]
    UnknownReference(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
