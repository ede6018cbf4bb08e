use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (Frobenius defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operator contains non-finite entries")]
    NonFinite,

    #[error("{0} requires a pure state")]
    MixedState(&'static str),

    #[error("{0} requires a full-Schmidt-rank state")]
    NotFullRank(&'static str),

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid strategy:\n{0}")]
    InvalidStrategy(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("negative quadratic form {value:e} for {context}; the measurement is not a valid POVM")]
    NegativeDefect { context: String, value: f64 },

    #[error("auxiliary state is entangled (Schmidt rank {schmidt_rank}); a product ancilla is required")]
    EntangledAux { schmidt_rank: usize },

    #[error("top eigenvalue has multiplicity {multiplicity}; the eigengap bound needs a simple top eigenvalue")]
    DegenerateTopEigenvalue { multiplicity: usize },

    #[error("reference state does not span the top eigenspace (overlap {overlap})")]
    NotTopEigenvector { overlap: f64 },

    #[error("could not recover an auxiliary state (norm {norm:e}); the witness does not factor through the target state")]
    AuxRecovery { norm: f64 },

    #[error("{what} is not an isometry (defect {defect:e})")]
    NotIsometry { what: String, defect: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("states are linearly dependent")]
    LinearlyDependent,

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(context: impl Into<String>, expected: usize, found: usize) -> Error {
    Error::DimensionMismatch {
        context: context.into(),
        expected,
        found,
    }
}
