use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NonHermitian(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("operator is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("not a density matrix: {0}")]
    NotDensity(String),
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimOverflow { dim: usize, cap: usize },
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("zero operator is not a valid argument")]
    ZeroOperator,
    #[error("epsilon must lie in (0,1), got {0}")]
    BadEpsilon(f64),
    #[error("prior must lie in (0,1), got {0}")]
    BadPrior(f64),
    #[error("gamma must exceed 1, got {0}")]
    BadGamma(f64),
    #[error("number of copies must be at least 1")]
    BadCopies,
    #[error("Hilbert projective divergence is infinite (supports differ)")]
    InfiniteOmega,
    #[error("Thompson divergence is infinite (supports differ)")]
    InfiniteXi,
    #[error("no state in the convex set yields a finite value")]
    NoFiniteValue,
    #[error("invalid Kraus operators: {0}")]
    InvalidKraus(String),
    #[error("invalid Choi matrix: {0}")]
    InvalidChoi(String),
    #[error("invalid POVM: {0}")]
    InvalidPovm(String),
    #[error("no conclusive probability mass under {0}")]
    NoConclusiveMass(&'static str),
    #[error("POVM violates the error constraint: {0}")]
    InfeasiblePovm(String),
    #[error("states live on different cones")]
    ConeMismatch,
    #[error("operation not supported for this cone variant: {0}")]
    UnsupportedVariant(&'static str),
    #[error("invalid cone model: {0}")]
    InvalidCone(String),
    #[error("invalid GPT state: {0}")]
    InvalidState(String),
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonHermitian(_) => "NonHermitian",
            Error::NotSquare { .. } => "NotSquare",
            Error::NotPsd(_) => "NotPsd",
            Error::NotDensity(_) => "NotDensity",
            Error::DimOverflow { .. } => "DimOverflow",
            Error::DimMismatch(_) => "DimMismatch",
            Error::ZeroOperator => "ZeroOperator",
            Error::BadEpsilon(_) => "BadEpsilon",
            Error::BadPrior(_) => "BadPrior",
            Error::BadGamma(_) => "BadGamma",
            Error::BadCopies => "BadCopies",
            Error::InfiniteOmega => "InfiniteOmega",
            Error::InfiniteXi => "InfiniteXi",
            Error::NoFiniteValue => "NoFiniteValue",
            Error::InvalidKraus(_) => "InvalidKraus",
            Error::InvalidChoi(_) => "InvalidChoi",
            Error::InvalidPovm(_) => "InvalidPovm",
            Error::NoConclusiveMass(_) => "NoConclusiveMass",
            Error::InfeasiblePovm(_) => "InfeasiblePovm",
            Error::ConeMismatch => "ConeMismatch",
            Error::UnsupportedVariant(_) => "UnsupportedVariant",
            Error::InvalidCone(_) => "InvalidCone",
            Error::InvalidState(_) => "InvalidState",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }

    /// True for errors caused by malformed or out-of-range input, as opposed
    /// to a well-posed computation that has no finite answer.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::InfiniteOmega
                | Error::InfiniteXi
                | Error::NoFiniteValue
                | Error::NoConclusiveMass(_)
                | Error::InfeasiblePovm(_)
                | Error::UnsupportedVariant(_)
                | Error::DimOverflow { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
