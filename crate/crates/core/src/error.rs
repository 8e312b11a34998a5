use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StargenError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("degenerate Gaussian product: {0}")]
    DegenerateProduct(String),
    #[error("star-exponential series overflowed at term {term}")]
    SeriesOverflow { term: usize },
    #[error("requested {requested} series terms, cap is {cap}")]
    SeriesCap { requested: usize, cap: usize },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("leading principal minor {index} is singular")]
    SingularMinor { index: usize },
    #[error("matrix is not diagonalizable: {0}")]
    NotDiagonalizable(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("beta is at a pole of the star-exponential (|det cos B| = {det_abs:e})")]
    Pole { det_abs: f64 },
    #[error("alpha vanishes; regularize the quadratic form (e.g. inflate its diagonal by lambda)")]
    AlphaZero,
    #[error("quadratic form is not symplectic-proportional")]
    NotProportional,
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("invalid index: {0}")]
    Index(String),
    #[error("incompatible conjugate generator: {0}")]
    IncompatibleGenerator(String),
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("divergent integrand: {0}")]
    Divergent(String),
    #[error("serialization error: {0}")]
    Serde(String),
}

pub type Result<T> = std::result::Result<T, StargenError>;

impl From<serde_json::Error> for StargenError {
    fn from(e: serde_json::Error) -> Self {
        StargenError::Serde(e.to_string())
    }
}
