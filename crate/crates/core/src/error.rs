use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("window miss: coefficient a_{n}^({k}) is outside its window and has no default")]
    WindowMiss { k: i64, n: i64 },
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("zero leading coefficient: {0}")]
    ZeroLeadingCoefficient(String),
    #[error("precision miss: exponent {exponent} is below the precision floor {prec}")]
    PrecisionMiss { exponent: i64, prec: i64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("budget exceeded: more than {limit} paths")]
    BudgetExceeded { limit: u64 },
    #[error("exact rational ring required")]
    ExactRingRequired,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::WindowMiss { .. } => "WindowMiss",
            Error::RingMismatch(_) => "RingMismatch",
            Error::ZeroLeadingCoefficient(_) => "ZeroLeadingCoefficient",
            Error::PrecisionMiss { .. } => "PrecisionMiss",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::ExactRingRequired => "ExactRingRequired",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::UnknownSuite(_) => "UnknownSuite",
            Error::UnknownName(_) => "UnknownName",
            Error::Invalid(_) => "Invalid",
        }
    }
}
