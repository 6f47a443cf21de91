use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("operation undefined on zero input: {0}")]
    ZeroInput(&'static str),

    #[error("singular matrix: {0}")]
    Singular(&'static str),

    /// Guaranteed terms ran out before the answer could be decided.
    #[error("precision insufficient: {0}")]
    PrecisionInsufficient(String),

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("curves share a common factor")]
    CommonFactor,

    #[error("clustering ambiguity: {0}")]
    ClusterAmbiguity(String),

    #[error("genericity check failed: {0}")]
    GenericityFailure(String),
}

impl Error {
    pub(crate) fn precision(msg: impl Into<String>) -> Self {
        Error::PrecisionInsufficient(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable short tag used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::ZeroInput(_) => "zero_input",
            Error::Singular(_) => "singular",
            Error::PrecisionInsufficient(_) => "precision_insufficient",
            Error::Overflow(_) => "overflow",
            Error::InvalidInput(_) => "invalid_input",
            Error::CommonFactor => "common_factor",
            Error::ClusterAmbiguity(_) => "cluster_ambiguity",
            Error::GenericityFailure(_) => "genericity_failure",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
