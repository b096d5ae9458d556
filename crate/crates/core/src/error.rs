use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph error: {0}")]
    Graph(String),

    #[error("attribute panel error: {0}")]
    Panel(String),

    #[error("model specification error: {0}")]
    Model(String),

    #[error("unknown attribute `{0}` referenced by a model term")]
    UnknownAttribute(String),

    #[error("unknown edge covariate `{0}` referenced by a model term")]
    UnknownCovariate(String),

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("state space too large for exact enumeration: {0}")]
    StateSpaceTooLarge(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("model degeneracy: {0}")]
    Degenerate(String),

    #[error("goodness-of-fit refused: fit did not converge (pass override to force)")]
    NonConvergedFit,

    #[error("goodness-of-fit is not implemented for valued models")]
    ValuedGofUnsupported,

    #[error("pipeline error: {0}")]
    Pipeline(String),

    #[error("imputation left uncovered gaps: {0}")]
    UncoveredGaps(String),

    #[error("format error in {file}: {message}")]
    Format { file: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
