use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent caller input.
    #[error("input error: {0}")]
    Input(String),

    /// Structural problem with a causal model (cycles, missing mechanisms).
    #[error("model error: {0}")]
    Model(String),

    /// A formula hit a zero-mass conditioning event or zero denominator.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Observed tables that no model can reproduce.
    #[error("data error: {0}")]
    Data(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("canonical space has {atoms} atoms, above the limit of {limit}")]
    AtomLimit { atoms: u128, limit: u128 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("pair ({d} over {d_star}): {source}")]
    Pair {
        d: String,
        d_star: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }

    /// Innermost error once pair wrappers are peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Pair { source, .. } => source.root(),
            other => other,
        }
    }
}
