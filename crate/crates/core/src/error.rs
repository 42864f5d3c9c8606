use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Matrix failed a Cholesky factorization. Carries the eigenvalue range of the
    /// symmetrized input so callers can see how far from SPD it was.
    #[error("matrix is not positive definite (n={dim}, min eig {min_eig:.3e}, max eig {max_eig:.3e})")]
    NotPositiveDefinite {
        dim: usize,
        min_eig: f64,
        max_eig: f64,
    },

    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("gate decision does not match measurements: {0}")]
    DecisionMismatch(String),

    #[error("vote grid was not built from this cloud: {0}")]
    GridMismatch(String),

    #[error("no cluster on the {0} side")]
    NoWallOnSide(&'static str),

    #[error("rank-deficient design matrix: {0}")]
    RankDeficient(String),

    #[error("no feasible path: every node of layer {layer} is blocked")]
    NoFeasiblePath { layer: usize },

    #[error("node (layer {layer}, offset index {offset}) is not in the road graph")]
    UnknownNode { layer: usize, offset: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}
