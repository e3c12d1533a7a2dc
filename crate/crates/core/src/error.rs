use thiserror::Error;

/// Errors raised by the spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The energy sits on (or too close to) a Dirichlet eigenvalue of an edge,
    /// where `1/s(l; E + k_R^2)` is undefined.
    #[error("energy {energy} is within Dirichlet proximity of edge {edge} (s = {s:e})")]
    NearSingular { edge: usize, energy: f64, s: f64 },

    #[error("flux omega = {omega} is not commensurate with an N = {n} torus")]
    Incommensurate { omega: f64, n: usize },

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
