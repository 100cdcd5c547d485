use thiserror::Error;

/// Errors raised across the library.
///
/// Variants are grouped by what went wrong rather than by module, so a caller
/// (the CLI in particular) can map them onto exit codes without inspecting
/// messages.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolderError {
    /// Malformed inputs: mismatched shapes, grids that differ, bad file headers.
    #[error("structural error: {0}")]
    Structural(String),

    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Unknown family name, malformed key=value spec and the like.
    #[error("configuration error: {0}")]
    Config(String),

    /// The score is +∞ (KL with a zero forecast where the outcome has mass,
    /// or a γ-score whose pseudospherical part is non-negative).
    #[error("infinite score: {0}")]
    InfiniteScore(String),

    /// ⟨g^{1+γ}⟩ vanished, or some other zero normaliser.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The requested family cannot be used by this procedure.
    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    /// Hessian not invertible.
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for HolderError {
    fn from(e: std::io::Error) -> Self {
        HolderError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HolderError>;
