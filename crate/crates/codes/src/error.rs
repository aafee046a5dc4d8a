use thiserror::Error;

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("no symbol mapping with d <= {d_max} approximates the pmf within {tol} (best error {best})")]
    ToleranceUnachievable { d_max: usize, tol: f64, best: f64 },

    #[error("degree profile infeasible: {0}")]
    ProfileInfeasible(String),

    #[error("degree profile {line}: {msg}")]
    ProfileParse { line: usize, msg: String },

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("action {action} produced {count} positions but only {capacity} are available")]
    PaddingOverflow { action: usize, count: usize, capacity: usize },

    #[error("branch {action} needs binning (I(T;Y|A) = {gap:.3e}); use the codebook source code")]
    BinningRequired { action: usize, gap: f64 },

    #[error("codebook of 2^{bits} words exceeds the enumerable limit")]
    CodebookTooLarge { bits: usize },

    #[error(transparent)]
    Core(#[from] actionrd_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CodeError>;
