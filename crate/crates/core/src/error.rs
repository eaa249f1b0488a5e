use thiserror::Error;

/// Errors shared by every module in this crate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("architectures differ: {0}")]
    ArchitectureMismatch(String),

    #[error("operation requires depth {required}, network has depth {actual}")]
    UnsupportedDepth { required: String, actual: usize },

    #[error("path budget exceeded: architecture needs {required} paths, budget is {budget}")]
    PathBudgetExceeded { required: u128, budget: u64 },

    #[error("hidden layer width {width} exceeds subset enumeration cap {cap}")]
    WidthCapExceeded { width: usize, cap: usize },

    #[error("operation requires an admissible network: {0}")]
    NotAdmissible(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("oracle query budget exhausted after {used} queries")]
    OracleBudget { used: u64 },

    #[error("cannot parse scalar {0:?}")]
    ScalarParse(String),

    #[error("malformed network JSON: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
