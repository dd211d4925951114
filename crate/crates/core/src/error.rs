use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("element index {index} out of range for group of order {order}")]
    ElementOutOfRange { index: usize, order: usize },

    #[error("permutation size mismatch: {left} vs {right}")]
    PermutationMismatch { left: usize, right: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error(
        "symmetric mode requires bond dimension {group_order} (= |G|) on every edge, found {found}"
    )]
    BondDimensionMismatch { group_order: usize, found: usize },

    #[error("operation requires a symmetry group but none was configured")]
    MissingSymmetry,

    #[error("operation is not defined in symmetric mode: {0}")]
    SymmetryNotAllowed(String),

    #[error("budget exceeded: {what} needs {needed}, limit is {limit}; {hint}")]
    BudgetExceeded {
        what: String,
        needed: u128,
        limit: u128,
        hint: String,
    },

    #[error("state has zero norm (sample seed {seed:?}); this is a measure-zero event and is not resampled")]
    ZeroNormState { seed: Option<u64> },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn budget(
        what: impl Into<String>,
        needed: u128,
        limit: u128,
        hint: impl Into<String>,
    ) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed,
            limit,
            hint: hint.into(),
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
