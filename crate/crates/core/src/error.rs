use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HspError {
    #[error("not a group: {reason}")]
    NotAGroup { reason: String },

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("group of order {order} exceeds the verification cap of {cap}")]
    VerificationScaleExceeded { order: usize, cap: usize },

    #[error("tensor state has {terms} terms after compression, cap is {cap}")]
    TermBudgetExceeded { terms: usize, cap: usize },

    #[error("oracle is not strictly periodic: {0}")]
    NotStrictlyPeriodic(String),

    #[error("state norm underflowed in float mode; rerun with exact scalars")]
    DegenerateState,

    #[error("dense state of dimension {dim} exceeds the cap of {cap}")]
    DenseCapExceeded { dim: u128, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl HspError {
    /// Short machine-readable name used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            HspError::NotAGroup { .. } => "NotAGroup",
            HspError::UnsupportedGroup(_) => "UnsupportedGroup",
            HspError::VerificationScaleExceeded { .. } => "VerificationScaleExceeded",
            HspError::TermBudgetExceeded { .. } => "TermBudgetExceeded",
            HspError::NotStrictlyPeriodic(_) => "NotStrictlyPeriodic",
            HspError::DegenerateState => "DegenerateState",
            HspError::DenseCapExceeded { .. } => "DenseCapExceeded",
            HspError::InvalidInput(_) => "InvalidInput",
        }
    }

    /// CLI exit code: 2 for usage errors, 3 for exceeded resource caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            HspError::NotAGroup { .. }
            | HspError::UnsupportedGroup(_)
            | HspError::NotStrictlyPeriodic(_)
            | HspError::InvalidInput(_) => 2,
            HspError::VerificationScaleExceeded { .. }
            | HspError::TermBudgetExceeded { .. }
            | HspError::DegenerateState
            | HspError::DenseCapExceeded { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, HspError>;
