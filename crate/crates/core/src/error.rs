use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("endpoint map undefined: {0}")]
    EndpointMapUndefined(String),

    #[error("resource limit: {what} requires {required}, cap is {cap}")]
    ResourceLimit {
        what: String,
        required: u128,
        cap: u128,
    },

    #[error("inconsistent plan: {0}")]
    InconsistentPlan(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
