use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("cannot parse {what} from `{input}`: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("resource limit exceeded: {what} is {requested}, bound is {limit}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("operation requires the {expected} branch, parameter is in the {actual} branch")]
    WrongBranch {
        expected: &'static str,
        actual: &'static str,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(what: &'static str, input: &str, reason: impl Into<String>) -> Self {
        // Cap echoed input so pathological strings do not flood error output.
        let input: String = input.chars().take(64).collect();
        Error::Parse {
            what,
            input,
            reason: reason.into(),
        }
    }

    /// True for errors caused by a configured resource cap.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
