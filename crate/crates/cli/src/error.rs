use std::fmt;

use mbang_core::Error;

/// Exit status contract: 0 success, 2 usage, 3 schema or validation,
/// 4 numerical failure.
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or arguments, caught before any computation.
    Usage(String),
    /// An input that parsed but failed a check the user asked for.
    Invalid(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Core(e) => match e.root() {
                Error::ZeroVariance(_)
                | Error::NonFinite { .. }
                | Error::UnknownCumulant { .. }
                | Error::MissingMoment(_) => EXIT_NUMERICAL,
                _ => EXIT_INVALID,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Invalid(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_root_error() {
        let numeric = Error::ZeroVariance(2).context("standardizing");
        assert_eq!(CliError::from(numeric).exit_code(), EXIT_NUMERICAL);
        let schema = Error::Schema("bad".into()).context("reading x.json");
        assert_eq!(CliError::from(schema).exit_code(), EXIT_INVALID);
        assert_eq!(CliError::Usage("k".into()).exit_code(), EXIT_USAGE);
    }
}
