use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// The command-line front end maps [`Error::Parse`], [`Error::Arity`] and
/// [`Error::Unbound`] to exit code 2 and every mathematical failure to exit
/// code 3.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("rewrite budget of {0} steps exceeded")]
    Nontermination(usize),
    #[error("parse error at line {line}, column {column}: expected {}", expected.join(" or "))]
    Parse {
        line: usize,
        column: usize,
        expected: Vec<String>,
    },
    #[error("arity error: {0}")]
    Arity(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }

    pub(crate) fn divergence(msg: impl Into<String>) -> Self {
        Error::Divergence(msg.into())
    }

    /// True for errors caused by malformed input text rather than by mathematics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Arity(_) | Error::Unbound(_) | Error::UnknownIdentity(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
