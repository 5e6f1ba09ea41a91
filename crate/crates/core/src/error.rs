use thiserror::Error;

/// A syntax error with a 1-based source position.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// Violations of operation preconditions.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable {0} is repeated in a parallel substitution")]
    DuplicateVariable(String),
    #[error("variable {var} occurs free in the bag substituted for {target}")]
    VariableFreeInBag { var: String, target: String },
    #[error("reduction step does not apply to {0}")]
    InvalidChoice(String),
    #[error("term {0} is not pure: an argument is not a single summand with coefficient 1")]
    NotPure(String),
    #[error("coherence precondition violated: {0}")]
    Precondition(String),
    #[error("probe {0} is not a normal term")]
    ProbeNotNormal(String),
    #[error(transparent)]
    Type(#[from] crate::sysf::TypeError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}
