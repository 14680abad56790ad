use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI for exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or unsupported input (exit code 2).
    Input,
    /// A verification found violations (exit code 1).
    Verification,
    /// An internal invariant failed (exit code 3).
    Internal,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Syntax(String),
    #[error("unbalanced {what} at line {line}")]
    Unbalanced { what: &'static str, line: usize },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("undeclared token `{token}` in statement `{label}`")]
    UndeclaredToken { token: String, label: String },
    #[error("file inclusion `$[ ... $]` is not supported")]
    FileInclusion,
    #[error("unresolved reference `{0}`")]
    UnresolvedReference(String),
    #[error("malformed compressed proof in `{label}`: {reason}")]
    BadCompressedProof { label: String, reason: String },
    #[error("incomplete proof in `{0}`")]
    IncompleteProof(String),
    #[error("proof of `{label}` failed: {reason}")]
    ProofError { label: String, reason: String },
    #[error("no parse for {what} in `{label}` at token {pos}")]
    NoParse { what: String, label: String, pos: usize },
    #[error("ambiguous parse in `{label}` over tokens {from}..{to}")]
    AmbiguousParse { label: String, from: usize, to: usize },
    #[error("missing presupposition `{0}`")]
    MissingPresupposition(String),
    #[error("arity mismatch for `{name}`: declared {declared}, used with {used}")]
    ArityMismatch { name: String, declared: usize, used: usize },
    #[error("parameter index {index} exceeds {max}")]
    ParamOutOfRange { index: u32, max: usize },
    #[error("parameter budget {k} below maximal parameter index {max}")]
    ParamBudget { k: u32, max: u32 },
    #[error("term too large: {0}")]
    TermTooLarge(String),
    #[error("edge budget {budget} exceeded: expansion has {size} edges")]
    EdgeBudget { budget: u128, size: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("internal invariant failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::VerificationFailed(_) => ErrorKind::Verification,
            Error::Internal(_) => ErrorKind::Internal,
            _ => ErrorKind::Input,
        }
    }
}
