use std::fmt;
use std::path::PathBuf;

/// Errors produced by the simulation core.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong representation,
    /// mismatched grids, invalid parameters).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// The state does not decay to the edge tolerance inside the periodic grid.
    #[error("grid too small: {0}")]
    GridTooSmall(String),

    /// The state has features narrower than the grid can resolve.
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    /// Two routes to the same quantity disagree, or a probability went negative.
    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    /// A numerical condition that makes the requested quantity undefined.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Conditioning on a meter outcome whose probability is effectively zero.
    #[error("outcome unreachable: probability {probability:e} is below 1e-14")]
    OutcomeUnreachable { probability: f64 },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::ContractViolation(msg.into())
    }

    /// Process exit code for the CLI: config=2, numerical=3, internal=4.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::GridTooSmall(_)
            | Error::GridTooCoarse(_)
            | Error::Numerical(_)
            | Error::OutcomeUnreachable { .. } => 3,
            Error::ContractViolation(_) | Error::InternalConsistency(_) | Error::Io { .. } => 4,
        }
    }
}

/// A single semantic problem in a config file, addressed by its field path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        FieldError {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Every semantic violation found, not just the first.
    #[error("invalid config:\n{}", render_field_errors(.0))]
    Invalid(Vec<FieldError>),
}

fn render_field_errors(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  - {e}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ConfigError {
    pub fn field_errors(&self) -> &[FieldError] {
        match self {
            ConfigError::Invalid(errors) => errors,
            _ => &[],
        }
    }
}
