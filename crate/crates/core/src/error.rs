use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration; `key` names the offending parameter.
    #[error("invalid configuration `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("unknown {kind} family `{name}`")]
    UnknownFamily { kind: &'static str, name: String },

    #[error("nonlinear solve did not converge{}: residual {residual:.3e} after {iters} iterations",
        step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NewtonFailure {
        step: Option<usize>,
        residual: f64,
        iters: usize,
    },

    #[error("non-finite value encountered{}", step.map(|s| format!(" at step {s}")).unwrap_or_default())]
    NonFinite { step: Option<usize> },

    /// A Monte Carlo sample failed; the seed reproduces it.
    #[error("sample with seed {seed:#018x} failed: {source}")]
    Sample {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// Attach a step index to solver failures that do not carry one yet.
    pub(crate) fn at_step(self, k: usize) -> Self {
        match self {
            Error::NewtonFailure {
                step: None,
                residual,
                iters,
            } => Error::NewtonFailure {
                step: Some(k),
                residual,
                iters,
            },
            Error::NonFinite { step: None } => Error::NonFinite { step: Some(k) },
            e => e,
        }
    }

    /// True for errors that come from the numerical solve rather than from input validation.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NewtonFailure { .. } | Error::NonFinite { .. } => true,
            Error::Sample { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }
}
