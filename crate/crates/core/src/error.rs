use thiserror::Error;

/// Errors raised by the link, QKD, planner, DSP, energy and scenario layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A struct failed one of its invariants.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    /// The channel plan is not usable (wrong number of quantum carriers, bad core index, ...).
    #[error("plan error: {0}")]
    Plan(String),

    /// Background click probability per gate exceeded one.
    #[error("detector saturated: background probability {0:.3e} per gate exceeds 1")]
    Saturation(f64),

    /// Decoy-state parameters inconsistent with the bound formulas.
    #[error("decoy parameter error: {0}")]
    Parameter(String),

    /// Not enough statistics to evaluate the finite-key bounds.
    #[error("degenerate statistics: {0}")]
    DegenerateStatistics(String),

    /// An adaptive loop failed to converge.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// Streams or sequences of mismatched length.
    #[error("length mismatch: {0}")]
    Length(String),

    /// An error raised inside a named processing stage.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    /// Scenario file problems.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Wraps `self` with the name of the stage it came from.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }
}

impl Error {
    /// The innermost error beneath any stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
