use thiserror::Error;

/// Errors raised anywhere in the simulation and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("molecule contains no atoms")]
    EmptyMolecule,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spin at {distance_nm:.4} nm from the sensor is too close for the point-dipole model")]
    SpinTooClose { distance_nm: f64 },

    #[error("field evaluated {distance_nm:.4} nm from the tip dipole")]
    TooCloseToDipole { distance_nm: f64 },

    #[error("tip at {distance_nm:.3} nm from the sample violates the far-field guard (>= {min_nm} nm)")]
    FarFieldGuard { distance_nm: f64, min_nm: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("empty region: {0}")]
    EmptyRegion(&'static str),

    #[error("unknown {kind} '{name}'")]
    UnknownMode { kind: &'static str, name: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownMode { .. } | Error::InvalidParameter(_) => 2,
            Error::Parse { .. } | Error::EmptyMolecule | Error::Format(_) | Error::Io(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 4,
        }
    }

    /// Tags an error with the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
