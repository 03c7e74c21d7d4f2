use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("invalid interval in dimension {index}: lower {lower} > upper {upper}")]
    InvalidInterval { index: usize, lower: f64, upper: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite state derivative at x = {state:?}")]
    NonFiniteDerivative { state: Vec<f64> },

    #[error("simulation failed at step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory {index}: {source}")]
    InTrajectory {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite rollout during line search")]
    NonFiniteRollout,

    #[error("unknown benchmark `{name}`; valid names: {valid}")]
    UnknownBenchmark { name: String, valid: String },

    #[error("non-finite covariance in canonical correlation")]
    NonFiniteCovariance,

    #[error("negative cost {0} (controller costs must be nonnegative)")]
    NegativeCost(f64),

    #[error("{failed} of {total} scenarios failed, above the {limit:.0}% ceiling")]
    TooManyFailures {
        failed: usize,
        total: usize,
        limit: f64,
    },

    #[error("model is not reachset-conformant: {0}")]
    NotConformant(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub(crate) fn at_step(step: usize, source: Error) -> Self {
        Error::AtStep {
            step,
            source: Box::new(source),
        }
    }

    pub(crate) fn in_trajectory(index: usize, source: Error) -> Self {
        Error::InTrajectory {
            index,
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            actual,
        })
    }
}
