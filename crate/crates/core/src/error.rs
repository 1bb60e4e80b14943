use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar left the open interval a law or state is defined on.
    #[error("{what} = {value} is outside its admissible domain ({domain})")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("grid mismatch: expected dims {expected:?}, got {got:?}")]
    DimensionMismatch { expected: [usize; 3], got: [usize; 3] },

    #[error(
        "primitive recovery failed in cell {cell}: D = {d}, |S| = {s_norm} ({reason})"
    )]
    Recovery {
        cell: usize,
        d: f64,
        s_norm: f64,
        reason: String,
    },

    #[error("time step {dt} exceeds the stability limit {limit} ({context})")]
    Cfl {
        dt: f64,
        limit: f64,
        context: &'static str,
    },

    #[error("inverse label map did not converge at y = {query:?} (residual {residual})")]
    Inversion { query: [f64; 3], residual: f64 },

    #[error("{op} needs at least {needed} samples, got {got}")]
    Arity {
        op: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("configuration error for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Invalid(String),

    /// A coupled step failed part way; the caller still holds the state it passed in.
    #[error("{stage} failed at t = {time}: {source}")]
    Stage {
        stage: &'static str,
        time: f64,
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(stage: &'static str, time: f64) -> impl FnOnce(Error) -> Error {
        move |e| Error::Stage {
            stage,
            time,
            source: Box::new(e),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
