use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset: no records found")]
    EmptyInput,

    #[error("record {record}: expected `label{delimiter}frequency`, found {found} field(s)")]
    FieldCount {
        record: usize,
        delimiter: char,
        found: usize,
    },

    #[error("record {record}: frequency `{value}` is not a number")]
    NonNumericFrequency { record: usize, value: String },

    #[error("record {record}: frequency {value} is negative")]
    NegativeFrequency { record: usize, value: f64 },

    #[error("record {record}: frequency is not finite")]
    NonFiniteFrequency { record: usize },

    #[error("invalid histogram: {0}")]
    InvalidHistogram(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("unknown model kind `{0}` (valid kinds: zeta1, zeta2, geometric1, geometric2)")]
    UnknownKind(String),

    #[error("dataset has {r_max} attested ranks but the rank domain only has N = {domain}")]
    DomainTooSmall { r_max: u32, domain: u32 },

    #[error("objective returned NaN at x = {0}")]
    NanObjective(f64),

    #[error("invalid search interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("sample size F0 = {f0} too small for K = {k} parameters")]
    SampleTooSmall { f0: f64, k: u32 },

    #[error("every score is infinite or NaN; weights are undefined")]
    NoFiniteScores,

    #[error("need at least {need} points with distinct x values, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("diagnosis needs at least one geometric and one zeta fit")]
    MissingFits,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
