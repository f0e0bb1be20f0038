use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zone is not registered for trace maintenance and per-cell counters are disabled")]
    UntrackedZone,

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("missing measurement for N={agents}, p={rate}, method={method}")]
    MissingCombination {
        agents: u32,
        rate: f64,
        method: String,
    },

    #[error("too few sample points for a response surface: got {0}, need at least 4")]
    TooFewPoints(usize),

    #[error("calibration map is empty")]
    EmptyMap,

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than by
    /// the run itself.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidArgument(_) | Error::UntrackedZone | Error::Parse(_)
        )
    }
}
