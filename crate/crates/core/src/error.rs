use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of the operation (e.g. negative time).
    #[error("domain error: {0}")]
    Domain(String),

    /// Weibull hazard with shape < 1 evaluated at exactly t = 0.
    #[error("singular evaluation: weibull hazard with shape {shape} is +inf at t = 0")]
    SingularEvaluation { shape: f64 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Malformed input row. `row` is the 1-based line number in the source.
    #[error("row {row}: {message}")]
    Row { row: u64, message: String },

    #[error("row {row}: duplicate key {key}")]
    DuplicateKey { row: u64, key: String },

    #[error("life table coverage: no rate for {key}")]
    Coverage { key: String },

    #[error("missing attribution labels: {0}")]
    MissingLabels(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for coverage and input-data problems, as opposed to bad arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Row { .. }
                | Error::DuplicateKey { .. }
                | Error::Coverage { .. }
                | Error::MissingLabels(_)
                | Error::Io(_)
                | Error::Csv(_)
        )
    }
}
