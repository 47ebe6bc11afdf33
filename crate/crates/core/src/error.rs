use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("outside the formula's domain: {0}")]
    Domain(String),

    #[error("training diverged at iteration {iteration} (objective = {value})")]
    Divergence { iteration: usize, value: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: unsupported label {label:?}")]
    Label { line: usize, label: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by the input data rather than by configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::DegenerateData(_)
                | Error::Parse { .. }
                | Error::Label { .. }
                | Error::EmptyDataset
                | Error::UndefinedMetric(_)
                | Error::Io(_)
        )
    }
}
