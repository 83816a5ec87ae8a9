use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A frequency that would advance the phase by a full cycle or more per sample.
    #[error("frequency {freq_hz} Hz out of range for sample rate {sample_rate} Hz")]
    OutOfRange { freq_hz: f64, sample_rate: f64 },

    #[error("feedback loop diverged at sample {sample}: {detail}")]
    Instability { sample: usize, detail: String },

    #[error("spectrum expansion exceeded {limit} terms; raise the amplitude floor")]
    BudgetExceeded { limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
