use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GatewayError {
    #[error("no cassette for key {key}")]
    CassetteMiss { key: String },
    #[error("cassette {key} was recorded for a different prompt")]
    CassetteMismatch { key: String },
    #[error("prompt needs {prompt_tokens} tokens, budget allows {available}")]
    BudgetExceeded { prompt_tokens: usize, available: usize },
    #[error("provider {provider} failed (status {status:?}, retry after {retry_after:?}): {message}")]
    Provider {
        provider: String,
        status: Option<u16>,
        retry_after: Option<Duration>,
        message: String,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown model {0}")]
    UnknownModel(String),
    #[error("unknown provider {0}")]
    UnknownProvider(String),
    #[error("environment variable {0} holding the API key is not set")]
    MissingApiKey(String),
    #[error("{0}")]
    Io(String),
}

impl GatewayError {
    pub fn io(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        GatewayError::Io(format!("{context}: {e}"))
    }
}
