use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Fatal(String),
    #[error("no input: {0}")]
    NoInput(String),
    #[error("no annotations match the filter")]
    NoAnnotations,
}

impl CliError {
    pub fn fatal(context: impl std::fmt::Display, e: impl std::fmt::Display) -> Self {
        CliError::Fatal(format!("{context}: {e}"))
    }
}

/// Per-item failures a stage logged and skipped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Outcome {
    pub failures: usize,
}

impl Outcome {
    /// 0 when clean, 1 when some items failed.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failures > 0)
    }
}
