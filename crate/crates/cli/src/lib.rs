//! Pipeline stages behind the `sumtrace` binary. Each stage reads and writes
//! files under one run directory, so any stage can be rerun on its own.

pub mod analyze;
pub mod audit;
pub mod config;
mod error;
pub mod export;
pub mod ingest;
pub mod manifest;
pub mod summarize;
pub mod workdir;

pub use error::{CliError, Outcome};
pub use workdir::Workdir;
