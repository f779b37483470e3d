//! Summary generation: prompt templates, per-model token budgets, thin
//! provider adapters and a record/replay cassette layer.

mod budget;
mod cassette;
mod config;
mod error;
mod prompt;
mod provider;
mod summarize;

pub use budget::{prepare_prompt, PreparedPrompt};
pub use cassette::{cassette_key, Cassette, CassetteStore};
pub use config::{Estimator, GatewayConfig, ModelConfig, ProviderConfig, ProviderKind};
pub use error::GatewayError;
pub use prompt::{render_prompt, render_text, PromptKind};
pub use provider::{
    build_provider, response_text, Completion, CompletionRequest, HttpProvider, ImportProvider, Permit, Provider,
    Throttle,
};
pub use summarize::{is_refusal, summary_id, Gateway, Mode, SummaryRecord, EMPTY_RESPONSE_MARKER};
