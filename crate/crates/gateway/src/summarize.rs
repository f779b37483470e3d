use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sumtrace_core::corpus::Document;

use crate::budget::prepare_prompt;
use crate::cassette::{cassette_key, Cassette, CassetteStore};
use crate::config::{Estimator, GatewayConfig, ModelConfig, ProviderKind};
use crate::prompt::PromptKind;
use crate::provider::{build_provider, CompletionRequest, Provider};
use crate::GatewayError;

/// Stored in place of an empty response so summary text is never blank.
pub const EMPTY_RESPONSE_MARKER: &str = "[empty response]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Live,
    Record,
    Replay,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s.to_ascii_lowercase().as_str() {
            "live" => Some(Mode::Live),
            "record" => Some(Mode::Record),
            "replay" => Some(Mode::Replay),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub summary_id: String,
    pub filing_id: String,
    pub shuffled: bool,
    pub shuffle_seed: Option<u64>,
    pub model: ModelConfig,
    pub prompt_kind: PromptKind,
    pub summary_text: String,
    /// The model declined or returned nothing.
    pub refused: bool,
    pub truncated_tokens: usize,
    pub prompt_tokens: usize,
    pub estimator: Estimator,
    pub cassette_key: String,
    pub mode: Mode,
}

pub fn summary_id(filing_id: &str, shuffle_seed: Option<u64>, model: &str, kind: PromptKind) -> String {
    match shuffle_seed {
        Some(seed) => format!("{filing_id}-s{seed}--{model}--{}", kind.name()),
        None => format!("{filing_id}--{model}--{}", kind.name()),
    }
}

/// Refusals seen in practice: the apology template and the table complaint.
pub fn is_refusal(text: &str) -> bool {
    let t = text.trim().replace('\u{2019}', "'");
    t.is_empty() || t.contains("I'm sorry, but I am unable") || t.to_lowercase().contains("unable to comprehend")
}

pub struct Gateway {
    config: GatewayConfig,
    providers: BTreeMap<String, Box<dyn Provider>>,
    cassettes: Option<CassetteStore>,
    /// Truncate oversized documents instead of failing with BudgetExceeded.
    pub truncate: bool,
}

impl Gateway {
    pub fn new(config: GatewayConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let providers = config
            .providers
            .iter()
            .map(|(id, p)| build_provider(id, p).map(|b| (id.clone(), b)))
            .collect::<Result<_, _>>()?;
        let cassettes = config.cassette_dir.clone().map(CassetteStore::new);
        Ok(Self {
            config,
            providers,
            cassettes,
            truncate: true,
        })
    }

    /// Replaces the adapter registered under `id`.
    pub fn with_provider(mut self, id: &str, provider: Box<dyn Provider>) -> Self {
        self.providers.insert(id.to_string(), provider);
        self
    }

    pub fn with_cassettes(mut self, store: CassetteStore) -> Self {
        self.cassettes = Some(store);
        self
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    fn store(&self) -> Result<&CassetteStore, GatewayError> {
        self.cassettes
            .as_ref()
            .ok_or_else(|| GatewayError::Config("record and replay need a cassette_dir".into()))
    }

    pub fn summarize(
        &self,
        doc: &Document,
        shuffle_seed: Option<u64>,
        model_name: &str,
        kind: PromptKind,
        mode: Mode,
    ) -> Result<SummaryRecord, GatewayError> {
        let model = self.config.model(model_name)?;
        let estimator = self.config.estimator;
        let prepared = prepare_prompt(doc, kind, model, &estimator, self.truncate)?;
        let key = cassette_key(&doc.filing_id, &model.provider_id, &model.model_name, kind, shuffle_seed);

        let text = match mode {
            Mode::Replay => {
                let cassette = self.store()?.load(&key)?;
                if cassette.prompt != prepared.prompt {
                    return Err(GatewayError::CassetteMismatch { key });
                }
                cassette.summary_text
            }
            Mode::Live | Mode::Record => {
                let provider = self
                    .providers
                    .get(&model.provider_id)
                    .ok_or_else(|| GatewayError::UnknownProvider(model.provider_id.clone()))?;
                let document_text = prepared.document.as_ref().map(Document::plain_text).unwrap_or_default();
                let req = CompletionRequest {
                    filing_id: &doc.filing_id,
                    shuffle_seed,
                    model,
                    kind,
                    prompt: &prepared.prompt,
                    document_text: &document_text,
                };
                let completion = provider.complete(&req)?;
                if mode == Mode::Record {
                    self.store()?.save(&Cassette {
                        cassette_key: key.clone(),
                        filing_id: doc.filing_id.clone(),
                        provider_id: model.provider_id.clone(),
                        model_name: model.model_name.clone(),
                        prompt_kind: kind,
                        shuffle_seed,
                        prompt: prepared.prompt.clone(),
                        request: completion.request,
                        response: completion.response,
                        summary_text: completion.text.clone(),
                    })?;
                }
                completion.text
            }
        };

        let refused = is_refusal(&text);
        let summary_text = if text.trim().is_empty() {
            EMPTY_RESPONSE_MARKER.to_string()
        } else {
            text
        };
        if self.config.providers.get(&model.provider_id).map(|p| p.kind) == Some(ProviderKind::Cohere)
            && kind != PromptKind::Simple
        {
            tracing::debug!("the summarize endpoint ignores prompt kind {}", kind.name());
        }
        Ok(SummaryRecord {
            summary_id: summary_id(&doc.filing_id, shuffle_seed, &model.model_name, kind),
            filing_id: doc.filing_id.clone(),
            shuffled: shuffle_seed.is_some(),
            shuffle_seed,
            model: model.clone(),
            prompt_kind: kind,
            summary_text,
            refused,
            truncated_tokens: prepared.truncated_tokens,
            prompt_tokens: prepared.prompt_tokens,
            estimator,
            cassette_key: key,
            mode,
        })
    }
}
