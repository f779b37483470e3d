use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::GatewayError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub provider_id: String,
    pub model_name: String,
    pub context_budget_tokens: usize,
    pub max_output_tokens: usize,
    /// `None` leaves the provider default in place.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_output_tokens < 1 || self.context_budget_tokens <= self.max_output_tokens {
            return Err(GatewayError::Config(format!(
                "model {}: need context_budget_tokens > max_output_tokens >= 1",
                self.model_name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    Anthropic,
    OpenAi,
    Cohere,
    /// Reads pre-generated summaries from a directory.
    Import,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default)]
    pub base_url: Option<String>,
    #[serde(default)]
    pub api_key_env: Option<String>,
    /// Import directory, relative to the config file.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub requests_per_minute: Option<u32>,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_in_flight() -> usize {
    4
}

fn default_retries() -> u32 {
    3
}

fn default_timeout() -> u64 {
    600
}

fn default_ratio() -> f64 {
    1.33
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimator {
    /// Tokens per word.
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Share of the context budget held back.
    #[serde(default = "default_margin")]
    pub safety_margin: f64,
}

impl Default for Estimator {
    fn default() -> Self {
        Self {
            ratio: default_ratio(),
            safety_margin: default_margin(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default)]
    pub cassette_dir: Option<PathBuf>,
    #[serde(default)]
    pub providers: BTreeMap<String, ProviderConfig>,
    #[serde(default)]
    pub models: Vec<ModelConfig>,
}

impl GatewayConfig {
    pub fn from_toml(text: &str) -> Result<Self, GatewayError> {
        let config: GatewayConfig = toml::from_str(text).map_err(|e| GatewayError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Loads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::io(path.display(), e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(dir) = &config.cassette_dir {
            config.cassette_dir = Some(base.join(dir));
        }
        for p in config.providers.values_mut() {
            if let Some(dir) = &p.dir {
                p.dir = Some(base.join(dir));
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        let e = &self.estimator;
        if !(e.ratio > 0.0) || !(0.0..1.0).contains(&e.safety_margin) {
            return Err(GatewayError::Config("estimator ratio must be > 0 and margin in [0, 1)".into()));
        }
        for m in &self.models {
            m.validate()?;
            if !self.providers.contains_key(&m.provider_id) {
                return Err(GatewayError::UnknownProvider(m.provider_id.clone()));
            }
        }
        for (id, p) in &self.providers {
            if p.max_in_flight == 0 {
                return Err(GatewayError::Config(format!("provider {id}: max_in_flight must be positive")));
            }
            if p.kind == ProviderKind::Import && p.dir.is_none() {
                return Err(GatewayError::Config(format!("provider {id}: import needs dir")));
            }
        }
        Ok(())
    }

    pub fn model(&self, name: &str) -> Result<&ModelConfig, GatewayError> {
        self.models
            .iter()
            .find(|m| m.model_name == name)
            .ok_or_else(|| GatewayError::UnknownModel(name.to_string()))
    }
}
