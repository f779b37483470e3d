use std::path::Path;

use serde::Deserialize;
use sumtrace_gateway::{GatewayConfig, PromptKind};

use crate::CliError;

/// Optional `[run]` table next to the gateway settings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub models: Vec<String>,
    #[serde(default)]
    pub prompts: Vec<PromptKind>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Deserialize)]
struct Wrapper {
    #[serde(default)]
    run: RunConfig,
}

pub fn load_config(path: &Path) -> Result<(GatewayConfig, RunConfig), CliError> {
    let gateway = GatewayConfig::load(path).map_err(|e| CliError::fatal(path.display(), e))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::fatal(path.display(), e))?;
    let run: Wrapper = toml::from_str(&text).map_err(|e| CliError::fatal(path.display(), e))?;
    Ok((gateway, run.run))
}
