use serde::{Deserialize, Serialize};

use super::{LanguageCapabilities, LanguageOracle, LanguageRequest};
use crate::error::Result;
use crate::remote::{RemoteEndpoint, LLM_ENDPOINT_VAR, LLM_KEY_VAR};

#[derive(Debug, Serialize)]
struct CompletionRequest<'a> {
    instruction_text: &'a str,
    max_tokens: usize,
    temperature: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    text: String,
}

/// HTTP/JSON adapter: POST `{instruction_text, max_tokens, temperature, seed}`
/// and read `{text}`. Flagged non-deterministic.
#[derive(Debug, Clone)]
pub struct RemoteLanguage {
    endpoint: RemoteEndpoint,
    pub max_tokens: usize,
    pub temperature: f64,
    pub send_seed: bool,
}

impl RemoteLanguage {
    pub const NAME: &'static str = "remote-llm";

    pub fn new(endpoint: RemoteEndpoint) -> Self {
        RemoteLanguage {
            endpoint,
            max_tokens: 256,
            temperature: 0.7,
            send_seed: true,
        }
    }

    pub fn from_env() -> Result<Self> {
        Ok(Self::new(RemoteEndpoint::from_env(LLM_ENDPOINT_VAR, LLM_KEY_VAR)?))
    }
}

impl LanguageOracle for RemoteLanguage {
    fn name(&self) -> &str {
        Self::NAME
    }

    fn capabilities(&self) -> LanguageCapabilities {
        LanguageCapabilities {
            max_context_tokens: 4096,
            context_vocabulary_size: 0,
            deterministic: false,
            concurrent: true,
        }
    }

    fn complete(&self, request: &LanguageRequest<'_>) -> Result<String> {
        let body = CompletionRequest {
            instruction_text: &request.instruction_text,
            max_tokens: self.max_tokens,
            temperature: self.temperature,
            seed: self.send_seed.then_some(request.seed),
        };
        let resp: CompletionResponse = self.endpoint.post_json(Self::NAME, &body)?;
        Ok(resp.text)
    }
}
