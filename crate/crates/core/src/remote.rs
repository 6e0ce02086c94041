//! Blocking HTTP/JSON transport shared by the remote oracle adapters.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub const LLM_ENDPOINT_VAR: &str = "GEM_LLM_ENDPOINT";
pub const LLM_KEY_VAR: &str = "GEM_LLM_KEY";
pub const VLM_ENDPOINT_VAR: &str = "GEM_VLM_ENDPOINT";
pub const VLM_KEY_VAR: &str = "GEM_VLM_KEY";

#[derive(Debug, Clone)]
pub struct RemoteEndpoint {
    pub url: String,
    pub key: Option<String>,
    pub timeout: Duration,
    /// Attempts per call, including the first.
    pub attempts: usize,
}

impl RemoteEndpoint {
    pub fn new(url: impl Into<String>) -> Self {
        RemoteEndpoint {
            url: url.into(),
            key: None,
            timeout: Duration::from_secs(120),
            attempts: 3,
        }
    }

    pub fn with_key(mut self, key: impl Into<String>) -> Self {
        self.key = Some(key.into());
        self
    }

    /// Reads the endpoint URL (required) and credential (optional) from the
    /// environment.
    pub fn from_env(url_var: &str, key_var: &str) -> Result<Self> {
        let url = std::env::var(url_var)
            .map_err(|_| Error::InvalidConfig(format!("environment variable {url_var} is not set")))?;
        let mut endpoint = RemoteEndpoint::new(url);
        endpoint.key = std::env::var(key_var).ok().filter(|k| !k.is_empty());
        Ok(endpoint)
    }

    pub fn post_json<Req: Serialize, Resp: DeserializeOwned>(&self, oracle: &str, body: &Req) -> Result<Resp> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let mut last = String::new();
        for attempt in 0..self.attempts.max(1) {
            let mut req = agent.post(&self.url).header("Content-Type", "application/json");
            if let Some(key) = &self.key {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
            match req.send_json(body) {
                Ok(resp) => {
                    return resp
                        .into_body()
                        .read_json::<Resp>()
                        .map_err(|e| Error::oracle(oracle, format!("bad response body: {e}")));
                }
                Err(e) => {
                    log::warn!("{oracle}: attempt {} failed: {e}", attempt + 1);
                    last = e.to_string();
                }
            }
        }
        Err(Error::oracle(oracle, last))
    }
}
