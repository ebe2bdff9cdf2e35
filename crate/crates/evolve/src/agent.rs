//! Agent transports: JSON-over-HTTP for live models, scripted transcripts
//! for deterministic replay.

use crate::types::{Diagnosis, Hypothesis};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::VecDeque;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent transport failure: {0}")]
    Transport(String),
    #[error("agent response failed schema validation: {0}")]
    Schema(String),
    #[error("scripted transcript exhausted (wanted a '{0}' entry)")]
    Exhausted(&'static str),
    #[error("scripted transcript out of order: wanted '{want}', next entry is '{got}'")]
    OutOfOrder { want: &'static str, got: String },
    #[error("transcript prompt hash mismatch at entry {index}")]
    PromptHash { index: usize },
}

/// The programmer agent's answer: a unified diff plus its hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProposeResponse {
    pub patch: String,
    pub hypothesis: Hypothesis,
}

pub trait Agent {
    fn propose(&mut self, prompt: &str) -> Result<ProposeResponse, AgentError>;
    fn diagnose(&mut self, prompt: &str) -> Result<Diagnosis, AgentError>;
}

/// Strip an optional markdown fence around a JSON document.
fn extract_json(text: &str) -> &str {
    let trimmed = text.trim();
    if let Some(start) = trimmed.find("```") {
        let after = &trimmed[start + 3..];
        let after = after.strip_prefix("json").unwrap_or(after);
        if let Some(end) = after.find("```") {
            return after[..end].trim();
        }
    }
    trimmed
}

// ---------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------

pub struct HttpAgent {
    endpoint: String,
    model: String,
    timeout: std::time::Duration,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct HttpRequest<'a> {
    role: &'a str,
    model: &'a str,
    prompt: &'a str,
}

impl HttpAgent {
    pub fn new(endpoint: String, model: String, timeout: std::time::Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        HttpAgent {
            endpoint,
            model,
            timeout,
            agent,
        }
    }

    fn call(&self, role: &str, prompt: &str) -> Result<String, AgentError> {
        let _ = self.timeout;
        let resp = self
            .agent
            .post(&self.endpoint)
            .send_json(HttpRequest {
                role,
                model: &self.model,
                prompt,
            })
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        resp.into_string()
            .map_err(|e| AgentError::Transport(e.to_string()))
    }
}

impl Agent for HttpAgent {
    fn propose(&mut self, prompt: &str) -> Result<ProposeResponse, AgentError> {
        let body = self.call("programmer", prompt)?;
        serde_json::from_str(extract_json(&body)).map_err(|e| AgentError::Schema(e.to_string()))
    }

    fn diagnose(&mut self, prompt: &str) -> Result<Diagnosis, AgentError> {
        let body = self.call("evaluator", prompt)?;
        serde_json::from_str(extract_json(&body)).map_err(|e| AgentError::Schema(e.to_string()))
    }
}

// ---------------------------------------------------------------------
// Scripted transport
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub kind: String, // "propose" | "diagnose"
    /// When present, the prompt's sha256 must match (hex).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
    pub response: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    #[serde(default = "transcript_schema")]
    pub schema: String,
    pub entries: Vec<TranscriptEntry>,
}

fn transcript_schema() -> String {
    "transcript_v1".to_string()
}

/// Replays canned responses in order, optionally pinning each to the
/// sha256 of the prompt that must have produced it.
pub struct ScriptedAgent {
    entries: VecDeque<TranscriptEntry>,
    consumed: usize,
}

impl ScriptedAgent {
    pub fn new(transcript: Transcript) -> Self {
        ScriptedAgent {
            entries: transcript.entries.into(),
            consumed: 0,
        }
    }

    pub fn load(path: &Path) -> Result<Self, AgentError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| AgentError::Transport(e.to_string()))?;
        let t: Transcript =
            serde_json::from_str(&text).map_err(|e| AgentError::Schema(e.to_string()))?;
        Ok(ScriptedAgent::new(t))
    }

    fn next(&mut self, want: &'static str, prompt: &str) -> Result<serde_json::Value, AgentError> {
        let entry = self.entries.pop_front().ok_or(AgentError::Exhausted(want))?;
        let index = self.consumed;
        self.consumed += 1;
        if entry.kind != want {
            return Err(AgentError::OutOfOrder {
                want,
                got: entry.kind,
            });
        }
        if let Some(expect) = &entry.prompt_sha256 {
            let got = hex::encode(Sha256::digest(prompt.as_bytes()));
            if &got != expect {
                return Err(AgentError::PromptHash { index });
            }
        }
        Ok(entry.response)
    }
}

impl Agent for ScriptedAgent {
    fn propose(&mut self, prompt: &str) -> Result<ProposeResponse, AgentError> {
        let v = self.next("propose", prompt)?;
        serde_json::from_value(v).map_err(|e| AgentError::Schema(e.to_string()))
    }

    fn diagnose(&mut self, prompt: &str) -> Result<Diagnosis, AgentError> {
        let v = self.next("diagnose", prompt)?;
        serde_json::from_value(v).map_err(|e| AgentError::Schema(e.to_string()))
    }
}
