//! Run configuration and the slot manifest.

use crate::types::Weights;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("cannot parse {0}: {1}")]
    Parse(PathBuf, String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedVerdict {
    Safe,
    Unsafe,
    Any,
}

/// Suite entry: a path with an optional expected verdict annotation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SuiteEntry {
    Plain(String),
    Annotated { path: String, expect: ExpectedVerdict },
}

impl SuiteEntry {
    pub fn path(&self) -> &str {
        match self {
            SuiteEntry::Plain(p) => p,
            SuiteEntry::Annotated { path, .. } => path,
        }
    }

    pub fn expect(&self) -> ExpectedVerdict {
        match self {
            SuiteEntry::Plain(_) => ExpectedVerdict::Any,
            SuiteEntry::Annotated { expect, .. } => *expect,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyConfig {
    #[serde(default)]
    pub weights: Weights,
    #[serde(default = "d_p_jump_init")]
    pub p_jump_init: f64,
    #[serde(default = "d_p_jump_min")]
    pub p_jump_min: f64,
    #[serde(default = "d_p_jump_max")]
    pub p_jump_max: f64,
    #[serde(default = "d_jump_size")]
    pub jump_size: usize,
    #[serde(default = "d_sweep_advance")]
    pub sweep_advance_after: usize,
}

fn d_p_jump_init() -> f64 {
    0.2
}
fn d_p_jump_min() -> f64 {
    0.05
}
fn d_p_jump_max() -> f64 {
    0.6
}
fn d_jump_size() -> usize {
    2
}
fn d_sweep_advance() -> usize {
    5
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            weights: Weights::default(),
            p_jump_init: d_p_jump_init(),
            p_jump_min: d_p_jump_min(),
            p_jump_max: d_p_jump_max(),
            jump_size: d_jump_size(),
            sweep_advance_after: d_sweep_advance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Sweep,
    CompassJump,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sweep => "sweep",
            Mode::CompassJump => "compass_jump",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchedulePhase {
    pub mode: Mode,
    pub rounds: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentConfig {
    pub kind: String, // "scripted" | "http"
    #[serde(default)]
    pub transcript: Option<String>,
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "d_agent_timeout")]
    pub timeout_sec: f64,
}

fn d_agent_timeout() -> f64 {
    120.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptConfig {
    #[serde(default = "d_total_chars")]
    pub total_chars: usize,
    #[serde(default = "d_code_chars")]
    pub code_chars: usize,
    #[serde(default = "d_log_lines")]
    pub log_lines: usize,
    #[serde(default = "d_log_chars")]
    pub log_chars: usize,
    #[serde(default = "d_kb_chars")]
    pub kb_chars: usize,
    #[serde(default = "d_top_k")]
    pub top_k_percent: usize,
    #[serde(default)]
    pub kb_dir: Option<String>,
}

fn d_total_chars() -> usize {
    24_000
}
fn d_code_chars() -> usize {
    4_000
}
fn d_log_lines() -> usize {
    120
}
fn d_log_chars() -> usize {
    4_000
}
fn d_kb_chars() -> usize {
    4_000
}
fn d_top_k() -> usize {
    10
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            total_chars: d_total_chars(),
            code_chars: d_code_chars(),
            log_lines: d_log_lines(),
            log_chars: d_log_chars(),
            kb_chars: d_kb_chars(),
            top_k_percent: d_top_k(),
            kb_dir: None,
        }
    }
}

/// The versioned run configuration (`run.toml` or `run.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "config_schema")]
    pub schema: String,
    pub checkout: String,
    #[serde(default)]
    pub build_cmd: Vec<String>,
    pub solver_cmd: Vec<String>,
    pub slot_manifest: String,
    pub gate_suite: Vec<SuiteEntry>,
    pub evolution_suite: Vec<SuiteEntry>,
    pub timeout_sec: f64,
    #[serde(default = "d_jobs")]
    pub jobs: usize,
    #[serde(default = "d_timing")]
    pub timing: String,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_budget")]
    pub regression_budget: usize,
    #[serde(default)]
    pub min_par2_improvement_sec: f64,
    pub provenance_dir: String,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default = "default_schedule")]
    pub schedule: Vec<SchedulePhase>,
    pub agent: AgentConfig,
    #[serde(default)]
    pub prompt: PromptConfig,
    /// Path prefixes excluded from content hashing and snapshots.
    #[serde(default = "d_hash_ignore")]
    pub hash_ignore: Vec<String>,
}

fn config_schema() -> String {
    "evolve_config_v1".to_string()
}
fn d_jobs() -> usize {
    1
}
fn d_timing() -> String {
    "real".to_string()
}
fn d_seed() -> u64 {
    0x1c3
}
fn d_budget() -> usize {
    1
}
fn d_hash_ignore() -> Vec<String> {
    vec![
        ".git/".into(),
        "target/".into(),
        "build/".into(),
        "Hypothesis.json".into(),
    ]
}

fn default_schedule() -> Vec<SchedulePhase> {
    vec![
        SchedulePhase {
            mode: Mode::Sweep,
            rounds: 100,
        },
        SchedulePhase {
            mode: Mode::CompassJump,
            rounds: 100,
        },
    ]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let cfg: RunConfig = if path.extension().and_then(|e| e.to_str()) == Some("json") {
            serde_json::from_str(&text)
                .map_err(|e| ConfigError::Parse(path.to_path_buf(), e.to_string()))?
        } else {
            toml::from_str(&text)
                .map_err(|e| ConfigError::Parse(path.to_path_buf(), e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema != "evolve_config_v1" {
            return Err(ConfigError::Invalid(format!(
                "unknown config schema '{}'",
                self.schema
            )));
        }
        if self.solver_cmd.is_empty() {
            return Err(ConfigError::Invalid("solver_cmd must be nonempty".into()));
        }
        if self.timeout_sec <= 0.0 {
            return Err(ConfigError::Invalid("timeout_sec must be positive".into()));
        }
        if !(2..=3).contains(&self.policy.jump_size) {
            return Err(ConfigError::Invalid("jump_size must be 2 or 3".into()));
        }
        if self.timing != "real" && self.timing != "declared" {
            return Err(ConfigError::Invalid(format!(
                "timing must be 'real' or 'declared', got '{}'",
                self.timing
            )));
        }
        let safes = self
            .gate_suite
            .iter()
            .filter(|e| e.expect() == ExpectedVerdict::Safe)
            .count();
        let unsafes = self
            .gate_suite
            .iter()
            .filter(|e| e.expect() == ExpectedVerdict::Unsafe)
            .count();
        if safes == 0 || unsafes == 0 {
            return Err(ConfigError::Invalid(
                "gate_suite must contain at least one expect=safe and one expect=unsafe instance"
                    .into(),
            ));
        }
        if self.schedule.is_empty() {
            return Err(ConfigError::Invalid("schedule must be nonempty".into()));
        }
        Ok(())
    }

    /// Mode of a 0-based round index; past the schedule, the last phase
    /// repeats.
    pub fn mode_at(&self, round: usize) -> Mode {
        let mut left = round;
        for phase in &self.schedule {
            if left < phase.rounds {
                return phase.mode;
            }
            left -= phase.rounds;
        }
        self.schedule.last().map(|p| p.mode).unwrap_or(Mode::Sweep)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotEntry {
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub functions: Vec<String>,
}

/// Which files (and informationally, functions) a patch may touch per slot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotManifest {
    #[serde(default = "manifest_schema")]
    pub schema: String,
    pub slots: BTreeMap<String, SlotEntry>,
    #[serde(default = "d_extensions")]
    pub allowed_extensions: Vec<String>,
    #[serde(default)]
    pub forbidden: Vec<String>,
}

fn manifest_schema() -> String {
    "slot_manifest_v1".to_string()
}

fn d_extensions() -> Vec<String> {
    vec![
        ".rs".into(),
        ".c".into(),
        ".cc".into(),
        ".cpp".into(),
        ".h".into(),
        ".hpp".into(),
    ]
}

impl SlotManifest {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        let m: SlotManifest = serde_json::from_str(&text)
            .map_err(|e| ConfigError::Parse(path.to_path_buf(), e.to_string()))?;
        if m.schema != "slot_manifest_v1" {
            return Err(ConfigError::Invalid(format!(
                "unknown slot manifest schema '{}'",
                m.schema
            )));
        }
        if m.slots.is_empty() {
            return Err(ConfigError::Invalid("slot manifest has no slots".into()));
        }
        Ok(m)
    }

    pub fn slot_names(&self) -> Vec<String> {
        self.slots.keys().cloned().collect()
    }

    /// Checkout-relative files a patch restricted to `slots` may touch.
    pub fn allowed_files(&self, slots: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        for s in slots {
            if let Some(entry) = self.slots.get(s) {
                for f in &entry.files {
                    if !out.contains(f) {
                        out.push(f.clone());
                    }
                }
            }
        }
        out
    }
}
