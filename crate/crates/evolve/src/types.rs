//! Wire types of the evolution loop: moves, hypotheses, diagnoses, and the
//! per-round iteration record. All agent-facing documents are validated on
//! ingest against their schema.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SchemaError {
    #[error("field '{0}' failed validation: {1}")]
    Field(&'static str, String),
    #[error("unexpected schema tag '{got}' (want {want})")]
    Version { got: String, want: &'static str },
    #[error("malformed document: {0}")]
    Malformed(String),
}

/// One evaluator recommendation: edit `slot` in `direction`, with
/// confidence/risk/cost in [0,1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Move {
    pub slot: String,
    pub direction: String,
    pub conf: f64,
    pub risk: f64,
    pub cost: f64,
}

impl Move {
    /// Clamp numeric fields into [0,1].
    pub fn clamped(mut self) -> Move {
        for v in [&mut self.conf, &mut self.risk, &mut self.cost] {
            if !v.is_finite() {
                *v = 0.0;
            }
            *v = v.clamp(0.0, 1.0);
        }
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveSet {
    pub moves: Vec<Move>,
}

impl MoveSet {
    /// Clamp every move and drop those naming unregistered slots.
    pub fn sanitized(self, known_slots: &[String]) -> MoveSet {
        MoveSet {
            moves: self
                .moves
                .into_iter()
                .map(Move::clamped)
                .filter(|m| known_slots.contains(&m.slot))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub conf: f64,
    pub risk: f64,
    pub cost: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            conf: 1.0,
            risk: 0.5,
            cost: 0.25,
        }
    }
}

/// The linear move score: w_c·conf − w_r·risk − w_k·cost.
pub fn score_move(m: &Move, w: &Weights) -> f64 {
    w.conf * m.conf - w.risk * m.risk - w.cost * m.cost
}

/// The programmer agent's declared intent for a patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    #[serde(default = "hypothesis_schema")]
    pub schema: String,
    pub primary_slot: String,
    #[serde(default)]
    pub cross_slot_touches: Vec<String>,
    #[serde(default)]
    pub expected_metrics: BTreeMap<String, String>,
    #[serde(default)]
    pub fallback: String,
}

fn hypothesis_schema() -> String {
    "hypothesis_v1".to_string()
}

impl Hypothesis {
    pub fn validate(&self, allowed_slots: &[String]) -> Result<(), SchemaError> {
        if self.schema != "hypothesis_v1" {
            return Err(SchemaError::Version {
                got: self.schema.clone(),
                want: "hypothesis_v1",
            });
        }
        if self.primary_slot.is_empty() {
            return Err(SchemaError::Field("primary_slot", "must be declared".into()));
        }
        if !allowed_slots.contains(&self.primary_slot) {
            return Err(SchemaError::Field(
                "primary_slot",
                format!(
                    "'{}' is outside this round's scope {:?}",
                    self.primary_slot, allowed_slots
                ),
            ));
        }
        for s in &self.cross_slot_touches {
            if !allowed_slots.contains(s) {
                return Err(SchemaError::Field(
                    "cross_slot_touches",
                    format!("'{s}' is outside this round's scope"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "ACCEPT")]
    Accept,
    #[serde(rename = "REVERT")]
    Revert,
    #[serde(rename = "RETRY")]
    Retry,
}

/// A numeric finding backing the diagnosis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnosis {
    #[serde(default = "diagnosis_schema")]
    pub schema: String,
    pub decision: Decision,
    #[serde(default)]
    pub reasons: Vec<Finding>,
    #[serde(default)]
    pub evidence: String,
    #[serde(default)]
    pub moveset: MoveSet,
}

fn diagnosis_schema() -> String {
    "diagnosis_v1".to_string()
}

impl Diagnosis {
    pub fn validate(&self, allow_empty_moveset: bool) -> Result<(), SchemaError> {
        if self.schema != "diagnosis_v1" {
            return Err(SchemaError::Version {
                got: self.schema.clone(),
                want: "diagnosis_v1",
            });
        }
        if self.reasons.len() < 3 || self.reasons.len() > 6 {
            return Err(SchemaError::Field(
                "reasons",
                format!("expected 3..=6 numeric findings, got {}", self.reasons.len()),
            ));
        }
        if self.moveset.is_empty() && !allow_empty_moveset {
            return Err(SchemaError::Field(
                "moveset",
                "must be nonempty unless the round died in the build".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSummary {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub par2_avg_sec: f64,
    pub solved: usize,
    pub safe: usize,
    #[serde(rename = "unsafe")]
    pub unsafe_count: usize,
    pub timeouts: usize,
    /// Instances the champion solved that the challenger lost.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lost: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Promotion {
    #[serde(rename = "PROMOTE")]
    Promote,
    #[serde(rename = "REVERT")]
    Revert,
}

/// Append-only provenance line, one per round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub round: usize,
    pub mode: String,
    pub allowed_slots: Vec<String>,
    pub guidance: Vec<Move>,
    pub p_jump: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypothesis_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub admission_failure: Option<String>,
    pub build_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub build_log: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnosis: Option<Diagnosis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agent_failure: Option<String>,
    pub promotion: Promotion,
    pub champion_hash: String,
    pub champion_par2: f64,
}
