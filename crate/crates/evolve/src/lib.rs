//! Offline two-agent code evolution with proof-/witness-gated promotion.
//!
//! A champion solver checkout is iteratively challenged by slot-restricted
//! patches from a programmer agent. Each challenger must pass independent
//! certificate/witness validation on a gate suite before its benchmark
//! numbers are even considered; promotion additionally requires a PAR2
//! improvement without losing more than the regression budget. Scope
//! selection runs either a structured slot sweep or the Compass & Jump
//! policy driven by the evaluator agent's MoveSet feedback.

pub mod agent;
pub mod cj;
pub mod config;
pub mod orch;
pub mod patch;
pub mod prompt;
pub mod repo;
pub mod types;

pub use agent::{Agent, AgentError, ProposeResponse, ScriptedAgent, Transcript, TranscriptEntry};
pub use cj::{adjust_jump, compass_jump, PolicyState, ScopeSelection};
pub use config::{Mode, RunConfig, SlotManifest};
pub use orch::{gate_summary, hard_gate, reconstruct_champion, EvolveError, Orchestrator, RunSummary};
pub use types::{score_move, Decision, Diagnosis, Hypothesis, Move, MoveSet, Promotion, Weights};
