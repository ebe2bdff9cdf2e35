//! Proof-producing IC3/PDR safety model checking for AIGER circuits.
//!
//! The pipeline: [`aiger`] parses and simulates circuits, [`tsys`] extracts
//! the transition system, [`encode`] lowers it into the [`sat`] backend,
//! [`ic3`] runs the property check with pluggable heuristic policies, and
//! [`certify`] independently validates the resulting certificate or
//! counterexample witness.

pub mod aigbuild;
pub mod aiger;
pub mod certify;
pub mod encode;
pub mod ic3;
pub mod lits;
pub mod sat;
pub mod tsys;

pub use aiger::AigerCircuit;
pub use ic3::{check, CheckOptions, Verdict};
pub use tsys::TransitionSystem;
