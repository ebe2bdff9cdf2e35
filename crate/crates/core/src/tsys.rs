//! The transition system ⟨I, T, P⟩ extracted from an AIGER circuit.

use crate::aiger::{AigerCircuit, Reset};
use crate::lits::Cube;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsysError {
    #[error("property index {index} out of range ({count} outputs/bads)")]
    PropertyIndex { index: usize, count: usize },
}

/// State variables are the circuit's latches in declaration order; input
/// variables likewise. The initial-state predicate is the cube of latch
/// reset constraints (free latches unconstrained), so it is satisfiable by
/// construction. P(x) = ¬bad.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    circuit: AigerCircuit,
    /// Unit constraints of I: (latch ordinal, required value).
    init: Vec<(usize, bool)>,
}

impl TransitionSystem {
    pub fn new(mut circuit: AigerCircuit, property_index: usize) -> Result<Self, TsysError> {
        let count = circuit.outputs_or_bads().len();
        if property_index >= count {
            return Err(TsysError::PropertyIndex {
                index: property_index,
                count,
            });
        }
        circuit.property_index = property_index;
        let init = circuit
            .latches
            .iter()
            .enumerate()
            .filter_map(|(i, l)| match l.reset {
                Reset::Zero => Some((i, false)),
                Reset::One => Some((i, true)),
                Reset::Free => None,
            })
            .collect();
        Ok(TransitionSystem { circuit, init })
    }

    pub fn circuit(&self) -> &AigerCircuit {
        &self.circuit
    }

    pub fn num_latches(&self) -> usize {
        self.circuit.num_latches()
    }

    pub fn num_inputs(&self) -> usize {
        self.circuit.num_inputs()
    }

    /// The unit constraints of I.
    pub fn init_units(&self) -> &[(usize, bool)] {
        &self.init
    }

    /// The reset value of a latch, `None` when unconstrained.
    pub fn init_value(&self, latch: usize) -> Option<bool> {
        match self.circuit.latches[latch].reset {
            Reset::Zero => Some(false),
            Reset::One => Some(true),
            Reset::Free => None,
        }
    }

    /// Syntactic check: does the cube conflict with some unit of I?
    /// When true, no initial state lies in the cube.
    pub fn cube_excludes_init(&self, cube: &Cube) -> bool {
        cube.iter()
            .any(|l| self.init_value(l.latch()) == Some(!l.is_positive()))
    }

    /// A concrete initial state inside `cube` (latches not constrained by
    /// either take false). Caller must ensure the cube intersects I.
    pub fn init_state_in_cube(&self, cube: &Cube) -> Vec<bool> {
        debug_assert!(!self.cube_excludes_init(cube));
        let mut state: Vec<bool> = (0..self.num_latches())
            .map(|i| self.init_value(i).unwrap_or(false))
            .collect();
        for l in cube.iter() {
            state[l.latch()] = l.is_positive();
        }
        state
    }
}
