//! The Compass & Jump scope-selection policy.
//!
//! With no MoveSet to go on, pick one slot uniformly at random. Otherwise
//! adapt the jump probability from recent progress, rank the moves by the
//! linear score, and either Jump (top moves from J distinct slots, cross-
//! slot exploration) or Compass (the single best move, risk-averse when
//! progress has been volatile).

use crate::types::{score_move, Move, MoveSet, Weights};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyState {
    pub p_jump: f64,
    pub p_min: f64,
    pub p_max: f64,
    /// Jump width, 2 or 3.
    pub jump_size: usize,
    pub weights: Weights,
    /// Best-PAR2 deltas of recent rounds, most recent last; negative means
    /// the round improved the champion.
    pub history: Vec<f64>,
}

impl Default for PolicyState {
    fn default() -> Self {
        PolicyState {
            p_jump: 0.2,
            p_min: 0.05,
            p_max: 0.6,
            jump_size: 2,
            weights: Weights::default(),
            history: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopeSelection {
    pub allowed: Vec<String>,
    pub guidance: Vec<Move>,
    pub p_jump: f64,
    /// Whether this round took the Jump branch (diagnostics only).
    pub jumped: bool,
}

/// Adapt the jump probability: shrink it while improvements are steady,
/// grow it under stagnation. Two consecutive improving rounds scale by
/// 0.8; three consecutive non-improving rounds add 0.1; always clamped.
pub fn adjust_jump(p: f64, history: &[f64], p_min: f64, p_max: f64) -> f64 {
    let improving = history.iter().rev().take_while(|&&d| d < 0.0).count();
    let stagnant = history.iter().rev().take_while(|&&d| d >= 0.0).count();
    let p = if improving >= 2 {
        0.8 * p
    } else if stagnant >= 3 {
        p + 0.1
    } else {
        p
    };
    p.clamp(p_min, p_max)
}

/// Sort by score descending; equal scores keep their MoveSet order.
pub fn rank_by_score(moveset: &MoveSet, w: &Weights) -> Vec<Move> {
    let mut ranked: Vec<(usize, &Move)> = moveset.moves.iter().enumerate().collect();
    ranked.sort_by(|(ia, a), (ib, b)| {
        score_move(b, w)
            .partial_cmp(&score_move(a, w))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });
    ranked.into_iter().map(|(_, m)| m.clone()).collect()
}

/// Highest-ranked move of each of the first `j` distinct slots.
pub fn top_distinct_slots(ranked: &[Move], j: usize) -> Vec<Move> {
    let mut out: Vec<Move> = Vec::new();
    for m in ranked {
        if out.iter().any(|x| x.slot == m.slot) {
            continue;
        }
        out.push(m.clone());
        if out.len() == j {
            break;
        }
    }
    out
}

/// Progress is volatile when the sign of the best-PAR2 delta changed in at
/// least two of the last four rounds.
pub fn is_volatile(history: &[f64]) -> bool {
    let tail: Vec<bool> = history
        .iter()
        .rev()
        .take(4)
        .rev()
        .map(|&d| d < 0.0)
        .collect();
    tail.windows(2).filter(|w| w[0] != w[1]).count() >= 2
}

/// Compass selection: the best move, preferring sub-median risk while
/// progress is volatile.
pub fn select_best(ranked: &[Move], history: &[f64]) -> Move {
    debug_assert!(!ranked.is_empty());
    if is_volatile(history) {
        let mut risks: Vec<f64> = ranked.iter().map(|m| m.risk).collect();
        risks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = risks[risks.len() / 2];
        if let Some(m) = ranked.iter().find(|m| m.risk <= median) {
            return m.clone();
        }
    }
    ranked[0].clone()
}

/// One scope selection. `moveset` empty or absent falls back to a uniform
/// random slot with no guidance and an unchanged jump probability.
pub fn compass_jump(
    slots: &[String],
    moveset: Option<&MoveSet>,
    state: &PolicyState,
    rng: &mut ChaCha8Rng,
) -> ScopeSelection {
    assert!(!slots.is_empty());
    let moves = match moveset {
        Some(ms) if !ms.is_empty() => ms,
        _ => {
            let pick = rng.gen_range(0..slots.len());
            return ScopeSelection {
                allowed: vec![slots[pick].clone()],
                guidance: Vec::new(),
                p_jump: state.p_jump,
                jumped: false,
            };
        }
    };
    let p_jump = adjust_jump(state.p_jump, &state.history, state.p_min, state.p_max);
    let ranked = rank_by_score(moves, &state.weights);
    let (guidance, jumped) = if rng.gen_range(0.0..1.0) < p_jump {
        (top_distinct_slots(&ranked, state.jump_size), true)
    } else {
        (vec![select_best(&ranked, &state.history)], false)
    };
    let mut allowed: Vec<String> = Vec::new();
    for m in &guidance {
        if !allowed.contains(&m.slot) {
            allowed.push(m.slot.clone());
        }
    }
    ScopeSelection {
        allowed,
        guidance,
        p_jump,
        jumped,
    }
}
