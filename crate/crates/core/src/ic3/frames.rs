//! Monotone frame sequence in delta representation.
//!
//! A lemma learned for frames 1..=i is stored once, at its highest frame i;
//! the clause set of F_j is the union of all deltas at frames >= j. The
//! syntactic fixpoint check F_i = F_{i+1} then reduces to "delta_i is
//! empty".
//!
//! Each lemma can carry the latch state of its last failed push query (a
//! counterexample to propagation). As long as that state still satisfies
//! every clause of its frame, re-running the push query is guaranteed to
//! fail the same way, so stall-aware push policies may skip it without any
//! effect on the run beyond the saved SAT calls.

use crate::lits::Clause;

#[derive(Debug)]
pub struct LemmaEntry {
    pub clause: Clause,
    pub frame: usize,
    pub deleted: bool,
    /// Latch state of the last counterexample to pushing this lemma.
    pub ctp: Option<Vec<bool>>,
}

#[derive(Debug, PartialEq, Eq)]
pub enum AddOutcome {
    /// The clause is new at this frame and must be asserted in the solver.
    Added { subsumed_dropped: usize },
    /// An equal-or-stronger clause already covers this frame.
    Redundant,
}

pub struct FrameSequence {
    lemmas: Vec<LemmaEntry>,
    /// frames[i] = indices of lemmas whose delta frame is i (i >= 1).
    frames: Vec<Vec<usize>>,
}

/// Does the latch valuation satisfy the clause?
pub fn state_satisfies(state: &[bool], clause: &Clause) -> bool {
    clause.iter().any(|l| state[l.latch()] == l.is_positive())
}

impl FrameSequence {
    pub fn new() -> Self {
        FrameSequence {
            lemmas: Vec::new(),
            frames: vec![Vec::new(), Vec::new()], // index 0 unused (F0 = I)
        }
    }

    /// Highest frame index (k).
    pub fn top(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn extend(&mut self) {
        self.frames.push(Vec::new());
    }

    pub fn lemma(&self, idx: usize) -> &LemmaEntry {
        &self.lemmas[idx]
    }

    pub fn set_ctp(&mut self, idx: usize, state: Vec<bool>) {
        self.lemmas[idx].ctp = Some(state);
    }

    /// Non-deleted lemma indices currently at frame i.
    pub fn delta(&self, i: usize) -> Vec<usize> {
        self.frames[i]
            .iter()
            .copied()
            .filter(|&x| !self.lemmas[x].deleted)
            .collect()
    }

    pub fn delta_len(&self, i: usize) -> usize {
        self.frames[i]
            .iter()
            .filter(|&&x| !self.lemmas[x].deleted)
            .count()
    }

    pub fn delta_is_empty(&self, i: usize) -> bool {
        self.delta_len(i) == 0
    }

    pub fn total_lemmas(&self) -> usize {
        self.lemmas.iter().filter(|l| !l.deleted).count()
    }

    /// Is the recorded counterexample-to-push of this lemma still a state
    /// of F_i? If so, the push query would fail exactly as before.
    pub fn ctp_still_valid(&self, idx: usize) -> bool {
        let entry = &self.lemmas[idx];
        let Some(state) = &entry.ctp else {
            return false;
        };
        self.lemmas
            .iter()
            .filter(|l| !l.deleted && l.frame >= entry.frame)
            .all(|l| state_satisfies(state, &l.clause))
    }

    /// Add a lemma at frame i (meaning: asserted for every frame <= i).
    pub fn add_lemma(&mut self, clause: Clause, frame: usize) -> AddOutcome {
        debug_assert!(frame >= 1 && frame <= self.top());
        // Redundant if an existing lemma at frame >= i subsumes it.
        for entry in self.lemmas.iter().filter(|l| !l.deleted) {
            if entry.frame >= frame && entry.clause.subsumes(&clause) {
                return AddOutcome::Redundant;
            }
        }
        // Drop weaker lemmas at frames <= i.
        let mut dropped = 0;
        for entry in self.lemmas.iter_mut().filter(|l| !l.deleted) {
            if entry.frame <= frame && clause.subsumes(&entry.clause) {
                entry.deleted = true;
                dropped += 1;
            }
        }
        let idx = self.lemmas.len();
        self.lemmas.push(LemmaEntry {
            clause,
            frame,
            deleted: false,
            ctp: None,
        });
        self.frames[frame].push(idx);
        AddOutcome::Added {
            subsumed_dropped: dropped,
        }
    }

    /// Move a lemma from its frame to frame+1 after a successful push
    /// query. Returns false when the move made the lemma redundant.
    pub fn push_forward(&mut self, idx: usize) -> bool {
        let from = self.lemmas[idx].frame;
        let to = from + 1;
        debug_assert!(to <= self.top());
        self.lemmas[idx].ctp = None;
        let clause = self.lemmas[idx].clause.clone();
        // Subsumed at the destination: drop instead of moving.
        for (j, entry) in self.lemmas.iter().enumerate() {
            if j != idx && !entry.deleted && entry.frame >= to && entry.clause.subsumes(&clause)
            {
                self.lemmas[idx].deleted = true;
                return false;
            }
        }
        for (j, entry) in self.lemmas.iter_mut().enumerate() {
            if j != idx && !entry.deleted && entry.frame <= to && clause.subsumes(&entry.clause)
            {
                entry.deleted = true;
            }
        }
        self.frames[from].retain(|&x| x != idx);
        self.lemmas[idx].frame = to;
        self.frames[to].push(idx);
        true
    }

    /// Full subsumption sweep; returns the number of lemmas dropped.
    pub fn simplify(&mut self) -> usize {
        let mut dropped = 0;
        let live: Vec<usize> = (0..self.lemmas.len())
            .filter(|&i| !self.lemmas[i].deleted)
            .collect();
        for &a in &live {
            if self.lemmas[a].deleted {
                continue;
            }
            for &b in &live {
                if a == b || self.lemmas[b].deleted || self.lemmas[a].deleted {
                    continue;
                }
                // a makes b redundant: a covers at least b's frames and is
                // at most b's literals.
                if self.lemmas[a].frame >= self.lemmas[b].frame
                    && self.lemmas[a].clause.subsumes(&self.lemmas[b].clause)
                    && !(self.lemmas[a].clause == self.lemmas[b].clause
                        && self.lemmas[a].frame == self.lemmas[b].frame
                        && a > b)
                {
                    self.lemmas[b].deleted = true;
                    dropped += 1;
                }
            }
        }
        dropped
    }

    /// Clauses of the inductive invariant once delta_i is empty:
    /// everything still asserted at frames above i.
    pub fn invariant_clauses(&self, fixpoint: usize) -> Vec<Clause> {
        let mut out: Vec<Clause> = self
            .lemmas
            .iter()
            .filter(|l| !l.deleted && l.frame > fixpoint)
            .map(|l| l.clause.clone())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Per-frame live clause counts (diagnostics).
    pub fn profile(&self) -> Vec<usize> {
        (1..=self.top()).map(|i| self.delta_len(i)).collect()
    }
}

impl Default for FrameSequence {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lits::StateLit;

    fn clause(lits: &[i32]) -> Clause {
        Clause::new(
            lits.iter()
                .map(|&x| StateLit::from_signed(x).unwrap())
                .collect(),
        )
    }

    #[test]
    fn add_and_fixpoint_detection() {
        let mut f = FrameSequence::new();
        f.extend(); // top = 2
        assert!(f.delta_is_empty(1));
        f.add_lemma(clause(&[1, 2]), 1);
        assert!(!f.delta_is_empty(1));
        assert!(f.delta_is_empty(2));
    }

    #[test]
    fn stronger_lemma_at_higher_frame_subsumes() {
        let mut f = FrameSequence::new();
        f.extend();
        f.add_lemma(clause(&[1, 2, 3]), 1);
        let out = f.add_lemma(clause(&[1, 2]), 2);
        assert!(matches!(out, AddOutcome::Added { subsumed_dropped: 1 }));
        // the wide clause is gone, delta_1 now empty
        assert!(f.delta_is_empty(1));
        assert_eq!(f.delta_len(2), 1);
        // adding it back is redundant
        assert_eq!(f.add_lemma(clause(&[1, 2, 3]), 1), AddOutcome::Redundant);
    }

    #[test]
    fn push_forward_moves_and_drops_redundant() {
        let mut f = FrameSequence::new();
        f.extend();
        f.extend(); // top = 3
        let _ = f.add_lemma(clause(&[1, 2]), 1);
        let idx = f.delta(1)[0];
        assert!(f.push_forward(idx));
        assert_eq!(f.lemma(idx).frame, 2);
        let _ = f.add_lemma(clause(&[1]), 3);
        // pushing the wide clause into frame 3's shadow drops it
        assert!(!f.push_forward(idx));
        assert!(f.lemma(idx).deleted);
    }

    #[test]
    fn ctp_invalidated_by_stronger_frame() {
        let mut f = FrameSequence::new();
        f.extend();
        f.add_lemma(clause(&[1, 2]), 1); // latch0 or latch1
        let idx = f.delta(1)[0];
        assert!(!f.ctp_still_valid(idx), "no cache recorded yet");
        // state: latch0 = true satisfies the lemma's own clause
        f.set_ctp(idx, vec![true, false, false]);
        assert!(f.ctp_still_valid(idx));
        // a new lemma at a higher frame that the state violates
        f.add_lemma(clause(&[-1]), 2);
        assert!(!f.ctp_still_valid(idx));
    }

    #[test]
    fn invariant_collects_frames_above_fixpoint() {
        let mut f = FrameSequence::new();
        f.extend();
        f.extend();
        f.add_lemma(clause(&[1]), 2);
        f.add_lemma(clause(&[2]), 3);
        assert!(f.delta_is_empty(1));
        let inv = f.invariant_clauses(1);
        assert_eq!(inv.len(), 2);
    }
}
