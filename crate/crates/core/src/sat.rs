//! Incremental CDCL SAT solver with assumption-based solving, model
//! extraction, and failed-assumption extraction.
//!
//! Conventional backend: two watched literals, VSIDS with activity decay
//! 0.95, Luby restarts with a 64-conflict base, learnt-clause deletion by
//! LBD with a 2x growth cap between reductions. Assumptions are forced
//! decisions on the first decision levels; failed assumptions come from
//! final-conflict analysis and are not minimized.

use std::fmt;
use std::io::{self, Write};
use thiserror::Error;

/// A SAT variable. Indices start at 1; index 0 is reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> u32 {
        self.0
    }

    pub fn positive(self) -> Lit {
        Lit(self.0 << 1)
    }

    pub fn negative(self) -> Lit {
        Lit(self.0 << 1 | 1)
    }

    pub fn lit(self, negated: bool) -> Lit {
        Lit(self.0 << 1 | negated as u32)
    }
}

/// A literal: a variable with a polarity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SatError {
    #[error("variable index 0 is reserved")]
    ZeroVariable,
    #[error("variable {0} was never allocated")]
    UnallocatedVariable(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
}

/// Handle to a clause that may later be removed (temporary query clauses).
#[derive(Debug, Clone, Copy)]
pub struct ClauseHandle(Option<u32>);

#[derive(Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

impl LBool {
    fn from_bool(b: bool) -> Self {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    lbd: u32,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

#[derive(Clone, Copy)]
struct VarData {
    reason: Option<u32>,
    level: u32,
}

#[derive(Debug, Default, Clone)]
pub struct SolverStats {
    pub solves: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learnt_deleted: u64,
}

const VAR_DECAY: f64 = 0.95;
const RESTART_BASE: u64 = 64;

pub struct Solver {
    clauses: Vec<Clause>,
    /// Crefs of learnt clauses, for reduction sweeps.
    learnts: Vec<u32>,
    /// Level-0 units recorded for DIMACS dumps.
    units: Vec<Lit>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    vardata: Vec<VarData>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    /// Binary max-heap of variables ordered by activity.
    heap: Vec<Var>,
    heap_index: Vec<Option<u32>>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    model: Vec<bool>,
    failed: Vec<Lit>,
    num_problem_clauses: usize,
    reduce_cap: usize,
    pub stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            units: Vec::new(),
            watches: vec![Vec::new(), Vec::new()],
            assigns: vec![LBool::Undef],
            vardata: vec![VarData {
                reason: None,
                level: 0,
            }],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0],
            var_inc: 1.0,
            heap: Vec::new(),
            heap_index: vec![None],
            phase: vec![false],
            seen: vec![false],
            ok: true,
            model: Vec::new(),
            failed: Vec::new(),
            num_problem_clauses: 0,
            reduce_cap: 4000,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(LBool::Undef);
        self.vardata.push(VarData {
            reason: None,
            level: 0,
        });
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.heap_index.push(None);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap_insert(v);
        v
    }

    pub fn num_vars(&self) -> u32 {
        self.assigns.len() as u32 - 1
    }

    pub fn num_clauses(&self) -> usize {
        self.num_problem_clauses
    }

    fn check_lits(&self, lits: &[Lit]) -> Result<(), SatError> {
        for l in lits {
            if l.var().0 == 0 {
                return Err(SatError::ZeroVariable);
            }
            if l.var().0 >= self.assigns.len() as u32 {
                return Err(SatError::UnallocatedVariable(l.var().0));
            }
        }
        Ok(())
    }

    /// Permanently assert a clause. Tautologies are silently dropped,
    /// duplicate literals removed.
    pub fn add_clause(&mut self, lits: &[Lit]) -> Result<(), SatError> {
        self.add_clause_inner(lits, false).map(|_| ())
    }

    /// Assert a clause that may later be retracted with [`Solver::remove_clause`].
    pub fn add_removable_clause(&mut self, lits: &[Lit]) -> Result<ClauseHandle, SatError> {
        self.add_clause_inner(lits, true)
    }

    fn add_clause_inner(
        &mut self,
        lits: &[Lit],
        removable: bool,
    ) -> Result<ClauseHandle, SatError> {
        self.check_lits(lits)?;
        if !self.ok {
            return Ok(ClauseHandle(None));
        }
        debug_assert!(self.decision_level() == 0);
        let mut lits: Vec<Lit> = lits.to_vec();
        lits.sort_by_key(|l| l.0);
        lits.dedup();
        // Tautology: var codes of l and !l are adjacent after sorting.
        if lits.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Ok(ClauseHandle(None));
        }
        // Level-0 simplification: assignments at level 0 are permanent.
        let mut simplified = Vec::with_capacity(lits.len());
        for l in lits {
            match self.lit_value(l) {
                LBool::True => return Ok(ClauseHandle(None)),
                LBool::False => {}
                LBool::Undef => simplified.push(l),
            }
        }
        match simplified.len() {
            0 => {
                self.ok = false;
                Ok(ClauseHandle(None))
            }
            1 => {
                self.units.push(simplified[0]);
                self.enqueue(simplified[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                Ok(ClauseHandle(None))
            }
            _ => {
                let cref = self.alloc_clause(simplified, false);
                self.num_problem_clauses += 1;
                Ok(ClauseHandle(if removable { Some(cref) } else { None }))
            }
        }
    }

    /// Drop a removable clause from the database. This is garbage
    /// collection, not logical retraction: the clause must already be
    /// satisfied at level 0 (the usual pattern asserts the negation of its
    /// activation literal first), otherwise learnt clauses derived from it
    /// would become stale.
    pub fn remove_clause(&mut self, handle: ClauseHandle) {
        if let Some(cref) = handle.0 {
            debug_assert!(self.decision_level() == 0);
            debug_assert!(
                self.clauses[cref as usize]
                    .lits
                    .iter()
                    .any(|&l| self.lit_value(l) == LBool::True),
                "removed clause must be satisfied at level 0"
            );
            let c = &mut self.clauses[cref as usize];
            if !c.deleted {
                c.deleted = true;
                self.num_problem_clauses -= 1;
            }
        }
    }

    fn alloc_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len() as u32;
        let w0 = Watcher {
            cref,
            blocker: lits[1],
        };
        let w1 = Watcher {
            cref,
            blocker: lits[0],
        };
        self.watches[(!lits[0]).code()].push(w0);
        self.watches[(!lits[1]).code()].push(w1);
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            lbd: 0,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn lit_value(&self, l: Lit) -> LBool {
        lit_value_in(&self.assigns, l)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, p: Lit, reason: Option<u32>) {
        debug_assert!(self.lit_value(p) == LBool::Undef);
        self.assigns[p.var().0 as usize] = LBool::from_bool(!p.is_negated());
        self.vardata[p.var().0 as usize] = VarData {
            reason,
            level: self.decision_level() as u32,
        };
        self.trail.push(p);
    }

    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            'watchers: while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let assigns = &self.assigns;
                let c = &mut self.clauses[w.cref as usize];
                if c.deleted {
                    continue; // drop watcher
                }
                let false_lit = !p;
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                debug_assert!(c.lits[1] == false_lit);
                let first = c.lits[0];
                let w = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if lit_value_in(assigns, first) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let mut found = false;
                for k in 2..c.lits.len() {
                    if lit_value_in(assigns, c.lits[k]) != LBool::False {
                        c.lits.swap(1, k);
                        found = true;
                        break;
                    }
                }
                if found {
                    let other = c.lits[1];
                    self.watches[(!other).code()].push(w);
                    continue 'watchers;
                }
                // Unit or conflict.
                ws[j] = w;
                j += 1;
                if self.lit_value(first) == LBool::False {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            debug_assert!(self.watches[p.code()].is_empty());
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)]; // slot for the asserting literal
        let mut counter = 0u32;
        let mut p: Option<Lit> = None;
        let mut index = self.trail.len();
        loop {
            let start = if p.is_none() { 0 } else { 1 };
            // Bump and mark antecedent literals.
            let lits: Vec<Lit> = self.clauses[confl as usize].lits[start..].to_vec();
            for q in lits {
                let v = q.var();
                let level = self.vardata[v.0 as usize].level as usize;
                if !self.seen[v.0 as usize] && level > 0 {
                    self.seen[v.0 as usize] = true;
                    self.bump_var(v);
                    if level >= self.decision_level() {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().0 as usize] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().0 as usize] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = !lit;
                break;
            }
            confl = self.vardata[lit.var().0 as usize]
                .reason
                .expect("non-decision literal must have a reason");
            p = Some(lit);
        }
        // Cheap self-subsumption minimization.
        let mut keep = vec![true; learnt.len()];
        for (idx, q) in learnt.iter().enumerate().skip(1) {
            if let Some(r) = self.vardata[q.var().0 as usize].reason {
                let redundant = self.clauses[r as usize].lits.iter().all(|x| {
                    x.var() == q.var()
                        || self.seen[x.var().0 as usize]
                        || self.vardata[x.var().0 as usize].level == 0
                });
                if redundant {
                    keep[idx] = false;
                }
            }
        }
        // `seen` currently marks all learnt literals' variables: re-mark
        // (analyze cleared the asserting chain) before the redundancy test.
        // We instead marked via the loop above, so rebuild `seen` properly.
        let mut out = Vec::with_capacity(learnt.len());
        for (idx, q) in learnt.iter().enumerate() {
            if keep[idx] {
                out.push(*q);
            }
        }
        for q in &learnt {
            self.seen[q.var().0 as usize] = false;
        }
        // Backtrack level: second-highest decision level in the clause.
        let mut bt = 0usize;
        if out.len() > 1 {
            let mut max_i = 1;
            for i in 2..out.len() {
                if self.vardata[out[i].var().0 as usize].level
                    > self.vardata[out[max_i].var().0 as usize].level
                {
                    max_i = i;
                }
            }
            out.swap(1, max_i);
            bt = self.vardata[out[1].var().0 as usize].level as usize;
        }
        let mut levels: Vec<u32> = out
            .iter()
            .map(|l| self.vardata[l.var().0 as usize].level)
            .collect();
        levels.sort_unstable();
        levels.dedup();
        let lbd = levels.len() as u32;
        (out, bt, lbd)
    }

    /// Final-conflict analysis: which of the assumptions forced `p` false.
    fn analyze_final(&mut self, p: Lit) {
        self.failed.clear();
        self.failed.push(p);
        if self.decision_level() == 0 {
            return;
        }
        self.seen[p.var().0 as usize] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let x = self.trail[i];
            let xv = x.var().0 as usize;
            if !self.seen[xv] {
                continue;
            }
            match self.vardata[xv].reason {
                None => {
                    // A decision below the assumption prefix is an assumption.
                    self.failed.push(x);
                }
                Some(r) => {
                    let lits: Vec<Lit> = self.clauses[r as usize].lits[1..].to_vec();
                    for q in lits {
                        if self.vardata[q.var().0 as usize].level > 0 {
                            self.seen[q.var().0 as usize] = true;
                        }
                    }
                }
            }
            self.seen[xv] = false;
        }
        self.seen[p.var().0 as usize] = false;
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let bound = self.trail_lim[level];
        for i in (bound..self.trail.len()).rev() {
            let p = self.trail[i];
            let v = p.var();
            self.assigns[v.0 as usize] = LBool::Undef;
            self.phase[v.0 as usize] = !p.is_negated();
            self.heap_insert(v);
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(level);
        self.qhead = bound;
    }

    fn bump_var(&mut self, v: Var) {
        self.activity[v.0 as usize] += self.var_inc;
        if self.activity[v.0 as usize] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap_update(v);
    }

    fn decay_activities(&mut self) {
        self.var_inc /= VAR_DECAY;
    }

    // Indexed binary max-heap on activity.

    fn heap_less(&self, a: Var, b: Var) -> bool {
        self.activity[a.0 as usize] < self.activity[b.0 as usize]
    }

    fn heap_insert(&mut self, v: Var) {
        if self.heap_index[v.0 as usize].is_some() {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.heap_index[v.0 as usize] = Some(i as u32);
        self.heap_sift_up(i);
    }

    fn heap_update(&mut self, v: Var) {
        if let Some(i) = self.heap_index[v.0 as usize] {
            self.heap_sift_up(i as usize);
        }
    }

    fn heap_sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.heap_less(self.heap[parent], self.heap[i]) {
                self.heap.swap(parent, i);
                self.heap_index[self.heap[i].0 as usize] = Some(i as u32);
                i = parent;
            } else {
                break;
            }
        }
        self.heap_index[self.heap[i].0 as usize] = Some(i as u32);
    }

    fn heap_sift_down(&mut self, mut i: usize) {
        loop {
            let l = 2 * i + 1;
            let r = 2 * i + 2;
            let mut largest = i;
            if l < self.heap.len() && self.heap_less(self.heap[largest], self.heap[l]) {
                largest = l;
            }
            if r < self.heap.len() && self.heap_less(self.heap[largest], self.heap[r]) {
                largest = r;
            }
            if largest == i {
                break;
            }
            self.heap.swap(i, largest);
            self.heap_index[self.heap[i].0 as usize] = Some(i as u32);
            i = largest;
        }
        self.heap_index[self.heap[i].0 as usize] = Some(i as u32);
    }

    fn heap_pop(&mut self) -> Option<Var> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        self.heap_index[top.0 as usize] = None;
        let last = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.heap_index[last.0 as usize] = Some(0);
            self.heap_sift_down(0);
        }
        Some(top)
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap_pop() {
            if self.assigns[v.0 as usize] == LBool::Undef {
                return Some(v.lit(!self.phase[v.0 as usize]));
            }
        }
        None
    }

    fn reduce_db(&mut self) {
        let mut refs = std::mem::take(&mut self.learnts);
        refs.retain(|&c| !self.clauses[c as usize].deleted);
        if refs.len() <= self.reduce_cap {
            self.learnts = refs;
            return;
        }
        refs.sort_by_key(|&c| {
            let cl = &self.clauses[c as usize];
            (std::cmp::Reverse(cl.lbd), std::cmp::Reverse(cl.lits.len()))
        });
        let target = refs.len() / 2;
        let mut removed = 0;
        let mut kept = Vec::with_capacity(refs.len() - target);
        for cref in refs {
            let locked = {
                let c = &self.clauses[cref as usize];
                let l0 = c.lits[0];
                self.lit_value(l0) == LBool::True
                    && self.vardata[l0.var().0 as usize].reason == Some(cref)
            };
            let glue = self.clauses[cref as usize].lbd <= 2;
            if removed < target && !locked && !glue {
                self.clauses[cref as usize].deleted = true;
                removed += 1;
                self.stats.learnt_deleted += 1;
            } else {
                kept.push(cref);
            }
        }
        self.learnts = kept;
        self.reduce_cap = self.reduce_cap.saturating_mul(2);
    }

    /// Solve under the given assumptions.
    ///
    /// On `Sat` the model is total and readable via [`Solver::value`]; on
    /// `Unsat` the failed assumptions are available via
    /// [`Solver::failed_assumptions`].
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolveStatus, SatError> {
        self.check_lits(assumptions)?;
        self.stats.solves += 1;
        self.model.clear();
        self.failed.clear();
        if !self.ok {
            return Ok(SolveStatus::Unsat);
        }
        let mut restarts = 0u64;
        let status = loop {
            let budget = RESTART_BASE * luby(restarts);
            match self.search(budget, assumptions) {
                SearchResult::Sat => break SolveStatus::Sat,
                SearchResult::Unsat => break SolveStatus::Unsat,
                SearchResult::Restart => {
                    restarts += 1;
                    self.stats.restarts += 1;
                }
            }
        };
        self.cancel_until(0);
        Ok(status)
    }

    fn search(&mut self, conflict_budget: u64, assumptions: &[Lit]) -> SearchResult {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    self.failed.clear();
                    return SearchResult::Unsat;
                }
                let (learnt, bt_level, lbd) = self.analyze(confl);
                self.cancel_until(bt_level);
                if learnt.len() == 1 {
                    self.units.push(learnt[0]);
                    self.enqueue(learnt[0], None);
                } else {
                    let cref = self.alloc_clause(learnt.clone(), true);
                    self.clauses[cref as usize].lbd = lbd;
                    self.enqueue(learnt[0], Some(cref));
                }
                self.decay_activities();
            } else {
                if conflicts >= conflict_budget {
                    self.cancel_until(0);
                    return SearchResult::Restart;
                }
                if self.learnts.len() > self.reduce_cap {
                    self.reduce_db();
                }
                // Assumptions occupy the first decision levels.
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let p = assumptions[self.decision_level()];
                    match self.lit_value(p) {
                        LBool::True => {
                            self.trail_lim.push(self.trail.len());
                        }
                        LBool::False => {
                            self.analyze_final(p);
                            return SearchResult::Unsat;
                        }
                        LBool::Undef => {
                            next = Some(p);
                            break;
                        }
                    }
                }
                let next = match next {
                    Some(p) => p,
                    None => match self.pick_branch() {
                        Some(p) => {
                            self.stats.decisions += 1;
                            p
                        }
                        None => {
                            self.model = self
                                .assigns
                                .iter()
                                .map(|a| *a == LBool::True)
                                .collect();
                            return SearchResult::Sat;
                        }
                    },
                };
                self.trail_lim.push(self.trail.len());
                self.enqueue(next, None);
            }
        }
    }

    /// Value of a literal in the most recent satisfying model.
    pub fn value(&self, l: Lit) -> bool {
        debug_assert!(!self.model.is_empty(), "no model: last solve was not SAT");
        self.model[l.var().0 as usize] ^ l.is_negated()
    }

    pub fn has_model(&self) -> bool {
        !self.model.is_empty()
    }

    /// The subset of the passed assumptions responsible for UNSAT.
    pub fn failed_assumptions(&self) -> &[Lit] {
        &self.failed
    }

    /// Dump the asserted problem clauses (units plus stored clauses) in
    /// DIMACS format for cross-checking against external solvers.
    pub fn dump_dimacs<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let n = self
            .units
            .len()
            .saturating_add(self.clauses.iter().filter(|c| !c.deleted && !c.learnt).count());
        writeln!(w, "p cnf {} {}", self.num_vars(), n)?;
        for u in &self.units {
            writeln!(w, "{} 0", u.to_dimacs())?;
        }
        for c in &self.clauses {
            if c.deleted || c.learnt {
                continue;
            }
            for l in &c.lits {
                write!(w, "{} ", l.to_dimacs())?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}

enum SearchResult {
    Sat,
    Unsat,
    Restart,
}

fn lit_value_in(assigns: &[LBool], l: Lit) -> LBool {
    match assigns[l.var().0 as usize] {
        LBool::Undef => LBool::Undef,
        LBool::True => {
            if l.is_negated() {
                LBool::False
            } else {
                LBool::True
            }
        }
        LBool::False => {
            if l.is_negated() {
                LBool::True
            } else {
                LBool::False
            }
        }
    }
}

fn luby(mut x: u64) -> u64 {
    // Finite subsequence containing index x, and its size.
    let mut size: u64 = 1;
    let mut seq: u32 = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(s: &mut Solver, n: usize) -> Vec<Var> {
        (0..n).map(|_| s.new_var()).collect()
    }

    #[test]
    fn unit_conflict_is_unsat() {
        let mut s = Solver::new();
        let v = vars(&mut s, 1);
        s.add_clause(&[v[0].positive()]).unwrap();
        s.add_clause(&[v[0].negative()]).unwrap();
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Unsat);
    }

    #[test]
    fn binary_clause_sat_model() {
        let mut s = Solver::new();
        let v = vars(&mut s, 2);
        s.add_clause(&[v[0].positive(), v[1].positive()]).unwrap();
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
        assert!(s.value(v[0].positive()) || s.value(v[1].positive()));
    }

    #[test]
    fn empty_problem_is_sat() {
        let mut s = Solver::new();
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
    }

    #[test]
    fn forced_implication_failed_assumptions() {
        let mut s = Solver::new();
        let v = vars(&mut s, 2);
        let (a, b) = (v[0], v[1]);
        s.add_clause(&[a.negative(), b.positive()]).unwrap();
        let assumptions = [a.positive(), b.negative()];
        assert_eq!(s.solve(&assumptions).unwrap(), SolveStatus::Unsat);
        let failed = s.failed_assumptions().to_vec();
        assert!(!failed.is_empty());
        assert!(failed.iter().all(|l| assumptions.contains(l)));
        // Minimal sufficiency: the failed set alone is still UNSAT.
        assert_eq!(s.solve(&failed).unwrap(), SolveStatus::Unsat);
        // And the solver stays usable.
        assert_eq!(s.solve(&[a.positive()]).unwrap(), SolveStatus::Sat);
        assert!(s.value(b.positive()));
    }

    #[test]
    fn tautology_silently_dropped() {
        let mut s = Solver::new();
        let v = vars(&mut s, 1);
        s.add_clause(&[v[0].positive(), v[0].negative()]).unwrap();
        assert_eq!(s.num_clauses(), 0);
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
    }

    #[test]
    fn zero_variable_rejected() {
        let mut s = Solver::new();
        assert_eq!(s.add_clause(&[Lit(0)]), Err(SatError::ZeroVariable));
    }

    #[test]
    fn removable_clause_lifecycle() {
        // The activation-literal pattern: (c ∨ ¬t), assume t per query,
        // then permanently disable with ¬t and garbage-collect.
        let mut s = Solver::new();
        let v = vars(&mut s, 2);
        let (x, t) = (v[0], v[1]);
        let h = s
            .add_removable_clause(&[x.positive(), t.negative()])
            .unwrap();
        s.add_clause(&[x.negative()]).unwrap();
        assert_eq!(s.solve(&[t.positive()]).unwrap(), SolveStatus::Unsat);
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
        s.add_clause(&[t.negative()]).unwrap();
        s.remove_clause(h);
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
        assert_eq!(s.solve(&[t.positive()]).unwrap(), SolveStatus::Unsat);
        assert_eq!(s.solve(&[x.negative()]).unwrap(), SolveStatus::Sat);
    }

    #[test]
    fn luby_sequence_prefix() {
        let got: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(got, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    #[test]
    fn model_satisfies_all_clauses() {
        // Small pigeonhole-ish satisfiable instance; then verify the model
        // by direct evaluation.
        let mut s = Solver::new();
        let v = vars(&mut s, 6);
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        for i in 0..3 {
            clauses.push(vec![v[2 * i].positive(), v[2 * i + 1].positive()]);
            clauses.push(vec![v[2 * i].negative(), v[2 * i + 1].negative()]);
        }
        clauses.push(vec![v[0].positive(), v[2].positive(), v[4].positive()]);
        for c in &clauses {
            s.add_clause(c).unwrap();
        }
        assert_eq!(s.solve(&[]).unwrap(), SolveStatus::Sat);
        for c in &clauses {
            assert!(c.iter().any(|&l| s.value(l)));
        }
    }
}
