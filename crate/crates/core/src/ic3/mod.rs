//! The IC3 main loop and its subroutines.
//!
//! Base cases I ∧ ¬P and I ∧ T ∧ ¬P' are checked first. Each level then
//! drains counterexamples-to-induction from the top frame (states that are
//! bad in place or have a bad successor), discharging the obligation queue
//! by recursive blocking: a SAT pre-image query yields a generalized
//! predecessor obligation, an UNSAT one licenses a relatively inductive
//! lemma. After blocking, clauses are pushed forward; SAFE is declared when
//! two adjacent frames coincide, UNSAFE when an obligation chain reaches
//! frame 0. Every heuristic touchpoint (obligation selection, inductive
//! and predecessor generalization, push scheduling) is routed through the
//! slot policies in [`policy`] and never through the proof logic.

pub mod frames;
pub mod policy;
pub mod queue;

use crate::certify::{Certificate, Witness};
use crate::encode::{build_encoding, CnfEncoding};
use crate::lits::{Cube, StateLit};
use crate::sat::{Lit, SolveStatus, Solver};
use crate::tsys::TransitionSystem;
use frames::{AddOutcome, FrameSequence};
use policy::PolicySet;
use queue::{CtiTail, Obligation, ObligationQueue, PoNode};
use std::collections::{BTreeMap, HashSet};
use std::rc::Rc;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub timeout: Option<Duration>,
    pub policies: PolicySet,
    pub seed: u64,
    pub max_sat_calls: Option<u64>,
    /// Re-verify frame invariants with extra SAT queries at propagation
    /// boundaries. Lemma-level initiation/consecution is always re-checked.
    pub debug_checks: bool,
    /// Dump the main solver's clause database after the run (debugging,
    /// cross-checks against external solvers).
    pub dimacs_dump: Option<std::path::PathBuf>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            timeout: None,
            policies: PolicySet::default(),
            seed: 0x1c3,
            max_sat_calls: None,
            debug_checks: cfg!(debug_assertions),
            dimacs_dump: None,
        }
    }
}

#[derive(Debug)]
pub enum Verdict {
    Safe(Certificate),
    Unsafe(Witness),
    Timeout,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Safe(_) => "SAFE",
            Verdict::Unsafe(_) => "UNSAFE",
            Verdict::Timeout => "TIMEOUT",
        }
    }
}

/// Per-frame scheduling state owned by the push policies.
#[derive(Debug, Clone, Default)]
pub struct HeuristicState {
    pub push_success_rate: f64,
    pub stall_streak: Vec<u32>,
    pub push_budget: Vec<u32>,
    pub po_priority_params: BTreeMap<String, f64>,
}

#[derive(Debug)]
pub struct CheckResult {
    pub verdict: Verdict,
    /// Instrumentation counters, printed as `. HYP <key>: <value>` lines.
    pub counters: BTreeMap<String, u64>,
    pub heuristics: HeuristicState,
}

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("resource limit exceeded (max SAT calls)")]
    ResourceLimit,
}

enum Abort {
    Timeout,
    Resource,
    Internal(String),
}

type Step<T> = Result<T, Abort>;

enum BlockOutcome {
    Blocked,
    Cex(Box<Witness>),
}

#[derive(Default)]
struct Counters {
    sat_calls: u64,
    ctis: u64,
    ctis_zero_step: u64,
    obligations: u64,
    stale_skips: u64,
    lemmas: u64,
    lemma_literals: u64,
    subsumed: u64,
    ind_gen_calls: u64,
    ind_gen_queries: u64,
    pred_lift_drops: u64,
    push_rounds: u64,
    push_attempts: u64,
    pushed: u64,
    frame_skips: u64,
    simplify_runs: u64,
}

struct PushState {
    round: u64,
    stall_streak: Vec<u32>,
    budget: Vec<u32>,
    last_rate: f64,
}

/// Check the safety property of `ts` under the given options.
pub fn check(ts: &TransitionSystem, opts: &CheckOptions) -> Result<CheckResult, CheckError> {
    let mut checker = Checker::new(ts, opts);
    let outcome = checker.run();
    if let Some(path) = &opts.dimacs_dump {
        if let Ok(mut file) = std::fs::File::create(path) {
            let _ = checker.solver.dump_dimacs(&mut file);
        }
    }
    match outcome {
        Ok(verdict) => Ok(checker.result(verdict)),
        Err(Abort::Timeout) => Ok(checker.result(Verdict::Timeout)),
        Err(Abort::Resource) => Err(CheckError::ResourceLimit),
        Err(Abort::Internal(msg)) => Err(CheckError::Internal(msg)),
    }
}

struct Checker<'a> {
    ts: &'a TransitionSystem,
    opts: &'a CheckOptions,
    solver: Solver,
    enc: CnfEncoding,
    init_solver: Solver,
    init_lits: Vec<Lit>,
    frames: FrameSequence,
    counters: Counters,
    push: PushState,
    deadline: Option<Instant>,
}

impl<'a> Checker<'a> {
    fn new(ts: &'a TransitionSystem, opts: &'a CheckOptions) -> Self {
        let mut solver = Solver::new();
        let mut enc = build_encoding(ts, &mut solver);
        let frames = FrameSequence::new();
        enc.frame_act(&mut solver, frames.top());

        // Dedicated solver for 0-step queries I ∧ cube.
        let mut init_solver = Solver::new();
        let init_lits: Vec<Lit> = (0..ts.num_latches())
            .map(|_| init_solver.new_var().positive())
            .collect();
        for &(latch, value) in ts.init_units() {
            let lit = if value {
                init_lits[latch]
            } else {
                !init_lits[latch]
            };
            init_solver.add_clause(&[lit]).expect("init unit");
        }

        let deadline = opts.timeout.map(|t| Instant::now() + t);
        Checker {
            ts,
            opts,
            solver,
            enc,
            init_solver,
            init_lits,
            frames,
            counters: Counters::default(),
            push: PushState {
                round: 0,
                stall_streak: vec![0; 2],
                budget: vec![0; 2],
                last_rate: 0.0,
            },
            deadline,
        }
    }

    fn result(&self, verdict: Verdict) -> CheckResult {
        let mut counters = BTreeMap::new();
        let c = &self.counters;
        let entries: [(&str, u64); 18] = [
            ("sat_calls", c.sat_calls),
            ("sat_conflicts", self.solver.stats.conflicts),
            ("sat_decisions", self.solver.stats.decisions),
            ("ctis", c.ctis),
            ("ctis_zero_step", c.ctis_zero_step),
            ("obligations", c.obligations),
            ("stale_skips", c.stale_skips),
            ("lemmas", c.lemmas),
            ("lemma_literals", c.lemma_literals),
            ("subsumed", c.subsumed),
            ("ind_gen_calls", c.ind_gen_calls),
            ("ind_gen_queries", c.ind_gen_queries),
            ("pred_lift_drops", c.pred_lift_drops),
            ("push_rounds", c.push_rounds),
            ("push_attempts", c.push_attempts),
            ("pushed", c.pushed),
            ("frame_skips", c.frame_skips),
            ("simplify_runs", c.simplify_runs),
        ];
        for (k, v) in entries {
            counters.insert(k.to_string(), v);
        }
        counters.insert("frames".to_string(), self.frames.top() as u64);
        let heuristics = HeuristicState {
            push_success_rate: self.push.last_rate,
            stall_streak: self.push.stall_streak.clone(),
            push_budget: self.push.budget.clone(),
            po_priority_params: self.opts.policies.po_handling.params.clone(),
        };
        CheckResult {
            verdict,
            counters,
            heuristics,
        }
    }

    /// All SAT traffic funnels through here: wall clock and call budget are
    /// polled between calls, never mid-call.
    fn solve(&mut self, assumptions: &[Lit]) -> Step<SolveStatus> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(Abort::Timeout);
            }
        }
        if let Some(max) = self.opts.max_sat_calls {
            if self.counters.sat_calls >= max {
                return Err(Abort::Resource);
            }
        }
        self.counters.sat_calls += 1;
        Ok(self.solver.solve(assumptions).expect("allocated literals"))
    }

    fn solve_init(&mut self, cube: &Cube) -> Step<SolveStatus> {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                return Err(Abort::Timeout);
            }
        }
        self.counters.sat_calls += 1;
        let assumptions: Vec<Lit> = cube
            .iter()
            .map(|l| {
                let base = self.init_lits[l.latch()];
                if l.is_positive() {
                    base
                } else {
                    !base
                }
            })
            .collect();
        Ok(self
            .init_solver
            .solve(&assumptions)
            .expect("allocated literals"))
    }

    /// Activation assumptions for a query against F_from.
    fn frame_assumptions(&self, from: usize) -> Vec<Lit> {
        if from == 0 {
            vec![self.enc.act_init()]
        } else {
            (from..=self.frames.top()).map(|i| self.enc.act(i)).collect()
        }
    }

    fn extend_frames(&mut self) {
        self.frames.extend();
        let top = self.frames.top();
        self.enc.frame_act(&mut self.solver, top);
        let base = self
            .opts
            .policies
            .push()
            .budget
            .map(|b| b.base)
            .unwrap_or(0);
        while self.push.stall_streak.len() <= top + 1 {
            self.push.stall_streak.push(0);
            self.push.budget.push(base);
        }
    }

    fn run(&mut self) -> Step<Verdict> {
        if let Some(w) = self.base_cases()? {
            return Ok(Verdict::Unsafe(w));
        }
        self.extend_frames(); // sizes per-frame heuristic state for F_1
        loop {
            while let Some((cube, tail, state)) = self.find_cti()? {
                self.counters.ctis += 1;
                match self.block_one(cube, self.frames.top(), tail, state)? {
                    BlockOutcome::Blocked => {}
                    BlockOutcome::Cex(w) => return Ok(Verdict::Unsafe(*w)),
                }
            }
            self.push_clauses()?;
            if self.opts.debug_checks {
                // Monotonicity holds structurally in the delta
                // representation; F_i => P is re-checked by SAT queries.
                self.verify_frame_invariants()?;
            }
            if let Some(fix) = self.fixpoint() {
                let cert = Certificate::new(self.frames.invariant_clauses(fix));
                return Ok(Verdict::Safe(cert));
            }
            self.extend_frames();
        }
    }

    /// I ∧ ¬P and I ∧ T ∧ ¬P'.
    fn base_cases(&mut self) -> Step<Option<Witness>> {
        let prop = self.ts.circuit().property_index;
        if self.solve(&[self.enc.act_init(), self.enc.bad_cur()])? == SolveStatus::Sat {
            return Ok(Some(Witness {
                property_index: prop,
                initial_state: self.enc.model_state(&self.solver),
                input_frames: vec![self.enc.model_inputs(&self.solver)],
            }));
        }
        if self.solve(&[self.enc.act_init(), self.enc.bad_nxt()])? == SolveStatus::Sat {
            return Ok(Some(Witness {
                property_index: prop,
                initial_state: self.enc.model_state(&self.solver),
                input_frames: vec![
                    self.enc.model_inputs(&self.solver),
                    self.enc.model_next_inputs(&self.solver),
                ],
            }));
        }
        Ok(None)
    }

    /// A state of F_k that is bad in place (under some input) or has a bad
    /// successor. Returns the lifted cube, the witness tail, and the
    /// concrete model state.
    fn find_cti(&mut self) -> Step<Option<(Cube, CtiTail, Vec<bool>)>> {
        let k = self.frames.top();
        let mut assumptions = self.frame_assumptions(k);
        assumptions.push(self.enc.bad_cur());
        if self.solve(&assumptions)? == SolveStatus::Sat {
            let full = self.enc.model_latch_cube(&self.solver);
            let state = self.enc.model_state(&self.solver);
            let inputs = self.enc.model_inputs(&self.solver);
            let cube = self.lift(&[!self.enc.bad_cur()], &full, &inputs, None)?;
            self.counters.ctis_zero_step += 1;
            return Ok(Some((
                cube,
                CtiTail {
                    step_inputs: None,
                    firing_inputs: inputs,
                },
                state,
            )));
        }
        let mut assumptions = self.frame_assumptions(k);
        assumptions.push(self.enc.bad_nxt());
        if self.solve(&assumptions)? == SolveStatus::Sat {
            let full = self.enc.model_latch_cube(&self.solver);
            let state = self.enc.model_state(&self.solver);
            let inputs = self.enc.model_inputs(&self.solver);
            let next_inputs = self.enc.model_next_inputs(&self.solver);
            let cube = self.lift(
                &[!self.enc.bad_nxt()],
                &full,
                &inputs,
                Some(&next_inputs),
            )?;
            return Ok(Some((
                cube,
                CtiTail {
                    step_inputs: Some(inputs),
                    firing_inputs: next_inputs,
                },
                state,
            )));
        }
        Ok(None)
    }

    /// Assumption-based lifting: assert `blocked` (the negated target) as a
    /// removable clause, assume the full model, and keep the latch literals
    /// of the final conflict. Every state extending the returned cube
    /// reaches the target under the recorded inputs.
    fn lift(
        &mut self,
        blocked: &[Lit],
        latch_cube: &Cube,
        inputs: &[bool],
        next_inputs: Option<&[bool]>,
    ) -> Step<Cube> {
        let t = self.solver.new_var().positive();
        let mut clause = blocked.to_vec();
        clause.push(!t);
        let handle = self
            .solver
            .add_removable_clause(&clause)
            .expect("allocated literals");
        let mut latch_lits: Vec<(Lit, StateLit)> = latch_cube
            .iter()
            .map(|l| (self.enc.cur_lit(l), l))
            .collect();
        if self.opts.policies.pred_gen_reverse() {
            latch_lits.reverse();
        }
        let mut assumptions = vec![t];
        assumptions.extend(latch_lits.iter().map(|(s, _)| *s));
        for (i, &v) in inputs.iter().enumerate() {
            let l = self.enc.input_lit(i);
            assumptions.push(if v { l } else { !l });
        }
        if let Some(ni) = next_inputs {
            for (i, &v) in ni.iter().enumerate() {
                let l = self.enc.next_input_lit(i);
                assumptions.push(if v { l } else { !l });
            }
        }
        let status = self.solve(&assumptions)?;
        if status == SolveStatus::Sat {
            return Err(Abort::Internal(
                "lifting query unexpectedly SAT".to_string(),
            ));
        }
        let failed: HashSet<Lit> = self.solver.failed_assumptions().iter().copied().collect();
        let kept: Vec<StateLit> = latch_lits
            .iter()
            .filter(|(sat_lit, _)| failed.contains(sat_lit))
            .map(|(_, sl)| *sl)
            .collect();
        self.counters.pred_lift_drops += (latch_cube.len() - kept.len()) as u64;
        self.solver.add_clause(&[!t]).expect("allocated literal");
        self.solver.remove_clause(handle);
        Ok(Cube::new(kept))
    }

    fn block_one(
        &mut self,
        cube: Cube,
        k: usize,
        tail: CtiTail,
        state: Vec<bool>,
    ) -> Step<BlockOutcome> {
        let root = Rc::new(PoNode {
            cube,
            state,
            inputs_to_parent: None,
            parent: None,
            tail: Some(tail),
            depth: 0,
        });
        let mut q = ObligationQueue::new(self.opts.policies.po_order());
        q.push(Obligation {
            node: root,
            frame: k,
            age: 0,
        });
        self.block_obligations(q)
    }

    fn block_obligations(&mut self, mut q: ObligationQueue) -> Step<BlockOutcome> {
        while let Some(mut ob) = q.pop() {
            self.counters.obligations += 1;
            let i = ob.frame;
            // Stale obligations: already excluded from F_i.
            let mut assumptions = self.frame_assumptions(i);
            assumptions.extend(ob.node.cube.iter().map(|l| self.enc.cur_lit(l)));
            if self.solve(&assumptions)? == SolveStatus::Unsat {
                self.counters.stale_skips += 1;
                continue;
            }
            if i == 0 {
                return Ok(BlockOutcome::Cex(Box::new(self.witness_from_chain(&ob.node))));
            }
            // Pre-image: F_{i-1} ∧ T ∧ s'.
            let mut assumptions = self.frame_assumptions(i - 1);
            assumptions.extend(self.enc.prime(&ob.node.cube));
            if self.solve(&assumptions)? == SolveStatus::Sat {
                let full = self.enc.model_latch_cube(&self.solver);
                let state = self.enc.model_state(&self.solver);
                let inputs = self.enc.model_inputs(&self.solver);
                let pred = self.pred_gen(&full, &inputs, &ob.node.cube)?;
                let child = Rc::new(PoNode {
                    cube: pred,
                    state,
                    inputs_to_parent: Some(inputs),
                    parent: Some(ob.node.clone()),
                    tail: None,
                    depth: ob.node.depth + 1,
                });
                ob.age += 1;
                q.push(ob);
                q.push(Obligation {
                    node: child,
                    frame: i - 1,
                    age: 0,
                });
            } else {
                let seed = self.core_cube(&ob.node.cube);
                let clause = self.ind_gen(&ob.node.cube, i, seed)?;
                self.add_lemma(clause, i);
            }
        }
        Ok(BlockOutcome::Blocked)
    }

    /// Failed assumptions of the last query restricted to the primed cube,
    /// mapped back to state literals.
    fn core_cube(&self, cube: &Cube) -> Cube {
        let failed: HashSet<Lit> = self.solver.failed_assumptions().iter().copied().collect();
        Cube::new(
            cube.iter()
                .filter(|&l| failed.contains(&self.enc.nxt_lit(l)))
                .collect(),
        )
    }

    /// Predecessor generalization: keep the latch literals that the final
    /// conflict of `T ∧ ¬s'` under the full model needs.
    fn pred_gen(&mut self, full: &Cube, inputs: &[bool], target: &Cube) -> Step<Cube> {
        if !self.opts.policies.pred_gen_lift() {
            return Ok(full.clone());
        }
        let blocked: Vec<Lit> = target.iter().map(|l| !self.enc.nxt_lit(l)).collect();
        self.lift(&blocked, full, inputs, None)
    }

    /// Inductive generalization: shrink s to a sub-cube whose negation is
    /// initiated and relatively inductive at frame i. Single down-pass with
    /// a hard query budget; both conditions are re-verified at the end.
    fn ind_gen(&mut self, cube: &Cube, i: usize, seed: Cube) -> Step<crate::lits::Clause> {
        self.counters.ind_gen_calls += 1;
        debug_assert!(
            self.ts.cube_excludes_init(cube),
            "obligation cube intersects the initial states"
        );
        let mut current = if self.opts.policies.ind_gen_seed_from_core() && !seed.is_empty() {
            self.restore_init_exclusion(seed, cube)?
        } else {
            cube.clone()
        };
        let budget = self.opts.policies.ind_gen_budget(cube.len());
        let mut spent = 0u64;
        let mut idx = 0;
        while idx < current.len() && spent < budget {
            let lit = current.lits()[idx];
            if current.len() == 1 {
                break;
            }
            let cand = current.without(lit);
            if self.solve_init(&cand)? == SolveStatus::Sat {
                idx += 1;
                continue;
            }
            spent += 1;
            self.counters.ind_gen_queries += 1;
            match self.relative_induction(&cand, i)? {
                Some(shrunk) => {
                    // Core shrink is sound for consecution; it may break
                    // initiation, in which case fall back to the candidate.
                    current = if self.ts.cube_excludes_init(&shrunk) {
                        shrunk
                    } else {
                        cand
                    };
                }
                None => idx += 1,
            }
        }
        // Re-verify both postconditions with fresh queries.
        if self.solve_init(&current)? == SolveStatus::Sat {
            return Err(Abort::Internal(
                "ind_gen postcondition: initiation does not hold".to_string(),
            ));
        }
        if self.relative_induction(&current, i)?.is_none() {
            return Err(Abort::Internal(
                "ind_gen postcondition: relative inductiveness does not hold".to_string(),
            ));
        }
        Ok(current.negate())
    }

    /// F_{i-1} ∧ ¬cand ∧ T ∧ cand' — UNSAT means ¬cand is relatively
    /// inductive. On UNSAT, returns the sub-cube kept by the core.
    fn relative_induction(&mut self, cand: &Cube, i: usize) -> Step<Option<Cube>> {
        let t = self.solver.new_var().positive();
        let mut clause: Vec<Lit> = cand.negate().iter().map(|l| self.enc.cur_lit(l)).collect();
        clause.push(!t);
        let handle = self
            .solver
            .add_removable_clause(&clause)
            .expect("allocated literals");
        let mut assumptions = self.frame_assumptions(i - 1);
        assumptions.push(t);
        assumptions.extend(self.enc.prime(cand));
        let status = self.solve(&assumptions)?;
        let result = if status == SolveStatus::Unsat {
            let failed: HashSet<Lit> =
                self.solver.failed_assumptions().iter().copied().collect();
            Some(Cube::new(
                cand.iter()
                    .filter(|&l| failed.contains(&self.enc.nxt_lit(l)))
                    .collect(),
            ))
        } else {
            None
        };
        self.solver.add_clause(&[!t]).expect("allocated literal");
        self.solver.remove_clause(handle);
        Ok(result)
    }

    /// The seed core may have dropped the literal that keeps the cube away
    /// from I; restore one from the original cube.
    fn restore_init_exclusion(&mut self, seed: Cube, original: &Cube) -> Step<Cube> {
        if self.ts.cube_excludes_init(&seed) {
            return Ok(seed);
        }
        for l in original.iter() {
            if self.ts.init_value(l.latch()) == Some(!l.is_positive()) && !seed.contains(l) {
                let mut lits: Vec<StateLit> = seed.iter().collect();
                lits.push(l);
                return Ok(Cube::new(lits));
            }
        }
        Err(Abort::Internal(
            "cannot restore initiation: CTI cube intersects I".to_string(),
        ))
    }

    /// Learn clause c for frames 1..=i (delta representation stores it at i).
    fn add_lemma(&mut self, clause: crate::lits::Clause, i: usize) {
        self.counters.lemmas += 1;
        self.counters.lemma_literals += clause.len() as u64;
        match self.frames.add_lemma(clause.clone(), i) {
            AddOutcome::Added { subsumed_dropped } => {
                self.counters.subsumed += subsumed_dropped as u64;
                let mut lits: Vec<Lit> = clause.iter().map(|l| self.enc.cur_lit(l)).collect();
                lits.push(!self.enc.act(i));
                self.solver.add_clause(&lits).expect("allocated literals");
            }
            AddOutcome::Redundant => {
                debug_assert!(false, "fresh lemma cannot be redundant after a live obligation");
            }
        }
    }

    /// Propagate clauses forward per the push policy, then simplify per the
    /// policy's gating rule.
    ///
    /// Stall-aware skipping is exact: a frame (or clause) is only skipped
    /// when its recorded counterexample-to-push still satisfies the frame,
    /// so the skipped query would provably fail again. Skips therefore
    /// change the SAT-call count and nothing else.
    fn push_clauses(&mut self) -> Step<()> {
        let policy = self.opts.policies.push();
        let k = self.frames.top();
        self.push.round += 1;
        self.counters.push_rounds += 1;
        let mut round_attempts = 0u64;
        let mut round_success = 0u64;
        let mut pushed_this_round = false;
        for i in 1..k {
            let delta = self.frames.delta(i);
            if delta.is_empty() {
                continue;
            }
            if let Some(limit) = policy.stall_limit {
                if self.push.stall_streak[i] >= limit
                    && delta.iter().all(|&idx| self.frames.ctp_still_valid(idx))
                {
                    self.counters.frame_skips += 1;
                    continue;
                }
            }
            let mut order = delta;
            order.sort_by_key(|&idx| (self.frames.lemma(idx).clause.len(), idx));
            if policy.budget.is_some() {
                let off = (self.push.round as usize) % order.len();
                order.rotate_left(off);
            }
            let mut allowance = policy.budget.map(|_| self.push.budget[i].max(1));
            let mut consecutive_fail = 0u32;
            let mut attempted = 0u64;
            let mut pushed_here = 0u64;
            for idx in order {
                if self.frames.lemma(idx).deleted || self.frames.lemma(idx).frame != i {
                    continue;
                }
                // Under a budget, known-failing attempts are free.
                if policy.budget.is_some() && self.frames.ctp_still_valid(idx) {
                    continue;
                }
                if let Some(a) = allowance {
                    if a == 0 {
                        break;
                    }
                }
                let clause = self.frames.lemma(idx).clause.clone();
                let mut assumptions = self.frame_assumptions(i);
                assumptions.extend(clause.negate().iter().map(|l| self.enc.nxt_lit(l)));
                let status = self.solve(&assumptions)?;
                attempted += 1;
                self.counters.push_attempts += 1;
                if let Some(a) = &mut allowance {
                    *a -= 1;
                }
                if status == SolveStatus::Unsat {
                    if self.frames.push_forward(idx) {
                        let mut lits: Vec<Lit> =
                            clause.iter().map(|l| self.enc.cur_lit(l)).collect();
                        lits.push(!self.enc.act(i + 1));
                        self.solver.add_clause(&lits).expect("allocated literals");
                    }
                    self.counters.pushed += 1;
                    pushed_here += 1;
                    consecutive_fail = 0;
                } else {
                    self.frames.set_ctp(idx, self.enc.model_state(&self.solver));
                    consecutive_fail += 1;
                    if let Some(cut) = policy.early_cut {
                        if consecutive_fail >= cut {
                            break;
                        }
                    }
                }
            }
            round_attempts += attempted;
            round_success += pushed_here;
            if attempted > 0 {
                if pushed_here > 0 {
                    self.push.stall_streak[i] = 0;
                    pushed_this_round = true;
                } else {
                    self.push.stall_streak[i] += 1;
                }
            }
            if let Some(rule) = policy.budget {
                self.push.budget[i] = if pushed_here > 0 {
                    (self.push.budget[i].max(1) * 2).min(rule.cap)
                } else {
                    (self.push.budget[i] / 4).max(rule.floor)
                };
            }
        }
        let simplify = if policy.gate_simplify {
            pushed_this_round
                || (policy.checkpoint_every > 0 && self.push.round % policy.checkpoint_every == 0)
        } else {
            true
        };
        if simplify {
            self.counters.subsumed += self.frames.simplify() as u64;
            self.counters.simplify_runs += 1;
        }
        self.push.last_rate = if round_attempts > 0 {
            round_success as f64 / round_attempts as f64
        } else {
            0.0
        };
        Ok(())
    }

    /// First i >= 1 with F_i = F_{i+1}: in delta representation, an empty
    /// delta_i (no clause asserted strictly below i+1 remains unpushed).
    fn fixpoint(&self) -> Option<usize> {
        (1..self.frames.top()).find(|&i| self.frames.delta_is_empty(i))
    }

    /// Debug-mode frame checks: F_i ⇒ P for every i >= 1 (as "no F_i state
    /// can raise bad", inputs existential).
    fn verify_frame_invariants(&mut self) -> Step<()> {
        for i in 1..=self.frames.top() {
            let mut assumptions = self.frame_assumptions(i);
            assumptions.push(self.enc.bad_cur());
            if self.solve(&assumptions)? == SolveStatus::Sat {
                return Err(Abort::Internal(format!(
                    "frame invariant violated: F_{i} does not imply P"
                )));
            }
        }
        Ok(())
    }

    /// Reconstruct the input trace from a frame-0 obligation chain. The
    /// chain's lifting property guarantees each recorded input vector maps
    /// any state in its cube into the parent cube, so plain replay of the
    /// recorded inputs is exact.
    fn witness_from_chain(&self, node: &Rc<PoNode>) -> Witness {
        debug_assert!(self.ts.circuit().satisfies_init(&node.state));
        let mut input_frames = Vec::new();
        let mut cur = node.clone();
        loop {
            if let Some(inputs) = &cur.inputs_to_parent {
                input_frames.push(inputs.clone());
            }
            if let Some(tail) = &cur.tail {
                if let Some(step) = &tail.step_inputs {
                    input_frames.push(step.clone());
                }
                input_frames.push(tail.firing_inputs.clone());
                break;
            }
            let parent = cur.parent.clone().expect("chain ends at the CTI node");
            cur = parent;
        }
        Witness {
            property_index: self.ts.circuit().property_index,
            initial_state: node.state.clone(),
            input_frames,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aigbuild::{circuits, AigBuilder};
    use crate::aiger::Reset;
    use crate::certify;

    fn run(c: crate::aiger::AigerCircuit) -> (TransitionSystem, CheckResult) {
        let ts = TransitionSystem::new(c, 0).unwrap();
        let res = check(&ts, &CheckOptions::default()).unwrap();
        (ts, res)
    }

    #[test]
    fn constant_false_bad_is_safe_with_empty_certificate() {
        let c = crate::aiger::AigerCircuit::parse(b"aag 0 0 0 1 0\n0\n").unwrap();
        let (ts, res) = run(c);
        match &res.verdict {
            Verdict::Safe(cert) => {
                assert_eq!(cert.len(), 0);
                certify::check_certificate(&ts, cert).unwrap();
            }
            other => panic!("expected SAFE, got {}", other.name()),
        }
    }

    #[test]
    fn reset_one_latch_is_unsafe_at_step_zero() {
        let mut b = AigBuilder::new(0, 1);
        let l = b.latch_lit(0);
        b.set_next(0, l, Reset::One);
        b.add_bad(l);
        let (ts, res) = run(b.build());
        match &res.verdict {
            Verdict::Unsafe(w) => {
                assert_eq!(certify::replay_witness(&ts, w), Ok(0));
            }
            other => panic!("expected UNSAFE, got {}", other.name()),
        }
    }

    #[test]
    fn counter_reaching_ten_needs_at_least_ten_frames() {
        let c = circuits::counter(4, 10, true);
        let (ts, res) = run(c);
        match &res.verdict {
            Verdict::Unsafe(w) => {
                assert!(w.input_frames.len() >= 10, "got {}", w.input_frames.len());
                certify::replay_witness(&ts, w).unwrap();
            }
            other => panic!("expected UNSAFE, got {}", other.name()),
        }
    }

    #[test]
    fn two_step_cex_through_predecessor_chain() {
        // free-running 2-bit counter, bad at count 2: two steps from reset.
        let c = circuits::counter(2, 2, false);
        let (ts, res) = run(c);
        match &res.verdict {
            Verdict::Unsafe(w) => {
                let fired = certify::replay_witness(&ts, w).unwrap();
                assert_eq!(fired, 2);
            }
            other => panic!("expected UNSAFE, got {}", other.name()),
        }
    }

    use circuits::mod_counter;

    #[test]
    fn modular_counter_is_safe_and_certificate_checks() {
        let c = mod_counter(4, 6, 11);
        let (ts, res) = run(c);
        match &res.verdict {
            Verdict::Safe(cert) => {
                assert!(!cert.is_empty());
                certify::check_certificate(&ts, cert).unwrap();
            }
            other => panic!("expected SAFE, got {}", other.name()),
        }
    }

    #[test]
    fn verdicts_agree_across_all_policy_variants() {
        use super::policy::{registered_variants, SlotId, SlotPolicy};
        let safe = mod_counter(3, 5, 7);
        let unsafe_c = circuits::counter(3, 6, true);
        for (circuit, want_safe) in [(safe, true), (unsafe_c, false)] {
            let ts = TransitionSystem::new(circuit, 0).unwrap();
            for slot in SlotId::ALL {
                for &variant in registered_variants(slot) {
                    let mut opts = CheckOptions::default();
                    opts.policies
                        .apply(SlotPolicy::parse(&format!("{slot}={variant}")).unwrap())
                        .unwrap();
                    let res = check(&ts, &opts).unwrap();
                    match (&res.verdict, want_safe) {
                        (Verdict::Safe(cert), true) => {
                            certify::check_certificate(&ts, cert).unwrap()
                        }
                        (Verdict::Unsafe(w), false) => {
                            certify::replay_witness(&ts, w).unwrap();
                        }
                        (v, _) => panic!("{slot}={variant}: unexpected {}", v.name()),
                    }
                }
            }
        }
    }

    #[test]
    fn timeout_returns_timeout_verdict() {
        let c = mod_counter(4, 11, 12);
        let ts = TransitionSystem::new(c, 0).unwrap();
        let opts = CheckOptions {
            timeout: Some(Duration::from_nanos(1)),
            ..Default::default()
        };
        let res = check(&ts, &opts).unwrap();
        assert!(matches!(res.verdict, Verdict::Timeout));
        assert!(res.counters.contains_key("sat_calls"));
    }

    #[test]
    fn stall_skip_never_exceeds_gated_attempts_and_agrees() {
        // stall_skip only elides push queries whose failure is provable
        // from the cached counterexample, so relative to gated_simplify
        // the verdict is identical and the attempt count cannot grow.
        for circuit in [mod_counter(4, 9, 13), mod_counter(5, 21, 27)] {
            let ts = TransitionSystem::new(circuit, 0).unwrap();
            let mut gated = CheckOptions::default();
            gated.policies = PolicySet::from_specs(["push_prop=gated_simplify"]).unwrap();
            let base = check(&ts, &gated).unwrap();
            let mut opts = CheckOptions::default();
            opts.policies = PolicySet::from_specs(["push_prop=stall_skip,limit=1"]).unwrap();
            let skipping = check(&ts, &opts).unwrap();
            assert_eq!(base.verdict.name(), skipping.verdict.name());
            assert!(skipping.counters["push_attempts"] <= base.counters["push_attempts"]);
            assert_eq!(skipping.counters["lemmas"], base.counters["lemmas"]);
        }
    }

    #[test]
    fn stalled_frames_receive_zero_push_queries_when_skipped() {
        let circuit = circuits::mod_counter(8, 170, 201);
        let ts = TransitionSystem::new(circuit, 0).unwrap();
        let mut opts = CheckOptions {
            debug_checks: false,
            ..Default::default()
        };
        opts.policies = PolicySet::from_specs(["push_prop=stall_skip"]).unwrap();
        let res = check(&ts, &opts).unwrap();
        assert!(matches!(res.verdict, Verdict::Safe(_)));
        assert!(
            res.counters["frame_skips"] > 0,
            "no frame was ever skipped: {:?}",
            res.counters
        );
        let mut baseline = CheckOptions {
            debug_checks: false,
            ..Default::default()
        };
        baseline.policies = PolicySet::from_specs(["push_prop=baseline"]).unwrap();
        let base = check(&ts, &baseline).unwrap();
        assert!(res.counters["push_attempts"] < base.counters["push_attempts"]);
    }
}
