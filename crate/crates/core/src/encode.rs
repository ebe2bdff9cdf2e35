//! Tseitin encoding of the transition relation into an incremental SAT
//! solver: one copy of the combinational logic over (x, y) defining the
//! next-state functions and the current-step bad literal, a latch-transfer
//! equivalence x' <-> f(x, y), and a second copy of the bad cone over
//! (x', y'') for the primed property.
//!
//! Frame lemmas are retractable via activation literals: a lemma asserted
//! at frame i carries the guard ¬act_i, and a query against F_j assumes
//! act_j..act_top, so the clause set of F_j is the union of all lemmas
//! asserted at frames >= j (monotone frames in delta representation).
//! I's unit constraints are guarded by a dedicated init activation literal.

use crate::aiger::{AigLit, AigerCircuit};
use crate::lits::{Cube, StateLit};
use crate::sat::{Lit, Solver};
use crate::tsys::TransitionSystem;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Enc {
    Const(bool),
    Lit(Lit),
}

impl Enc {
    fn negate(self) -> Enc {
        match self {
            Enc::Const(b) => Enc::Const(!b),
            Enc::Lit(l) => Enc::Lit(!l),
        }
    }
}

/// Literal maps tying a [`TransitionSystem`] to solver variables.
pub struct CnfEncoding {
    true_lit: Lit,
    cur: Vec<Lit>,
    nxt: Vec<Lit>,
    inp: Vec<Lit>,
    inp_next: Vec<Lit>,
    bad_cur: Lit,
    bad_nxt: Lit,
    act_init: Lit,
    frame_act: Vec<Lit>,
}

/// Build the encoding into a fresh solver. AND gates with constant inputs
/// are folded away before clause emission.
pub fn build_encoding(ts: &TransitionSystem, solver: &mut Solver) -> CnfEncoding {
    let circuit = ts.circuit();
    let true_lit = solver.new_var().positive();
    solver.add_clause(&[true_lit]).expect("fresh var");

    let cur: Vec<Lit> = (0..ts.num_latches())
        .map(|_| solver.new_var().positive())
        .collect();
    let inp: Vec<Lit> = (0..ts.num_inputs())
        .map(|_| solver.new_var().positive())
        .collect();
    let nxt: Vec<Lit> = (0..ts.num_latches())
        .map(|_| solver.new_var().positive())
        .collect();
    let inp_next: Vec<Lit> = (0..ts.num_inputs())
        .map(|_| solver.new_var().positive())
        .collect();

    // Copy A: full combinational logic over (cur, inp).
    let map_a = encode_copy(solver, circuit, &cur, &inp, None);
    let bad_cur = resolve(lit_of(&map_a, circuit.bad_literal()), true_lit);

    // Latch transfer: nxt[l] <-> next-state function.
    for (l, latch) in circuit.latches.iter().enumerate() {
        match lit_of(&map_a, latch.next) {
            Enc::Const(b) => {
                let unit = if b { nxt[l] } else { !nxt[l] };
                solver.add_clause(&[unit]).expect("transfer unit");
            }
            Enc::Lit(f) => {
                solver.add_clause(&[!nxt[l], f]).expect("transfer");
                solver.add_clause(&[nxt[l], !f]).expect("transfer");
            }
        }
    }

    // Copy B: only the cone of the bad literal, over (nxt, inp_next).
    let cone = bad_cone(circuit);
    let map_b = encode_copy(solver, circuit, &nxt, &inp_next, Some(&cone));
    let bad_nxt = resolve(lit_of(&map_b, circuit.bad_literal()), true_lit);

    // Initial-state units, guarded.
    let act_init = solver.new_var().positive();
    for &(latch, value) in ts.init_units() {
        let lit = if value { cur[latch] } else { !cur[latch] };
        solver.add_clause(&[lit, !act_init]).expect("init unit");
    }

    CnfEncoding {
        true_lit,
        cur,
        nxt,
        inp,
        inp_next,
        bad_cur,
        bad_nxt,
        act_init,
        frame_act: Vec::new(),
    }
}

/// Encode one copy of the AND graph. `latch_lits`/`input_lits` seed the
/// variable map; `cone` restricts which gates are materialized.
fn encode_copy(
    solver: &mut Solver,
    circuit: &AigerCircuit,
    latch_lits: &[Lit],
    input_lits: &[Lit],
    cone: Option<&[bool]>,
) -> Vec<Option<Enc>> {
    let mut map: Vec<Option<Enc>> = vec![None; circuit.max_var as usize + 1];
    map[0] = Some(Enc::Const(false));
    for (i, l) in circuit.inputs.iter().enumerate() {
        map[l.var() as usize] = Some(Enc::Lit(input_lits[i]));
    }
    for (i, l) in circuit.latches.iter().enumerate() {
        map[l.current.var() as usize] = Some(Enc::Lit(latch_lits[i]));
    }
    for gate in &circuit.ands {
        if let Some(mask) = cone {
            if !mask[gate.lhs.var() as usize] {
                continue;
            }
        }
        let a = lit_of(&map, gate.rhs0);
        let b = lit_of(&map, gate.rhs1);
        let g = match (a, b) {
            (Enc::Const(false), _) | (_, Enc::Const(false)) => Enc::Const(false),
            (Enc::Const(true), x) | (x, Enc::Const(true)) => x,
            (Enc::Lit(la), Enc::Lit(lb)) if la == lb => Enc::Lit(la),
            (Enc::Lit(la), Enc::Lit(lb)) if la == !lb => Enc::Const(false),
            (Enc::Lit(la), Enc::Lit(lb)) => {
                let g = solver.new_var().positive();
                solver.add_clause(&[!g, la]).expect("and gate");
                solver.add_clause(&[!g, lb]).expect("and gate");
                solver.add_clause(&[g, !la, !lb]).expect("and gate");
                Enc::Lit(g)
            }
        };
        map[gate.lhs.var() as usize] = Some(g);
    }
    map
}

fn lit_of(map: &[Option<Enc>], lit: AigLit) -> Enc {
    let base = map[lit.var() as usize].expect("literal defined before use");
    if lit.is_negated() {
        base.negate()
    } else {
        base
    }
}

fn resolve(e: Enc, true_lit: Lit) -> Lit {
    match e {
        Enc::Const(true) => true_lit,
        Enc::Const(false) => !true_lit,
        Enc::Lit(l) => l,
    }
}

/// Variables in the transitive fan-in of the bad literal.
fn bad_cone(circuit: &AigerCircuit) -> Vec<bool> {
    let mut gate_of = vec![None; circuit.max_var as usize + 1];
    for (i, g) in circuit.ands.iter().enumerate() {
        gate_of[g.lhs.var() as usize] = Some(i);
    }
    let mut mask = vec![false; circuit.max_var as usize + 1];
    let mut stack = vec![circuit.bad_literal().var()];
    while let Some(v) = stack.pop() {
        if mask[v as usize] {
            continue;
        }
        mask[v as usize] = true;
        if let Some(i) = gate_of[v as usize] {
            stack.push(circuit.ands[i].rhs0.var());
            stack.push(circuit.ands[i].rhs1.var());
        }
    }
    mask
}

impl CnfEncoding {
    pub fn bad_cur(&self) -> Lit {
        self.bad_cur
    }

    pub fn bad_nxt(&self) -> Lit {
        self.bad_nxt
    }

    pub fn act_init(&self) -> Lit {
        self.act_init
    }

    pub fn true_lit(&self) -> Lit {
        self.true_lit
    }

    /// Current-state solver literal of a latch literal.
    pub fn cur_lit(&self, l: StateLit) -> Lit {
        let base = self.cur[l.latch()];
        if l.is_positive() {
            base
        } else {
            !base
        }
    }

    /// Next-state (primed) solver literal of a latch literal.
    pub fn nxt_lit(&self, l: StateLit) -> Lit {
        let base = self.nxt[l.latch()];
        if l.is_positive() {
            base
        } else {
            !base
        }
    }

    /// x -> x' substitution over a cube, sign-preserving.
    pub fn prime(&self, cube: &Cube) -> Vec<Lit> {
        cube.iter().map(|l| self.nxt_lit(l)).collect()
    }

    pub fn cube_lits(&self, cube: &Cube) -> Vec<Lit> {
        cube.iter().map(|l| self.cur_lit(l)).collect()
    }

    pub fn input_lit(&self, i: usize) -> Lit {
        self.inp[i]
    }

    pub fn next_input_lit(&self, i: usize) -> Lit {
        self.inp_next[i]
    }

    pub fn num_latches(&self) -> usize {
        self.cur.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.inp.len()
    }

    /// Activation literal of frame i (i >= 1), allocating on demand.
    pub fn frame_act(&mut self, solver: &mut Solver, frame: usize) -> Lit {
        debug_assert!(frame >= 1);
        while self.frame_act.len() < frame {
            self.frame_act.push(solver.new_var().positive());
        }
        self.frame_act[frame - 1]
    }

    /// Activation literal of an already-allocated frame.
    pub fn act(&self, frame: usize) -> Lit {
        self.frame_act[frame - 1]
    }

    pub fn allocated_frames(&self) -> usize {
        self.frame_act.len()
    }

    /// Full latch cube of the current model.
    pub fn model_latch_cube(&self, solver: &Solver) -> Cube {
        Cube::new(
            (0..self.cur.len())
                .map(|i| StateLit::new(i, solver.value(self.cur[i])))
                .collect(),
        )
    }

    /// Concrete current-state latch values of the model.
    pub fn model_state(&self, solver: &Solver) -> Vec<bool> {
        self.cur.iter().map(|&l| solver.value(l)).collect()
    }

    pub fn model_inputs(&self, solver: &Solver) -> Vec<bool> {
        self.inp.iter().map(|&l| solver.value(l)).collect()
    }

    pub fn model_next_inputs(&self, solver: &Solver) -> Vec<bool> {
        self.inp_next.iter().map(|&l| solver.value(l)).collect()
    }

    pub fn model_next_state(&self, solver: &Solver) -> Vec<bool> {
        self.nxt.iter().map(|&l| solver.value(l)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aigbuild::circuits;
    use crate::sat::SolveStatus;

    fn setup(text: &AigerCircuit) -> (TransitionSystem, Solver, CnfEncoding) {
        let ts = TransitionSystem::new(text.clone(), 0).unwrap();
        let mut solver = Solver::new();
        let enc = build_encoding(&ts, &mut solver);
        (ts, solver, enc)
    }

    #[test]
    fn zero_latch_circuit_constant_bad() {
        let c = AigerCircuit::parse(b"aag 0 0 0 1 0\n0\n").unwrap();
        let (_ts, mut solver, enc) = setup(&c);
        assert_eq!(enc.num_latches(), 0);
        assert_eq!(solver.solve(&[enc.bad_cur()]).unwrap(), SolveStatus::Unsat);
    }

    #[test]
    fn toggle_cur_zero_forces_nxt_one() {
        let c = circuits::toggle();
        let (_ts, mut solver, enc) = setup(&c);
        let cur0 = enc.cur_lit(StateLit::new(0, false));
        assert_eq!(solver.solve(&[cur0]).unwrap(), SolveStatus::Sat);
        assert!(solver.value(enc.nxt_lit(StateLit::new(0, true))));
    }

    #[test]
    fn counter_next_state_matches_simulation_exhaustively() {
        let c = circuits::counter(3, 5, true);
        let (ts, mut solver, enc) = setup(&c);
        let n = ts.num_latches();
        for state_bits in 0..(1u32 << n) {
            for input_bits in 0..(1u32 << ts.num_inputs()) {
                let state: Vec<bool> = (0..n).map(|i| state_bits >> i & 1 == 1).collect();
                let inputs: Vec<bool> = (0..ts.num_inputs())
                    .map(|i| input_bits >> i & 1 == 1)
                    .collect();
                let mut assumptions = Vec::new();
                for (i, &v) in state.iter().enumerate() {
                    assumptions.push(enc.cur_lit(StateLit::new(i, v)));
                }
                for (i, &v) in inputs.iter().enumerate() {
                    let l = enc.input_lit(i);
                    assumptions.push(if v { l } else { !l });
                }
                assert_eq!(solver.solve(&assumptions).unwrap(), SolveStatus::Sat);
                let got_next = enc.model_next_state(&solver);
                let got_bad = solver.value(enc.bad_cur());
                let (want_next, want_bad) = ts.circuit().simulate_step(&state, &inputs).unwrap();
                assert_eq!(got_next, want_next, "state {state_bits} inputs {input_bits}");
                assert_eq!(got_bad, want_bad);
            }
        }
    }

    #[test]
    fn primed_bad_matches_simulation() {
        let c = circuits::counter(3, 5, true);
        let (ts, mut solver, enc) = setup(&c);
        // Fix a next state and next inputs; bad_nxt must equal the
        // simulator's bad value on that (state, input) pair.
        for state_bits in 0..8u32 {
            let state: Vec<bool> = (0..3).map(|i| state_bits >> i & 1 == 1).collect();
            let mut assumptions = Vec::new();
            for (i, &v) in state.iter().enumerate() {
                assumptions.push(enc.nxt_lit(StateLit::new(i, v)));
            }
            assumptions.push(enc.next_input_lit(0));
            assert_eq!(solver.solve(&assumptions).unwrap(), SolveStatus::Sat);
            let (_, want_bad) = ts.circuit().simulate_step(&state, &[true]).unwrap();
            assert_eq!(solver.value(enc.bad_nxt()), want_bad);
        }
    }

    #[test]
    fn init_units_guarded_by_activation() {
        let c = circuits::counter(3, 5, true);
        let (_ts, mut solver, enc) = setup(&c);
        let b2 = enc.cur_lit(StateLit::new(2, true));
        // Without the guard the state is free...
        assert_eq!(solver.solve(&[b2]).unwrap(), SolveStatus::Sat);
        // ...with it, I pins every latch to zero.
        assert_eq!(
            solver.solve(&[enc.act_init(), b2]).unwrap(),
            SolveStatus::Unsat
        );
    }

    #[test]
    fn empty_cube_primes_to_empty() {
        let c = circuits::toggle();
        let (_ts, _solver, enc) = setup(&c);
        assert!(enc.prime(&Cube::new(vec![])).is_empty());
    }
}
