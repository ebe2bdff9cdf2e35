//! Independent verdict validation: SAFE certificates are checked by three
//! SAT obligations on fresh solvers, UNSAFE witnesses are replayed through
//! the circuit simulator. This module deliberately depends only on
//! [`crate::aiger`], [`crate::sat`] and [`crate::encode`] — never on the
//! checker whose output it validates.

use crate::encode::build_encoding;
use crate::lits::{Clause, StateLit};
use crate::sat::{SolveStatus, Solver};
use crate::tsys::TransitionSystem;
use std::fmt::Write as _;
use thiserror::Error;

/// An inductive-invariant certificate: Inv(x) = P(x) ∧ ⋀ clauses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    clauses: Vec<Clause>,
}

impl Certificate {
    pub fn new(mut clauses: Vec<Clause>) -> Self {
        clauses.sort();
        clauses.dedup();
        Certificate { clauses }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Serialize to the `.cert` format:
    /// line 1 `IC3CERT 1`, line 2 `clauses N`, then N lines of signed
    /// 1-based latch indices, each terminated by `0`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "IC3CERT 1").unwrap();
        writeln!(out, "clauses {}", self.clauses.len()).unwrap();
        for c in &self.clauses {
            for l in c.iter() {
                write!(out, "{} ", l.signed()).unwrap();
            }
            writeln!(out, "0").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ArtifactParseError> {
        let mut lines = text.lines().enumerate();
        let (_, magic) = lines.next().ok_or(ArtifactParseError::Truncated)?;
        if magic.trim() != "IC3CERT 1" {
            return Err(ArtifactParseError::BadMagic {
                got: magic.to_string(),
            });
        }
        let (ln, count_line) = lines.next().ok_or(ArtifactParseError::Truncated)?;
        let count: usize = count_line
            .trim()
            .strip_prefix("clauses ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or(ArtifactParseError::BadLine { line: ln + 1 })?;
        let mut clauses = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, line) = lines.next().ok_or(ArtifactParseError::Truncated)?;
            let mut lits = Vec::new();
            let mut terminated = false;
            for tok in line.split_whitespace() {
                let v: i32 = tok
                    .parse()
                    .map_err(|_| ArtifactParseError::BadLine { line: ln + 1 })?;
                if v == 0 {
                    terminated = true;
                    break;
                }
                lits.push(StateLit::from_signed(v).unwrap());
            }
            if !terminated {
                return Err(ArtifactParseError::BadLine { line: ln + 1 });
            }
            let clause = Clause::try_new(lits)
                .ok_or(ArtifactParseError::TautologicalClause { line: ln + 1 })?;
            clauses.push(clause);
        }
        Ok(Certificate::new(clauses))
    }
}

/// An UNSAFE witness: a concrete initial state and the input frames that
/// drive the circuit into a bad state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub property_index: usize,
    pub initial_state: Vec<bool>,
    pub input_frames: Vec<Vec<bool>>,
}

impl Witness {
    /// AIGER-witness-style text: `1`, `b<index>`, one line of initial latch
    /// bits, one line of input bits per frame, and a terminating `.`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "1").unwrap();
        writeln!(out, "b{}", self.property_index).unwrap();
        writeln!(out, "{}", bits_to_line(&self.initial_state)).unwrap();
        for frame in &self.input_frames {
            writeln!(out, "{}", bits_to_line(frame)).unwrap();
        }
        writeln!(out, ".").unwrap();
        out
    }

    pub fn parse(text: &str) -> Result<Self, ArtifactParseError> {
        let mut lines = text.lines().enumerate();
        let (_, status) = lines.next().ok_or(ArtifactParseError::Truncated)?;
        if status.trim() != "1" {
            return Err(ArtifactParseError::BadMagic {
                got: status.to_string(),
            });
        }
        let (ln, bline) = lines.next().ok_or(ArtifactParseError::Truncated)?;
        let property_index: usize = bline
            .trim()
            .strip_prefix('b')
            .and_then(|s| s.parse().ok())
            .ok_or(ArtifactParseError::BadLine { line: ln + 1 })?;
        let (ln, state_line) = lines.next().ok_or(ArtifactParseError::Truncated)?;
        let initial_state = line_to_bits(state_line, ln + 1)?;
        let mut input_frames = Vec::new();
        let mut terminated = false;
        for (ln, line) in lines {
            if line.trim() == "." {
                terminated = true;
                break;
            }
            input_frames.push(line_to_bits(line, ln + 1)?);
        }
        if !terminated {
            return Err(ArtifactParseError::Truncated);
        }
        Ok(Witness {
            property_index,
            initial_state,
            input_frames,
        })
    }
}

fn bits_to_line(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn line_to_bits(line: &str, ln: usize) -> Result<Vec<bool>, ArtifactParseError> {
    line.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(ArtifactParseError::BadLine { line: ln }),
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArtifactParseError {
    #[error("unexpected end of artifact")]
    Truncated,
    #[error("bad magic/status line: '{got}'")]
    BadMagic { got: String },
    #[error("line {line}: malformed artifact line")]
    BadLine { line: usize },
    #[error("line {line}: tautological clause")]
    TautologicalClause { line: usize },
}

/// Which of the three certificate obligations failed, with a concrete
/// satisfying assignment of the violated UNSAT query.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertFailure {
    #[error("certificate clause references latch index {latch} outside the circuit ({count} latches)")]
    UnknownLatch { latch: usize, count: usize },
    #[error("initiation violated: initial state {} falsifies the invariant", bits_to_line(state))]
    Initiation { state: Vec<bool> },
    #[error("consecution violated: invariant state {} has a successor outside the invariant", bits_to_line(state))]
    Consecution { state: Vec<bool> },
    #[error("safety violated: invariant state {} can raise the bad output", bits_to_line(state))]
    Safety { state: Vec<bool> },
}

/// Check the three inductive-invariant obligations, each on a fresh solver:
/// (1) initiation I ∧ ¬Inv UNSAT, (2) consecution Inv ∧ T ∧ ¬Inv' UNSAT,
/// (3) safety Inv ∧ ¬P UNSAT.
pub fn check_certificate(ts: &TransitionSystem, cert: &Certificate) -> Result<(), CertFailure> {
    let n = ts.num_latches();
    for c in cert.clauses() {
        for l in c.iter() {
            if l.latch() >= n {
                return Err(CertFailure::UnknownLatch {
                    latch: l.latch() + 1,
                    count: n,
                });
            }
        }
    }

    // (1) Initiation: I ∧ ¬Inv = I ∧ (¬P ∨ ⋁ ¬c). One query per disjunct.
    {
        let mut solver = Solver::new();
        let enc = build_encoding(ts, &mut solver);
        if solver
            .solve(&[enc.act_init(), enc.bad_cur()])
            .expect("valid literals")
            == SolveStatus::Sat
        {
            return Err(CertFailure::Initiation {
                state: enc.model_state(&solver),
            });
        }
        for c in cert.clauses() {
            let mut assumptions = vec![enc.act_init()];
            assumptions.extend(c.negate().iter().map(|l| enc.cur_lit(l)));
            if solver.solve(&assumptions).expect("valid literals") == SolveStatus::Sat {
                return Err(CertFailure::Initiation {
                    state: enc.model_state(&solver),
                });
            }
        }
    }

    // (2) Consecution: Inv ∧ T ∧ ¬Inv' — assert Inv, query each primed disjunct.
    {
        let mut solver = Solver::new();
        let enc = build_encoding(ts, &mut solver);
        assert_invariant(&mut solver, &enc, cert);
        if solver.solve(&[enc.bad_nxt()]).expect("valid literals") == SolveStatus::Sat {
            return Err(CertFailure::Consecution {
                state: enc.model_state(&solver),
            });
        }
        for c in cert.clauses() {
            let assumptions: Vec<_> = c.negate().iter().map(|l| enc.nxt_lit(l)).collect();
            if solver.solve(&assumptions).expect("valid literals") == SolveStatus::Sat {
                return Err(CertFailure::Consecution {
                    state: enc.model_state(&solver),
                });
            }
        }
    }

    // (3) Safety: Inv ∧ ¬P. Trivial by construction; still checked.
    {
        let mut solver = Solver::new();
        let enc = build_encoding(ts, &mut solver);
        assert_invariant(&mut solver, &enc, cert);
        if solver.solve(&[enc.bad_cur()]).expect("valid literals") == SolveStatus::Sat {
            return Err(CertFailure::Safety {
                state: enc.model_state(&solver),
            });
        }
    }
    Ok(())
}

fn assert_invariant(solver: &mut Solver, enc: &crate::encode::CnfEncoding, cert: &Certificate) {
    solver.add_clause(&[!enc.bad_cur()]).expect("valid literal");
    for c in cert.clauses() {
        let lits: Vec<_> = c.iter().map(|l| enc.cur_lit(l)).collect();
        solver.add_clause(&lits).expect("valid literals");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayFailureKind {
    PropertyMismatch,
    StateWidth,
    InputWidth,
    InitViolated,
    BadNeverRaised,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("witness replay failed at step {step}: {kind:?}")]
pub struct ReplayFailure {
    pub step: usize,
    pub kind: ReplayFailureKind,
}

/// Replay a witness by simulation. Returns the step at which the bad
/// literal fired. Step t evaluates the bad literal under (state_t,
/// frame_t); when every frame is consumed without firing, one trailing
/// evaluation with an all-zero input frame covers witnesses that end
/// exactly in a bad state.
pub fn replay_witness(ts: &TransitionSystem, w: &Witness) -> Result<usize, ReplayFailure> {
    let circuit = ts.circuit();
    if w.property_index != circuit.property_index {
        return Err(ReplayFailure {
            step: 0,
            kind: ReplayFailureKind::PropertyMismatch,
        });
    }
    if w.initial_state.len() != circuit.num_latches() {
        return Err(ReplayFailure {
            step: 0,
            kind: ReplayFailureKind::StateWidth,
        });
    }
    if !circuit.satisfies_init(&w.initial_state) {
        return Err(ReplayFailure {
            step: 0,
            kind: ReplayFailureKind::InitViolated,
        });
    }
    let mut state = w.initial_state.clone();
    for (step, frame) in w.input_frames.iter().enumerate() {
        if frame.len() != circuit.num_inputs() {
            return Err(ReplayFailure {
                step,
                kind: ReplayFailureKind::InputWidth,
            });
        }
        let (next, bad) = circuit.simulate_step(&state, frame).expect("widths checked");
        if bad {
            return Ok(step);
        }
        state = next;
    }
    let zeros = vec![false; circuit.num_inputs()];
    let (_, bad) = circuit.simulate_step(&state, &zeros).expect("widths checked");
    if bad {
        return Ok(w.input_frames.len());
    }
    Err(ReplayFailure {
        step: w.input_frames.len(),
        kind: ReplayFailureKind::BadNeverRaised,
    })
}
