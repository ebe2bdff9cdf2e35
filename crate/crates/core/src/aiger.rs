//! AIGER 1.x frontend: ASCII (`aag`) and binary (`aig`) parsing, serialization,
//! and bit-exact single-step simulation.
//!
//! Circuits are immutable after construction and safe to share across threads.
//! AIGER 1.9 extensions beyond bad-state properties (`C`/`J`/`F` sections) are
//! rejected rather than ignored, so a verdict can never silently refer to a
//! property the checker did not see.

use std::fmt;
use thiserror::Error;

/// An AIGER literal: variable index shifted left by one, LSB = negation.
/// Literal 0 is constant false, literal 1 constant true.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AigLit(pub u32);

impl AigLit {
    pub const FALSE: AigLit = AigLit(0);
    pub const TRUE: AigLit = AigLit(1);

    pub fn from_var(var: u32, negated: bool) -> Self {
        AigLit(var << 1 | negated as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn is_constant(self) -> bool {
        self.var() == 0
    }
}

impl fmt::Display for AigLit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Latch reset value. `Free` (reset literal = current literal in AIGER 1.9)
/// leaves the initial value unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reset {
    Zero,
    One,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Latch {
    pub current: AigLit,
    pub next: AigLit,
    pub reset: Reset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AndGate {
    pub lhs: AigLit,
    pub rhs0: AigLit,
    pub rhs1: AigLit,
}

/// A validated and-inverter graph. `ands` are sorted by `lhs` and normalized
/// so that `rhs0 >= rhs1`; every right-hand literal is defined before use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AigerCircuit {
    pub max_var: u32,
    pub inputs: Vec<AigLit>,
    pub latches: Vec<Latch>,
    pub outputs: Vec<AigLit>,
    pub bads: Vec<AigLit>,
    pub ands: Vec<AndGate>,
    /// Index into [`Self::outputs_or_bads`] selecting the checked property.
    pub property_index: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header: {msg}")]
    BadHeader { line: usize, msg: String },
    #[error("line {line}: {msg}")]
    BadLine { line: usize, msg: String },
    #[error("line {line}: literal {lit} out of range (max variable {max_var})")]
    LiteralOutOfRange { line: usize, lit: u32, max_var: u32 },
    #[error("line {line}: variable {var} defined more than once")]
    DuplicateDefinition { line: usize, var: u32 },
    #[error("line {line}: and gate {lhs} uses literal {rhs} not defined before it")]
    ForwardReference { line: usize, lhs: u32, rhs: u32 },
    #[error("line {line}: literal {lit} references an undefined variable")]
    UndefinedLiteral { line: usize, lit: u32 },
    #[error("byte {offset}: truncated binary delta stream")]
    TruncatedDelta { offset: usize },
    #[error("byte {offset}: binary delta overflows the variable range")]
    DeltaOverflow { offset: usize },
    #[error("unsupported section '{section}' (justice/fairness/constraints are not handled)")]
    UnsupportedSection { section: char },
    #[error("circuit is not in canonical binary variable order: {msg}")]
    NotCanonical { msg: String },
    #[error("unexpected end of file (expected {expected})")]
    UnexpectedEof { expected: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("state width {got} does not match latch count {want}")]
    StateWidth { got: usize, want: usize },
    #[error("input width {got} does not match input count {want}")]
    InputWidth { got: usize, want: usize },
}

impl AigerCircuit {
    /// The property candidates: bad-state literals when present (AIGER 1.9),
    /// otherwise the plain outputs (AIGER 1.0 convention).
    pub fn outputs_or_bads(&self) -> &[AigLit] {
        if self.bads.is_empty() {
            &self.outputs
        } else {
            &self.bads
        }
    }

    /// Literal of the checked property.
    pub fn bad_literal(&self) -> AigLit {
        self.outputs_or_bads()[self.property_index]
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn num_latches(&self) -> usize {
        self.latches.len()
    }

    /// Parse either encoding, dispatching on the header magic.
    pub fn parse(bytes: &[u8]) -> Result<Self, ParseError> {
        Parser::new(bytes).parse()
    }

    /// Evaluate every variable under the given latch/input assignment.
    /// Returns the value vector indexed by variable.
    fn eval(&self, state: &[bool], inputs: &[bool]) -> Result<Vec<bool>, SimError> {
        if state.len() != self.latches.len() {
            return Err(SimError::StateWidth {
                got: state.len(),
                want: self.latches.len(),
            });
        }
        if inputs.len() != self.inputs.len() {
            return Err(SimError::InputWidth {
                got: inputs.len(),
                want: self.inputs.len(),
            });
        }
        let mut values = vec![false; self.max_var as usize + 1];
        for (lit, v) in self.inputs.iter().zip(inputs) {
            values[lit.var() as usize] = *v;
        }
        for (latch, v) in self.latches.iter().zip(state) {
            values[latch.current.var() as usize] = *v;
        }
        for gate in &self.ands {
            let a = lit_value(&values, gate.rhs0);
            let b = lit_value(&values, gate.rhs1);
            values[gate.lhs.var() as usize] = a && b;
        }
        Ok(values)
    }

    /// One synchronous step: returns the next latch state and the value of the
    /// selected bad literal under this (state, input) assignment.
    pub fn simulate_step(
        &self,
        state: &[bool],
        inputs: &[bool],
    ) -> Result<(Vec<bool>, bool), SimError> {
        let values = self.eval(state, inputs)?;
        let next = self
            .latches
            .iter()
            .map(|l| lit_value(&values, l.next))
            .collect();
        let bad = lit_value(&values, self.bad_literal());
        Ok((next, bad))
    }

    /// The all-reset initial state: constrained latches take their reset
    /// value, free latches default to false.
    pub fn reset_state(&self) -> Vec<bool> {
        self.latches.iter().map(|l| l.reset == Reset::One).collect()
    }

    /// Does `state` satisfy the initial-state predicate (all reset
    /// constraints hold; free latches are unconstrained)?
    pub fn satisfies_init(&self, state: &[bool]) -> bool {
        self.latches.iter().zip(state).all(|(l, v)| match l.reset {
            Reset::Zero => !*v,
            Reset::One => *v,
            Reset::Free => true,
        })
    }

    pub fn to_ascii(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "aag {} {} {} {} {}",
            self.max_var,
            self.inputs.len(),
            self.latches.len(),
            self.outputs.len(),
            self.ands.len()
        ));
        if !self.bads.is_empty() {
            out.push_str(&format!(" {}", self.bads.len()));
        }
        out.push('\n');
        for i in &self.inputs {
            out.push_str(&format!("{i}\n"));
        }
        for l in &self.latches {
            match l.reset {
                Reset::Zero => out.push_str(&format!("{} {}\n", l.current, l.next)),
                Reset::One => out.push_str(&format!("{} {} 1\n", l.current, l.next)),
                Reset::Free => {
                    out.push_str(&format!("{} {} {}\n", l.current, l.next, l.current))
                }
            }
        }
        for o in &self.outputs {
            out.push_str(&format!("{o}\n"));
        }
        for b in &self.bads {
            out.push_str(&format!("{b}\n"));
        }
        for g in &self.ands {
            out.push_str(&format!("{} {} {}\n", g.lhs, g.rhs0, g.rhs1));
        }
        out
    }

    /// Binary serialization. Requires canonical variable order: inputs
    /// 2..2I, latches following, and-gates contiguous after the latches.
    pub fn to_binary(&self) -> Result<Vec<u8>, ParseError> {
        let ni = self.inputs.len() as u32;
        let nl = self.latches.len() as u32;
        for (k, i) in self.inputs.iter().enumerate() {
            if i.0 != 2 * (k as u32 + 1) {
                return Err(ParseError::NotCanonical {
                    msg: format!("input {k} is literal {i}, expected {}", 2 * (k as u32 + 1)),
                });
            }
        }
        for (k, l) in self.latches.iter().enumerate() {
            let want = 2 * (ni + k as u32 + 1);
            if l.current.0 != want {
                return Err(ParseError::NotCanonical {
                    msg: format!("latch {k} is literal {}, expected {want}", l.current),
                });
            }
        }
        for (k, g) in self.ands.iter().enumerate() {
            let want = 2 * (ni + nl + k as u32 + 1);
            if g.lhs.0 != want {
                return Err(ParseError::NotCanonical {
                    msg: format!("and gate {k} is literal {}, expected {want}", g.lhs),
                });
            }
        }
        let mut out = Vec::new();
        out.extend_from_slice(
            format!(
                "aig {} {} {} {} {}",
                self.max_var,
                ni,
                nl,
                self.outputs.len(),
                self.ands.len()
            )
            .as_bytes(),
        );
        if !self.bads.is_empty() {
            out.extend_from_slice(format!(" {}", self.bads.len()).as_bytes());
        }
        out.push(b'\n');
        for l in &self.latches {
            match l.reset {
                Reset::Zero => out.extend_from_slice(format!("{}\n", l.next).as_bytes()),
                Reset::One => out.extend_from_slice(format!("{} 1\n", l.next).as_bytes()),
                Reset::Free => {
                    out.extend_from_slice(format!("{} {}\n", l.next, l.current).as_bytes())
                }
            }
        }
        for o in &self.outputs {
            out.extend_from_slice(format!("{o}\n").as_bytes());
        }
        for b in &self.bads {
            out.extend_from_slice(format!("{b}\n").as_bytes());
        }
        for g in &self.ands {
            let d0 = g.lhs.0 - g.rhs0.0;
            let d1 = g.rhs0.0 - g.rhs1.0;
            write_delta(&mut out, d0);
            write_delta(&mut out, d1);
        }
        Ok(out)
    }

    /// Full validation of the structural invariants. Called by the parser;
    /// also usable for programmatically built circuits.
    pub fn validate(&self) -> Result<(), ParseError> {
        validate_circuit(self, 0)
    }
}

fn lit_value(values: &[bool], lit: AigLit) -> bool {
    let v = values[lit.var() as usize];
    v ^ lit.is_negated()
}

fn write_delta(out: &mut Vec<u8>, mut delta: u32) {
    loop {
        let mut byte = (delta & 0x7f) as u8;
        delta >>= 7;
        if delta != 0 {
            byte |= 0x80;
        }
        out.push(byte);
        if delta == 0 {
            break;
        }
    }
}

fn validate_circuit(c: &AigerCircuit, header_line: usize) -> Result<(), ParseError> {
    let max = c.max_var;
    let check_range = |lit: AigLit, line: usize| {
        if lit.var() > max {
            Err(ParseError::LiteralOutOfRange {
                line,
                lit: lit.0,
                max_var: max,
            })
        } else {
            Ok(())
        }
    };
    // Definition map: 0 = const, 1 = input, 2 = latch, 3 = and.
    let mut defined = vec![0u8; max as usize + 1];
    defined[0] = 1;
    for i in &c.inputs {
        check_range(*i, header_line)?;
        if i.is_negated() || i.is_constant() {
            return Err(ParseError::BadLine {
                line: header_line,
                msg: format!("input literal {i} must be a positive non-constant literal"),
            });
        }
        if defined[i.var() as usize] != 0 {
            return Err(ParseError::DuplicateDefinition {
                line: header_line,
                var: i.var(),
            });
        }
        defined[i.var() as usize] = 1;
    }
    for l in &c.latches {
        check_range(l.current, header_line)?;
        check_range(l.next, header_line)?;
        if l.current.is_negated() || l.current.is_constant() {
            return Err(ParseError::BadLine {
                line: header_line,
                msg: format!("latch literal {} must be a positive non-constant literal", l.current),
            });
        }
        if defined[l.current.var() as usize] != 0 {
            return Err(ParseError::DuplicateDefinition {
                line: header_line,
                var: l.current.var(),
            });
        }
        defined[l.current.var() as usize] = 2;
    }
    for g in &c.ands {
        check_range(g.lhs, header_line)?;
        check_range(g.rhs0, header_line)?;
        check_range(g.rhs1, header_line)?;
        if g.lhs.is_negated() || g.lhs.is_constant() {
            return Err(ParseError::BadLine {
                line: header_line,
                msg: format!("and gate lhs {} must be even and non-constant", g.lhs),
            });
        }
        if defined[g.lhs.var() as usize] != 0 {
            return Err(ParseError::DuplicateDefinition {
                line: header_line,
                var: g.lhs.var(),
            });
        }
        defined[g.lhs.var() as usize] = 3;
    }
    // Topological ordering: ands sorted by lhs, rhs defined strictly earlier.
    for w in c.ands.windows(2) {
        if w[0].lhs >= w[1].lhs {
            return Err(ParseError::BadLine {
                line: header_line,
                msg: "and gates are not in ascending lhs order".into(),
            });
        }
    }
    for g in &c.ands {
        for rhs in [g.rhs0, g.rhs1] {
            if rhs.0 >= g.lhs.0 {
                return Err(ParseError::ForwardReference {
                    line: header_line,
                    lhs: g.lhs.0,
                    rhs: rhs.0,
                });
            }
            if defined[rhs.var() as usize] == 0 {
                return Err(ParseError::UndefinedLiteral {
                    line: header_line,
                    lit: rhs.0,
                });
            }
        }
    }
    for lit in c
        .outputs
        .iter()
        .chain(&c.bads)
        .chain(c.latches.iter().map(|l| &l.next))
    {
        check_range(*lit, header_line)?;
        if defined[lit.var() as usize] == 0 {
            return Err(ParseError::UndefinedLiteral {
                line: header_line,
                lit: lit.0,
            });
        }
    }
    if c.outputs_or_bads().is_empty() {
        return Err(ParseError::BadLine {
            line: header_line,
            msg: "circuit declares neither outputs nor bad-state properties".into(),
        });
    }
    if c.property_index >= c.outputs_or_bads().len() {
        return Err(ParseError::BadLine {
            line: header_line,
            msg: format!(
                "property index {} out of range ({} candidates)",
                c.property_index,
                c.outputs_or_bads().len()
            ),
        });
    }
    Ok(())
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

struct Header {
    binary: bool,
    max_var: u32,
    inputs: u32,
    latches: u32,
    outputs: u32,
    ands: u32,
    bads: u32,
}

impl<'a> Parser<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Parser {
            bytes,
            pos: 0,
            line: 1,
        }
    }

    fn parse(mut self) -> Result<AigerCircuit, ParseError> {
        let header = self.parse_header()?;
        let mut circuit = if header.binary {
            self.parse_binary_body(&header)?
        } else {
            self.parse_ascii_body(&header)?
        };
        normalize(&mut circuit);
        validate_circuit(&circuit, 1)?;
        Ok(circuit)
    }

    fn parse_header(&mut self) -> Result<Header, ParseError> {
        let line = self.read_line().ok_or(ParseError::UnexpectedEof {
            expected: "header".into(),
        })?;
        let mut fields = line.split_whitespace();
        let magic = fields.next().unwrap_or("");
        let binary = match magic {
            "aag" => false,
            "aig" => true,
            other => {
                return Err(ParseError::BadHeader {
                    line: 1,
                    msg: format!("expected 'aag' or 'aig', got '{other}'"),
                })
            }
        };
        let mut nums = Vec::new();
        for f in fields {
            let n: u32 = f.parse().map_err(|_| ParseError::BadHeader {
                line: 1,
                msg: format!("non-numeric header field '{f}'"),
            })?;
            nums.push(n);
        }
        if nums.len() < 5 || nums.len() > 9 {
            return Err(ParseError::BadHeader {
                line: 1,
                msg: format!("expected 5 to 9 header counts, got {}", nums.len()),
            });
        }
        let bads = nums.get(5).copied().unwrap_or(0);
        for (idx, section) in [(6, 'C'), (7, 'J'), (8, 'F')] {
            if nums.get(idx).copied().unwrap_or(0) != 0 {
                return Err(ParseError::UnsupportedSection { section });
            }
        }
        let header = Header {
            binary,
            max_var: nums[0],
            inputs: nums[1],
            latches: nums[2],
            outputs: nums[3],
            ands: nums[4],
            bads,
        };
        if binary && header.max_var != header.inputs + header.latches + header.ands {
            return Err(ParseError::BadHeader {
                line: 1,
                msg: format!(
                    "binary header requires M = I + L + A, got M={} I={} L={} A={}",
                    header.max_var, header.inputs, header.latches, header.ands
                ),
            });
        }
        Ok(header)
    }

    fn parse_ascii_body(&mut self, h: &Header) -> Result<AigerCircuit, ParseError> {
        let mut inputs = Vec::with_capacity(h.inputs as usize);
        for _ in 0..h.inputs {
            inputs.push(AigLit(self.expect_nums::<1>("input")?[0]));
        }
        let mut latches = Vec::with_capacity(h.latches as usize);
        for _ in 0..h.latches {
            let (nums, line) = self.expect_line_nums("latch", 2, 3)?;
            latches.push(make_latch(AigLit(nums[0]), AigLit(nums[1]), nums.get(2).copied(), line)?);
        }
        let mut outputs = Vec::with_capacity(h.outputs as usize);
        for _ in 0..h.outputs {
            outputs.push(AigLit(self.expect_nums::<1>("output")?[0]));
        }
        let mut bads = Vec::with_capacity(h.bads as usize);
        for _ in 0..h.bads {
            bads.push(AigLit(self.expect_nums::<1>("bad")?[0]));
        }
        let mut ands = Vec::with_capacity(h.ands as usize);
        for _ in 0..h.ands {
            let nums = self.expect_nums::<3>("and gate")?;
            ands.push(AndGate {
                lhs: AigLit(nums[0]),
                rhs0: AigLit(nums[1]),
                rhs1: AigLit(nums[2]),
            });
        }
        Ok(AigerCircuit {
            max_var: h.max_var,
            inputs,
            latches,
            outputs,
            bads,
            ands,
            property_index: 0,
        })
    }

    fn parse_binary_body(&mut self, h: &Header) -> Result<AigerCircuit, ParseError> {
        let inputs: Vec<AigLit> = (1..=h.inputs).map(|i| AigLit(2 * i)).collect();
        let mut latches = Vec::with_capacity(h.latches as usize);
        for k in 0..h.latches {
            let current = AigLit(2 * (h.inputs + k + 1));
            let (nums, line) = self.expect_line_nums("latch", 1, 2)?;
            latches.push(make_latch(current, AigLit(nums[0]), nums.get(1).copied(), line)?);
        }
        let mut outputs = Vec::with_capacity(h.outputs as usize);
        for _ in 0..h.outputs {
            outputs.push(AigLit(self.expect_nums::<1>("output")?[0]));
        }
        let mut bads = Vec::with_capacity(h.bads as usize);
        for _ in 0..h.bads {
            bads.push(AigLit(self.expect_nums::<1>("bad")?[0]));
        }
        let mut ands = Vec::with_capacity(h.ands as usize);
        for k in 0..h.ands {
            let lhs = AigLit(2 * (h.inputs + h.latches + k + 1));
            let d0 = self.read_delta()?;
            let d1 = self.read_delta()?;
            let rhs0 = lhs
                .0
                .checked_sub(d0)
                .ok_or(ParseError::DeltaOverflow { offset: self.pos })?;
            let rhs1 = rhs0
                .checked_sub(d1)
                .ok_or(ParseError::DeltaOverflow { offset: self.pos })?;
            ands.push(AndGate {
                lhs,
                rhs0: AigLit(rhs0),
                rhs1: AigLit(rhs1),
            });
        }
        Ok(AigerCircuit {
            max_var: h.max_var,
            inputs,
            latches,
            outputs,
            bads,
            ands,
            property_index: 0,
        })
    }

    fn read_line(&mut self) -> Option<&'a str> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
            self.pos += 1;
        }
        let slice = &self.bytes[start..self.pos];
        if self.pos < self.bytes.len() {
            self.pos += 1; // consume '\n'
        }
        self.line += 1;
        std::str::from_utf8(slice).ok().map(|s| s.trim_end_matches('\r'))
    }

    fn expect_nums<const N: usize>(&mut self, what: &str) -> Result<[u32; N], ParseError> {
        let (nums, line) = self.expect_line_nums(what, N, N)?;
        let mut out = [0u32; N];
        out.copy_from_slice(&nums);
        let _ = line;
        Ok(out)
    }

    fn expect_line_nums(
        &mut self,
        what: &str,
        min: usize,
        max: usize,
    ) -> Result<(Vec<u32>, usize), ParseError> {
        let line_no = self.line;
        let line = self.read_line().ok_or_else(|| ParseError::UnexpectedEof {
            expected: what.to_string(),
        })?;
        let mut nums = Vec::new();
        for f in line.split_whitespace() {
            let n: u32 = f.parse().map_err(|_| ParseError::BadLine {
                line: line_no,
                msg: format!("expected {what} literal, got '{f}'"),
            })?;
            nums.push(n);
        }
        if nums.len() < min || nums.len() > max {
            return Err(ParseError::BadLine {
                line: line_no,
                msg: format!(
                    "expected {min}..={max} fields for {what}, got {}",
                    nums.len()
                ),
            });
        }
        Ok((nums, line_no))
    }

    fn read_delta(&mut self) -> Result<u32, ParseError> {
        let mut value: u32 = 0;
        let mut shift = 0;
        loop {
            if self.pos >= self.bytes.len() {
                return Err(ParseError::TruncatedDelta { offset: self.pos });
            }
            let byte = self.bytes[self.pos];
            self.pos += 1;
            if shift >= 32 || (shift == 28 && (byte & 0x7f) > 0x0f) {
                return Err(ParseError::DeltaOverflow { offset: self.pos });
            }
            value |= ((byte & 0x7f) as u32) << shift;
            if byte & 0x80 == 0 {
                return Ok(value);
            }
            shift += 7;
        }
    }
}

fn make_latch(
    current: AigLit,
    next: AigLit,
    reset: Option<u32>,
    line: usize,
) -> Result<Latch, ParseError> {
    let reset = match reset {
        None | Some(0) => Reset::Zero,
        Some(1) => Reset::One,
        Some(r) if r == current.0 => Reset::Free,
        Some(r) => {
            return Err(ParseError::BadLine {
                line,
                msg: format!("latch reset {r} must be 0, 1, or the latch literal {current}"),
            })
        }
    };
    Ok(Latch {
        current,
        next,
        reset,
    })
}

fn normalize(c: &mut AigerCircuit) {
    for g in &mut c.ands {
        if g.rhs0 < g.rhs1 {
            std::mem::swap(&mut g.rhs0, &mut g.rhs1);
        }
    }
    c.ands.sort_by_key(|g| g.lhs);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> AigerCircuit {
        AigerCircuit::parse(s.as_bytes()).unwrap()
    }

    #[test]
    fn degenerate_constant_false_output() {
        let c = parse("aag 0 0 0 1 0\n0\n");
        assert_eq!(c.max_var, 0);
        assert_eq!(c.outputs_or_bads(), &[AigLit::FALSE]);
        let (next, bad) = c.simulate_step(&[], &[]).unwrap();
        assert!(next.is_empty());
        assert!(!bad);
    }

    #[test]
    fn single_input_passthrough() {
        let c = parse("aag 1 1 0 1 0\n2\n2\n");
        assert_eq!(c.inputs, vec![AigLit(2)]);
        assert_eq!(c.outputs_or_bads(), &[AigLit(2)]);
        let (_, bad) = c.simulate_step(&[], &[true]).unwrap();
        assert!(bad);
        let (_, bad) = c.simulate_step(&[], &[false]).unwrap();
        assert!(!bad);
    }

    #[test]
    fn toggle_latch_negation() {
        // next = !current
        let c = parse("aag 1 0 1 1 0\n2 3\n2\n");
        let (next, _) = c.simulate_step(&[false], &[]).unwrap();
        assert_eq!(next, vec![true]);
        let (next, _) = c.simulate_step(&[true], &[]).unwrap();
        assert_eq!(next, vec![false]);
    }

    /// 3-bit counter with enable input; bad when count == 5.
    /// Built programmatically so the ascii and binary twins share one source.
    fn counter3() -> AigerCircuit {
        // vars: 1 = enable input, 2..4 = latch bits b0 b1 b2, then ands.
        let input = AigLit(2);
        let b = [AigLit(4), AigLit(6), AigLit(8)];
        let mut ands = Vec::new();
        let mut next_var = 5u32;
        let mut mk_and = |ands: &mut Vec<AndGate>, rhs0: AigLit, rhs1: AigLit| {
            let lhs = AigLit(next_var * 2);
            next_var += 1;
            ands.push(AndGate { lhs, rhs0, rhs1 });
            lhs
        };
        let neg = |l: AigLit| AigLit(l.0 ^ 1);
        let xor = |ands: &mut Vec<AndGate>,
                   mk: &mut dyn FnMut(&mut Vec<AndGate>, AigLit, AigLit) -> AigLit,
                   a: AigLit,
                   b: AigLit| {
            let t0 = mk(ands, a, neg(b));
            let t1 = mk(ands, neg(a), b);
            let t2 = mk(ands, neg(t0), neg(t1));
            neg(t2)
        };
        // carry chain: c0 = enable, c1 = c0 & b0, c2 = c1 & b1
        let c0 = input;
        let c1 = mk_and(&mut ands, c0, b[0]);
        let c2 = mk_and(&mut ands, c1, b[1]);
        let n0 = xor(&mut ands, &mut mk_and, b[0], c0);
        let n1 = xor(&mut ands, &mut mk_and, b[1], c1);
        let n2 = xor(&mut ands, &mut mk_and, b[2], c2);
        // bad = b2 & !b1 & b0  (count == 5)
        let t = mk_and(&mut ands, b[2], neg(b[1]));
        let bad = mk_and(&mut ands, t, b[0]);
        let mut c = AigerCircuit {
            max_var: next_var - 1,
            inputs: vec![input],
            latches: vec![
                Latch { current: b[0], next: n0, reset: Reset::Zero },
                Latch { current: b[1], next: n1, reset: Reset::Zero },
                Latch { current: b[2], next: n2, reset: Reset::Zero },
            ],
            outputs: vec![],
            bads: vec![bad],
            ands,
            property_index: 0,
        };
        normalize(&mut c);
        c.validate().unwrap();
        c
    }

    #[test]
    fn counter_reaches_bad_at_step_five() {
        let c = counter3();
        let mut state = c.reset_state();
        for step in 0..6 {
            let (next, bad) = c.simulate_step(&state, &[true]).unwrap();
            assert_eq!(bad, step == 5, "step {step}");
            state = next;
        }
    }

    #[test]
    fn binary_and_ascii_twins_agree() {
        let c = counter3();
        let ascii = c.to_ascii();
        let binary = c.to_binary().unwrap();
        let from_ascii = AigerCircuit::parse(ascii.as_bytes()).unwrap();
        let from_binary = AigerCircuit::parse(&binary).unwrap();
        assert_eq!(from_ascii, from_binary);
        assert_eq!(from_ascii, c);
        // Same traces on random-ish input sequences.
        let mut state_a = from_ascii.reset_state();
        let mut state_b = from_binary.reset_state();
        let mut x: u32 = 0x2545f491;
        for _ in 0..1000 {
            x ^= x << 13;
            x ^= x >> 17;
            x ^= x << 5;
            let inp = [x & 1 == 1];
            let (na, ba) = from_ascii.simulate_step(&state_a, &inp).unwrap();
            let (nb, bb) = from_binary.simulate_step(&state_b, &inp).unwrap();
            assert_eq!(na, nb);
            assert_eq!(ba, bb);
            state_a = na;
            state_b = nb;
        }
    }

    #[test]
    fn parse_serialize_parse_is_fixpoint() {
        let texts = [
            "aag 0 0 0 1 0\n0\n",
            "aag 1 1 0 1 0\n2\n2\n",
            "aag 1 0 1 1 0\n2 3\n2\n",
            "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n",
        ];
        for t in texts {
            let c1 = parse(t);
            let c2 = parse(&c1.to_ascii());
            assert_eq!(c1, c2);
            let c3 = parse(&c2.to_ascii());
            assert_eq!(c2, c3);
        }
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(matches!(
            AigerCircuit::parse(b"agg 0 0 0 1 0\n0\n"),
            Err(ParseError::BadHeader { .. })
        ));
        assert!(matches!(
            AigerCircuit::parse(b"aag 1 0 0 1 0\n4\n"),
            Err(ParseError::LiteralOutOfRange { lit: 4, .. })
        ));
        // duplicate and definition
        assert!(matches!(
            AigerCircuit::parse(b"aag 3 2 0 1 2\n2\n4\n6\n6 2 4\n6 4 2\n"),
            Err(ParseError::DuplicateDefinition { var: 3, .. })
        ));
        // justice section rejected
        assert!(matches!(
            AigerCircuit::parse(b"aag 0 0 0 1 0 0 0 1\n0\n"),
            Err(ParseError::UnsupportedSection { section: 'J' })
        ));
        // truncated binary delta stream
        let c = counter3();
        let mut bin = c.to_binary().unwrap();
        bin.truncate(bin.len() - 1);
        assert!(matches!(
            AigerCircuit::parse(&bin),
            Err(ParseError::TruncatedDelta { .. })
        ));
    }

    #[test]
    fn simulation_is_deterministic() {
        let c = counter3();
        let inputs: Vec<[bool; 1]> = (0..64).map(|i| [i % 3 != 0]).collect();
        let run = || {
            let mut st = c.reset_state();
            let mut trace = Vec::new();
            for inp in &inputs {
                let (n, b) = c.simulate_step(&st, inp).unwrap();
                trace.push((n.clone(), b));
                st = n;
            }
            trace
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let c = counter3();
        assert!(matches!(
            c.simulate_step(&[false; 2], &[true]),
            Err(SimError::StateWidth { .. })
        ));
        assert!(matches!(
            c.simulate_step(&[false; 3], &[]),
            Err(SimError::InputWidth { .. })
        ));
    }
}
