//! Programmatic AIG construction in canonical binary variable order
//! (inputs, then latches, then and-gates). Gates with constant or repeated
//! operands fold away instead of allocating variables.

use crate::aiger::{AigLit, AigerCircuit, AndGate, Latch, Reset};

pub struct AigBuilder {
    num_inputs: usize,
    num_latches: usize,
    next_var: u32,
    ands: Vec<AndGate>,
    latch_next: Vec<Option<(AigLit, Reset)>>,
    outputs: Vec<AigLit>,
    bads: Vec<AigLit>,
}

pub fn not(l: AigLit) -> AigLit {
    AigLit(l.0 ^ 1)
}

impl AigBuilder {
    pub fn new(num_inputs: usize, num_latches: usize) -> Self {
        AigBuilder {
            num_inputs,
            num_latches,
            next_var: (num_inputs + num_latches) as u32 + 1,
            ands: Vec::new(),
            latch_next: vec![None; num_latches],
            outputs: Vec::new(),
            bads: Vec::new(),
        }
    }

    pub fn input_lit(&self, i: usize) -> AigLit {
        assert!(i < self.num_inputs);
        AigLit(2 * (i as u32 + 1))
    }

    pub fn latch_lit(&self, i: usize) -> AigLit {
        assert!(i < self.num_latches);
        AigLit(2 * (self.num_inputs + i) as u32 + 2)
    }

    pub fn and(&mut self, a: AigLit, b: AigLit) -> AigLit {
        if a == AigLit::FALSE || b == AigLit::FALSE || a == not(b) {
            return AigLit::FALSE;
        }
        if a == AigLit::TRUE || a == b {
            return b;
        }
        if b == AigLit::TRUE {
            return a;
        }
        let lhs = AigLit(2 * self.next_var);
        self.next_var += 1;
        let (rhs0, rhs1) = if a >= b { (a, b) } else { (b, a) };
        self.ands.push(AndGate { lhs, rhs0, rhs1 });
        lhs
    }

    pub fn or(&mut self, a: AigLit, b: AigLit) -> AigLit {
        not(self.and(not(a), not(b)))
    }

    pub fn xor(&mut self, a: AigLit, b: AigLit) -> AigLit {
        let t0 = self.and(a, not(b));
        let t1 = self.and(not(a), b);
        self.or(t0, t1)
    }

    pub fn and_many(&mut self, lits: &[AigLit]) -> AigLit {
        lits.iter().fold(AigLit::TRUE, |acc, &l| self.and(acc, l))
    }

    pub fn or_many(&mut self, lits: &[AigLit]) -> AigLit {
        lits.iter().fold(AigLit::FALSE, |acc, &l| self.or(acc, l))
    }

    /// if c then t else e
    pub fn mux(&mut self, c: AigLit, t: AigLit, e: AigLit) -> AigLit {
        let a = self.and(c, t);
        let b = self.and(not(c), e);
        self.or(a, b)
    }

    pub fn set_next(&mut self, latch: usize, next: AigLit, reset: Reset) {
        self.latch_next[latch] = Some((next, reset));
    }

    pub fn add_output(&mut self, lit: AigLit) {
        self.outputs.push(lit);
    }

    pub fn add_bad(&mut self, lit: AigLit) {
        self.bads.push(lit);
    }

    pub fn build(self) -> AigerCircuit {
        let latches = (0..self.num_latches)
            .map(|i| {
                let current = AigLit(2 * (self.num_inputs + i) as u32 + 2);
                let (next, reset) = self.latch_next[i]
                    .unwrap_or_else(|| panic!("latch {i} has no next-state function"));
                Latch {
                    current,
                    next,
                    reset,
                }
            })
            .collect();
        let circuit = AigerCircuit {
            max_var: self.next_var - 1,
            inputs: (0..self.num_inputs)
                .map(|i| AigLit(2 * (i as u32 + 1)))
                .collect(),
            latches,
            outputs: self.outputs,
            bads: self.bads,
            ands: self.ands,
            property_index: 0,
        };
        circuit.validate().expect("builder produced a valid circuit");
        circuit
    }
}

/// Small canned circuits used across tests.
pub mod circuits {
    use super::*;

    /// One latch, next = !current, bad = current. Reset 0, so bad first
    /// holds at step 1.
    pub fn toggle() -> AigerCircuit {
        let mut b = AigBuilder::new(0, 1);
        let l = b.latch_lit(0);
        b.set_next(0, not(l), Reset::Zero);
        b.add_bad(l);
        b.build()
    }

    /// Wrapping binary counter; increments when the enable input is high
    /// (or every step when `enable` is false). Bad when the count equals
    /// `bad_at` (callers must keep `bad_at < 2^bits`).
    pub fn counter(bits: usize, bad_at: u64, enable: bool) -> AigerCircuit {
        assert!(bad_at < 1u64 << bits);
        let mut b = AigBuilder::new(enable as usize, bits);
        let inc = if enable {
            b.input_lit(0)
        } else {
            AigLit::TRUE
        };
        let mut carry = inc;
        for i in 0..bits {
            let bit = b.latch_lit(i);
            let next_carry = b.and(carry, bit);
            let n = b.xor(bit, carry);
            b.set_next(i, n, Reset::Zero);
            carry = next_carry;
        }
        let bad = match_pattern(&mut b, bits, bad_at);
        b.add_bad(bad);
        b.build()
    }

    /// Counter that wraps to zero on reaching `modulus`, so counts >=
    /// modulus are unreachable: safe iff `bad_at >= modulus`.
    pub fn mod_counter(bits: usize, modulus: u64, bad_at: u64) -> AigerCircuit {
        assert!(modulus >= 1 && modulus <= 1 << bits);
        assert!(bad_at < 1u64 << bits);
        let mut b = AigBuilder::new(1, bits);
        let en = b.input_lit(0);
        let wrap = match_pattern(&mut b, bits, modulus - 1);
        let mut carry = en;
        for i in 0..bits {
            let bit = b.latch_lit(i);
            let next_carry = b.and(carry, bit);
            let inc = b.xor(bit, carry);
            let wrapping = b.and(wrap, en);
            let next = b.and(inc, not(wrapping));
            b.set_next(i, next, Reset::Zero);
            carry = next_carry;
        }
        let bad = match_pattern(&mut b, bits, bad_at);
        b.add_bad(bad);
        b.build()
    }

    /// AND of the bit-pattern match `state == value`.
    fn match_pattern(b: &mut AigBuilder, bits: usize, value: u64) -> AigLit {
        let pattern: Vec<AigLit> = (0..bits)
            .map(|i| {
                let bit = b.latch_lit(i);
                if value >> i & 1 == 1 {
                    bit
                } else {
                    not(bit)
                }
            })
            .collect();
        b.and_many(&pattern)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_keeps_variables_contiguous() {
        let mut b = AigBuilder::new(1, 1);
        let i = b.input_lit(0);
        let l = b.latch_lit(0);
        assert_eq!(b.and(i, AigLit::TRUE), i);
        assert_eq!(b.and(i, not(i)), AigLit::FALSE);
        assert_eq!(b.and(AigLit::FALSE, l), AigLit::FALSE);
        let g = b.and(i, l);
        assert_eq!(g, AigLit(6));
        b.set_next(0, g, Reset::Zero);
        b.add_bad(l);
        let c = b.build();
        c.to_binary().unwrap();
    }

    #[test]
    fn counter_counts() {
        let c = circuits::counter(4, 9, false);
        let mut state = c.reset_state();
        for step in 0..16 {
            let (next, bad) = c.simulate_step(&state, &[]).unwrap();
            assert_eq!(bad, step == 9, "step {step}");
            state = next;
        }
        // wrapped around
        assert_eq!(state, vec![false; 4]);
    }
}
