//! Circuit generators: structured families plus seeded random AIGs.

use mck_core::aigbuild::{circuits, not, AigBuilder};
use mck_core::aiger::{AigLit, AigerCircuit, Reset};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub use circuits::{counter, mod_counter, toggle};

/// k independent toggles, each with its own enable input. Bad when the
/// toggle states match `mask` (bit i of mask = required value of toggle i).
pub fn toggle_bank(k: usize, mask: u64) -> AigerCircuit {
    let mut b = AigBuilder::new(k, k);
    for i in 0..k {
        let bit = b.latch_lit(i);
        let en = b.input_lit(i);
        let flipped = b.xor(bit, en);
        b.set_next(i, flipped, Reset::Zero);
    }
    let pattern: Vec<AigLit> = (0..k)
        .map(|i| {
            let bit = b.latch_lit(i);
            if mask >> i & 1 == 1 {
                bit
            } else {
                not(bit)
            }
        })
        .collect();
    let bad = b.and_many(&pattern);
    b.add_bad(bad);
    b.build()
}

/// k toggles flipping in lockstep off one shared enable. Only the all-zero
/// and all-one states are reachable, so any mixed mask is safe.
pub fn synced_toggles(k: usize, mask: u64) -> AigerCircuit {
    let mut b = AigBuilder::new(1, k);
    let en = b.input_lit(0);
    for i in 0..k {
        let bit = b.latch_lit(i);
        let flipped = b.xor(bit, en);
        b.set_next(i, flipped, Reset::Zero);
    }
    let pattern: Vec<AigLit> = (0..k)
        .map(|i| {
            let bit = b.latch_lit(i);
            if mask >> i & 1 == 1 {
                bit
            } else {
                not(bit)
            }
        })
        .collect();
    let bad = b.and_many(&pattern);
    b.add_bad(bad);
    b.build()
}

/// One-hot ring: a single token rotates when enabled. Bad when two chosen
/// positions carry the token simultaneously — unreachable, so always safe.
pub fn one_hot_ring(n: usize, i: usize, j: usize) -> AigerCircuit {
    assert!(n >= 2 && i < n && j < n && i != j);
    let mut b = AigBuilder::new(1, n);
    let en = b.input_lit(0);
    for p in 0..n {
        let prev = b.latch_lit((p + n - 1) % n);
        let cur = b.latch_lit(p);
        let next = b.mux(en, prev, cur);
        b.set_next(p, next, if p == 0 { Reset::One } else { Reset::Zero });
    }
    let bi = b.latch_lit(i);
    let bj = b.latch_lit(j);
    let bad = b.and(bi, bj);
    b.add_bad(bad);
    b.build()
}

/// Shift register fed by an input bit; bad when the register holds
/// `secret`. Any pattern can be shifted in, so this is unsafe with a
/// counterexample as deep as the register.
pub fn shift_lock(n: usize, secret: u64) -> AigerCircuit {
    let mut b = AigBuilder::new(1, n);
    let feed = b.input_lit(0);
    for i in 0..n {
        let src = if i == 0 { feed } else { b.latch_lit(i - 1) };
        b.set_next(i, src, Reset::Zero);
    }
    let pattern: Vec<AigLit> = (0..n)
        .map(|i| {
            let bit = b.latch_lit(i);
            if secret >> i & 1 == 1 {
                bit
            } else {
                not(bit)
            }
        })
        .collect();
    let bad = b.and_many(&pattern);
    b.add_bad(bad);
    b.build()
}

/// Autonomous Fibonacci LFSR over `taps`; a nonzero seed never reaches the
/// all-zero state, so bad = "all zero" is safe.
pub fn lfsr_zero_bad(n: usize, taps: &[usize]) -> AigerCircuit {
    assert!(n >= 2 && !taps.is_empty());
    let mut b = AigBuilder::new(0, n);
    let mut fb = AigLit::FALSE;
    for &t in taps {
        let bit = b.latch_lit(t % n);
        fb = b.xor(fb, bit);
    }
    for i in 0..n {
        let next = if i == 0 { fb } else { b.latch_lit(i - 1) };
        b.set_next(i, next, if i == 0 { Reset::One } else { Reset::Zero });
    }
    let zeros: Vec<AigLit> = (0..n).map(|i| not(b.latch_lit(i))).collect();
    let bad = b.and_many(&zeros);
    b.add_bad(bad);
    b.build()
}

/// Two modular counters in lockstep off one enable. Bad when counter one
/// shows `bad1` and counter two shows `bad2` — reachable iff the residues
/// are compatible, and the safe cases force the checker to discover the
/// cross-counter phase relation clause by clause.
pub fn counter_pair(
    bits1: usize,
    m1: u64,
    bits2: usize,
    m2: u64,
    bad1: u64,
    bad2: u64,
) -> AigerCircuit {
    let mut b = AigBuilder::new(1, bits1 + bits2);
    let en = b.input_lit(0);
    let build = |b: &mut AigBuilder, lo: usize, bits: usize, m: u64| {
        let at_wrap: Vec<AigLit> = (0..bits)
            .map(|i| {
                let bit = b.latch_lit(lo + i);
                if (m - 1) >> i & 1 == 1 {
                    bit
                } else {
                    not(bit)
                }
            })
            .collect();
        let wrap = b.and_many(&at_wrap);
        let mut carry = en;
        for i in 0..bits {
            let bit = b.latch_lit(lo + i);
            let next_carry = b.and(carry, bit);
            let inc = b.xor(bit, carry);
            let wrapping = b.and(wrap, en);
            let next = b.and(inc, not(wrapping));
            b.set_next(lo + i, next, Reset::Zero);
            carry = next_carry;
        }
    };
    build(&mut b, 0, bits1, m1);
    build(&mut b, bits1, bits2, m2);
    let mut terms = Vec::new();
    for i in 0..bits1 {
        let bit = b.latch_lit(i);
        terms.push(if bad1 >> i & 1 == 1 { bit } else { not(bit) });
    }
    for i in 0..bits2 {
        let bit = b.latch_lit(bits1 + i);
        terms.push(if bad2 >> i & 1 == 1 { bit } else { not(bit) });
    }
    let bad = b.and_many(&terms);
    b.add_bad(bad);
    b.build()
}

/// Autonomous LFSR whose bad state is the orbit point `steps` transitions
/// from reset: unsafe with a counterexample exactly that deep.
pub fn lfsr_orbit(n: usize, taps: &[usize], steps: usize) -> AigerCircuit {
    // First build the plain LFSR to find the target state by simulation.
    let probe = lfsr_zero_bad(n, taps);
    let mut state = probe.reset_state();
    for _ in 0..steps {
        let (next, _) = probe.simulate_step(&state, &[]).unwrap();
        state = next;
    }
    let mut b = AigBuilder::new(0, n);
    let mut fb = AigLit::FALSE;
    for &t in taps {
        let bit = b.latch_lit(t % n);
        fb = b.xor(fb, bit);
    }
    for i in 0..n {
        let next = if i == 0 { fb } else { b.latch_lit(i - 1) };
        b.set_next(i, next, if i == 0 { Reset::One } else { Reset::Zero });
    }
    let pattern: Vec<AigLit> = (0..n)
        .map(|i| {
            let bit = b.latch_lit(i);
            if state[i] {
                bit
            } else {
                not(bit)
            }
        })
        .collect();
    let bad = b.and_many(&pattern);
    b.add_bad(bad);
    b.build()
}

pub struct RandomAigConfig {
    pub latches: usize,
    pub inputs: usize,
    pub gates: usize,
    /// Number of conjuncts in the bad cone; higher = rarer bad states.
    pub bad_terms: usize,
}

impl Default for RandomAigConfig {
    fn default() -> Self {
        RandomAigConfig {
            latches: 10,
            inputs: 2,
            gates: 40,
            bad_terms: 3,
        }
    }
}

/// Seeded random and-inverter graph. Next-state functions and the bad cone
/// are drawn from a growing pool of gate outputs, biased toward recent
/// (deeper) nodes.
pub fn random_aig(seed: u64, cfg: &RandomAigConfig) -> AigerCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = AigBuilder::new(cfg.inputs, cfg.latches);
    let mut pool: Vec<AigLit> = (0..cfg.inputs)
        .map(|i| b.input_lit(i))
        .chain((0..cfg.latches).map(|i| b.latch_lit(i)))
        .collect();
    let pick = |rng: &mut ChaCha8Rng, pool: &[AigLit]| -> AigLit {
        // Bias toward the most recent half of the pool.
        let lo = if rng.gen_bool(0.5) { pool.len() / 2 } else { 0 };
        let lit = pool[rng.gen_range(lo..pool.len())];
        if rng.gen_bool(0.5) {
            not(lit)
        } else {
            lit
        }
    };
    for _ in 0..cfg.gates {
        let x = pick(&mut rng, &pool);
        let y = pick(&mut rng, &pool);
        let g = b.and(x, y);
        if !g.is_constant() {
            pool.push(g);
        }
    }
    for i in 0..cfg.latches {
        let next = pick(&mut rng, &pool);
        let reset = match rng.gen_range(0..10) {
            0..=6 => Reset::Zero,
            7..=8 => Reset::One,
            _ => Reset::Free,
        };
        b.set_next(i, next, reset);
    }
    let terms: Vec<AigLit> = (0..cfg.bad_terms.max(1))
        .map(|_| pick(&mut rng, &pool))
        .collect();
    let bad = b.and_many(&terms);
    b.add_bad(bad);
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{bfs_reachability, OracleVerdict};

    #[test]
    fn one_hot_ring_is_safe() {
        let c = one_hot_ring(5, 1, 3);
        assert_eq!(bfs_reachability(&c), OracleVerdict::Safe);
    }

    #[test]
    fn shift_lock_depth_matches_register_length() {
        let c = shift_lock(6, 0b101101);
        assert_eq!(bfs_reachability(&c), OracleVerdict::Unsafe { shortest: 6 });
    }

    #[test]
    fn lfsr_never_hits_zero() {
        let c = lfsr_zero_bad(6, &[0, 5]);
        assert_eq!(bfs_reachability(&c), OracleVerdict::Safe);
    }

    #[test]
    fn mixed_toggle_mask_is_safe() {
        // toggles share no clock relationships here (independent enables),
        // so any mask is reachable: expect unsafe.
        let c = toggle_bank(4, 0b0101);
        assert!(!bfs_reachability(&c).is_safe());
    }

    #[test]
    fn random_aig_is_deterministic_per_seed() {
        let cfg = RandomAigConfig::default();
        let a = random_aig(7, &cfg);
        let b = random_aig(7, &cfg);
        assert_eq!(a, b);
        let c = random_aig(8, &cfg);
        assert_ne!(a, c);
    }
}
