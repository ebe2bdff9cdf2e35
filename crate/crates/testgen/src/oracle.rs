//! Explicit-state breadth-first reachability over the circuit simulator.
//!
//! This is the ground truth the SAT-based checker is measured against: it
//! shares only the netlist simulation with the checking path, never the
//! encoder or the solver.

use mck_core::aiger::AigerCircuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Safe,
    /// A bad state is reachable; `shortest` is the minimal number of steps
    /// (0 = an initial state can already raise bad).
    Unsafe { shortest: usize },
}

impl OracleVerdict {
    pub fn is_safe(self) -> bool {
        matches!(self, OracleVerdict::Safe)
    }
}

/// BFS over all (state, input) transitions. Only feasible for small
/// circuits; panics above the given latch/input limits to catch misuse.
pub fn bfs_reachability(circuit: &AigerCircuit) -> OracleVerdict {
    let n = circuit.num_latches();
    let ni = circuit.num_inputs();
    assert!(n <= 20, "oracle limited to 20 latches, got {n}");
    assert!(ni <= 8, "oracle limited to 8 inputs, got {ni}");

    let to_bits = |mut v: u64, width: usize| -> Vec<bool> {
        let mut bits = Vec::with_capacity(width);
        for _ in 0..width {
            bits.push(v & 1 == 1);
            v >>= 1;
        }
        bits
    };
    let from_bits = |bits: &[bool]| -> u64 {
        bits.iter()
            .rev()
            .fold(0u64, |acc, &b| acc << 1 | b as u64)
    };

    let mut visited = vec![false; 1usize << n];
    let mut frontier: Vec<u64> = Vec::new();

    // Enumerate initial states: free latches range over both values.
    let free: Vec<usize> = (0..n)
        .filter(|&i| {
            use mck_core::aiger::Reset;
            circuit.latches[i].reset == Reset::Free
        })
        .collect();
    let base = from_bits(&circuit.reset_state());
    for combo in 0u64..(1 << free.len()) {
        let mut s = base;
        for (j, &latch) in free.iter().enumerate() {
            if combo >> j & 1 == 1 {
                s |= 1 << latch;
            } else {
                s &= !(1 << latch);
            }
        }
        if !visited[s as usize] {
            visited[s as usize] = true;
            frontier.push(s);
        }
    }

    let inputs: Vec<Vec<bool>> = (0u64..(1 << ni)).map(|v| to_bits(v, ni)).collect();
    let mut depth = 0usize;
    while !frontier.is_empty() {
        let mut next_frontier = Vec::new();
        for &s in &frontier {
            let state = to_bits(s, n);
            for u in &inputs {
                let (next, bad) = circuit.simulate_step(&state, u).expect("widths match");
                if bad {
                    return OracleVerdict::Unsafe { shortest: depth };
                }
                let t = from_bits(&next) as usize;
                if !visited[t] {
                    visited[t] = true;
                    next_frontier.push(t as u64);
                }
            }
        }
        frontier = next_frontier;
        depth += 1;
    }
    OracleVerdict::Safe
}

#[cfg(test)]
mod tests {
    use super::*;
    use mck_core::aigbuild::circuits;

    #[test]
    fn counter_unsafe_with_shortest_distance() {
        let c = circuits::counter(4, 10, true);
        assert_eq!(bfs_reachability(&c), OracleVerdict::Unsafe { shortest: 10 });
    }

    #[test]
    fn mod_counter_safe_when_bad_above_modulus() {
        let c = circuits::mod_counter(4, 6, 11);
        assert_eq!(bfs_reachability(&c), OracleVerdict::Safe);
    }

    #[test]
    fn free_reset_latch_counts_as_initial() {
        use mck_core::aigbuild::AigBuilder;
        use mck_core::aiger::Reset;
        let mut b = AigBuilder::new(0, 1);
        let l = b.latch_lit(0);
        b.set_next(0, l, Reset::Free);
        b.add_bad(l);
        let c = b.build();
        assert_eq!(bfs_reachability(&c), OracleVerdict::Unsafe { shortest: 0 });
    }
}
