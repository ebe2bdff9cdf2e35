//! Named instance corpora with oracle-verified expected verdicts.

use crate::gen::{self, RandomAigConfig};
use crate::oracle::{bfs_reachability, OracleVerdict};
use mck_core::aiger::AigerCircuit;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub circuit: AigerCircuit,
    pub expected: OracleVerdict,
}

fn instance(name: impl Into<String>, circuit: AigerCircuit) -> Instance {
    let expected = bfs_reachability(&circuit);
    Instance {
        name: name.into(),
        circuit,
        expected,
    }
}

/// The oracle corpus: small circuits (at most 12 latches) spanning
/// counters, toggles, rings, shift registers, LFSRs, and random AIGs, each
/// labeled by BFS reachability.
pub fn oracle_corpus() -> Vec<Instance> {
    let mut out = Vec::new();

    out.push(instance(
        "const_false_bad",
        AigerCircuit::parse(b"aag 0 0 0 1 0\n0\n").unwrap(),
    ));
    out.push(instance(
        "input_passthrough",
        AigerCircuit::parse(b"aag 1 1 0 1 0\n2\n2\n").unwrap(),
    ));
    out.push(instance("toggle", gen::toggle()));
    {
        use mck_core::aigbuild::AigBuilder;
        use mck_core::aiger::Reset;
        let mut b = AigBuilder::new(0, 1);
        let l = b.latch_lit(0);
        b.set_next(0, l, Reset::One);
        b.add_bad(l);
        out.push(instance("reset_one_sticky", b.build()));
    }

    for (bits, bad, enable) in [
        (3, 5, true),
        (4, 10, true),
        (4, 15, true),
        (5, 21, true),
        (6, 40, true),
        (3, 6, false),
        (4, 9, false),
        (5, 17, false),
    ] {
        out.push(instance(
            format!("counter{bits}_bad{bad}_{}", if enable { "en" } else { "free" }),
            gen::counter(bits, bad, enable),
        ));
    }

    for (bits, modulus, bad) in [
        (3, 5, 6),
        (4, 6, 11),
        (4, 9, 12),
        (5, 11, 19),
        (5, 17, 24),
        (6, 33, 48),
        (6, 40, 50),
        (7, 65, 100),
    ] {
        out.push(instance(
            format!("modcounter{bits}_m{modulus}_bad{bad}"),
            gen::mod_counter(bits, modulus, bad),
        ));
    }

    for (k, mask) in [(4, 0b0101u64), (5, 0b10110), (6, 0b110011)] {
        out.push(instance(
            format!("togglebank{k}_m{mask:x}"),
            gen::toggle_bank(k, mask),
        ));
    }
    for (k, mask) in [(4, 0b0101u64), (6, 0b101010), (8, 0b11001100)] {
        out.push(instance(
            format!("syncedtoggles{k}_m{mask:x}"),
            gen::synced_toggles(k, mask),
        ));
    }

    for (n, i, j) in [(4, 0, 2), (5, 1, 3), (6, 2, 5), (8, 3, 7), (10, 0, 9), (12, 5, 11)] {
        out.push(instance(format!("ring{n}_{i}_{j}"), gen::one_hot_ring(n, i, j)));
    }

    for (n, secret) in [
        (4, 0b1011u64),
        (6, 0b101101),
        (8, 0xa5),
        (10, 0x2bd),
        (12, 0xf0f),
    ] {
        out.push(instance(
            format!("shiftlock{n}_{secret:x}"),
            gen::shift_lock(n, secret),
        ));
    }

    for (n, taps) in [
        (4usize, vec![0usize, 3]),
        (6, vec![0, 5]),
        (8, vec![0, 1, 7]),
        (10, vec![0, 6]),
        (12, vec![0, 3, 11]),
    ] {
        out.push(instance(format!("lfsr{n}"), gen::lfsr_zero_bad(n, &taps)));
    }

    let configs = [
        RandomAigConfig {
            latches: 8,
            inputs: 2,
            gates: 30,
            bad_terms: 3,
        },
        RandomAigConfig {
            latches: 10,
            inputs: 2,
            gates: 45,
            bad_terms: 3,
        },
        RandomAigConfig {
            latches: 12,
            inputs: 3,
            gates: 60,
            bad_terms: 4,
        },
    ];
    for (ci, cfg) in configs.iter().enumerate() {
        for seed in 0..7u64 {
            let c = gen::random_aig(seed * 31 + ci as u64, cfg);
            out.push(instance(format!("rand{}_{}_s{}", cfg.latches, ci, seed), c));
        }
    }

    out
}

/// Push-propagation-heavy suite for policy comparisons: instances where
/// the checker builds enough frames and lemmas that propagation scheduling
/// matters. Filtered deterministically by instrumentation counters of a
/// baseline run (capped by SAT calls, not wall time).
pub fn case_study_suite() -> Vec<Instance> {
    let mut out = Vec::new();
    for (bits, modulus, bad) in [
        (7, 75, 80),
        (7, 90, 101),
        (7, 101, 110),
        (8, 140, 150),
        (8, 170, 201),
        (8, 190, 220),
        (8, 201, 230),
        (8, 230, 255),
        (9, 260, 511),
        (9, 300, 490),
        (9, 340, 350),
        (9, 370, 400),
        (9, 401, 460),
    ] {
        out.push(instance(
            format!("cs_modcounter{bits}_m{modulus}"),
            gen::mod_counter(bits, modulus, bad),
        ));
    }
    for (n, secret) in [
        (10usize, 0x2adu64),
        (12, 0xb3c),
        (14, 0x2af3),
        (15, 0x5b21),
        (16, 0x9c44),
    ] {
        out.push(instance(
            format!("cs_shiftlock{n}"),
            gen::shift_lock(n, secret),
        ));
    }
    // Paired modular counters: safe when the bad residues are incompatible
    // (the invariant relates the two counts), deep unsafe otherwise.
    for (b1, m1, b2, m2, bad1, bad2) in [
        (4usize, 12u64, 4usize, 9u64, 5u64, 8u64), // compatible: deep unsafe
        (4, 10, 4, 15, 7, 12),                     // compatible: deep unsafe
        (4, 14, 4, 10, 1, 4),                      // gcd 2: parity mismatch: safe
        (5, 24, 4, 9, 11, 8),                      // compatible: deep unsafe
        (5, 18, 5, 24, 4, 11),                     // gcd 6: safe
    ] {
        out.push(instance(
            format!("cs_pair{b1}m{m1}_{b2}m{m2}_{bad1}_{bad2}"),
            gen::counter_pair(b1, m1, b2, m2, bad1, bad2),
        ));
    }
    // Deep deterministic counterexamples through an LFSR orbit.
    for (n, taps, steps) in [
        (10usize, vec![0usize, 6], 25usize),
        (10, vec![0, 6], 40),
        (11, vec![0, 8], 30),
        (11, vec![0, 8], 50),
        (12, vec![0, 3, 11], 35),
        (12, vec![0, 3, 11], 60),
        (13, vec![0, 9], 45),
        (13, vec![0, 9], 70),
        (14, vec![0, 11], 55),
    ] {
        out.push(instance(
            format!("cs_lfsrorbit{n}_{steps}"),
            gen::lfsr_orbit(n, &taps, steps),
        ));
    }
    out
}

/// Write instances to a directory, alternating text and binary encodings.
/// Returns (path, instance) pairs in corpus order.
pub fn write_corpus(dir: &Path, instances: &[Instance]) -> std::io::Result<Vec<(PathBuf, Instance)>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::with_capacity(instances.len());
    for (i, inst) in instances.iter().enumerate() {
        let (path, bytes) = if i % 5 == 4 {
            (
                dir.join(format!("{}.aig", inst.name)),
                inst.circuit.to_binary().expect("canonical circuits"),
            )
        } else {
            (
                dir.join(format!("{}.aag", inst.name)),
                inst.circuit.to_ascii().into_bytes(),
            )
        };
        std::fs::write(&path, bytes)?;
        out.push((path, inst.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_corpus_is_large_and_mixed() {
        let corpus = oracle_corpus();
        assert!(corpus.len() >= 50, "only {} instances", corpus.len());
        let safe = corpus.iter().filter(|i| i.expected.is_safe()).count();
        let unsafe_ = corpus.len() - safe;
        assert!(safe >= 10, "only {safe} safe instances");
        assert!(unsafe_ >= 10, "only {unsafe_} unsafe instances");
        for inst in &corpus {
            assert!(
                inst.circuit.num_latches() <= 12,
                "{} has {} latches",
                inst.name,
                inst.circuit.num_latches()
            );
        }
    }
}
