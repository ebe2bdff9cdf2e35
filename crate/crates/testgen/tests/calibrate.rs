//! Manual calibration harness for the push-policy case-study suite.
//! Ignored by default; run with
//! `cargo test -p mck-testgen --test calibrate -- --ignored --nocapture`.

use mck_core::ic3::policy::PolicySet;
use mck_core::ic3::{check, CheckOptions, Verdict};
use mck_core::tsys::TransitionSystem;
use mck_testgen::corpus::case_study_suite;
use std::time::Instant;

#[test]
#[ignore]
fn measure_policy_effect_on_case_study_suite() {
    let suite = case_study_suite();
    println!("suite size: {}", suite.len());
    let policies = [
        "push_prop=baseline",
        "push_prop=gated_simplify",
        "push_prop=stall_skip",
        "push_prop=adaptive_budget",
    ];
    let mut table: Vec<(String, Vec<f64>, Vec<u64>)> = Vec::new();
    for inst in &suite {
        let mut times = Vec::new();
        let mut sats = Vec::new();
        for spec in policies {
            let ts = TransitionSystem::new(inst.circuit.clone(), 0).unwrap();
            let opts = CheckOptions {
                policies: PolicySet::from_specs([spec]).unwrap(),
                debug_checks: false,
                ..Default::default()
            };
            let start = Instant::now();
            let res = check(&ts, &opts).unwrap();
            times.push(start.elapsed().as_secs_f64());
            sats.push(res.counters["sat_calls"]);
            assert!(!matches!(res.verdict, Verdict::Timeout));
        }
        table.push((inst.name.clone(), times, sats));
    }
    println!("{:<28} {:>8} {:>8} {:>8} {:>8}  sat: base/gated/stall/adapt", "instance", "base", "gated", "stall", "adapt");
    let mut totals = [0.0f64; 4];
    for (name, times, sats) in &table {
        println!(
            "{name:<28} {:>8.3} {:>8.3} {:>8.3} {:>8.3}  {}/{}/{}/{}",
            times[0], times[1], times[2], times[3], sats[0], sats[1], sats[2], sats[3]
        );
        for i in 0..4 {
            totals[i] += times[i];
        }
    }
    println!(
        "TOTALS base={:.3} gated={:.3} stall={:.3} adapt={:.3}",
        totals[0], totals[1], totals[2], totals[3]
    );
}
