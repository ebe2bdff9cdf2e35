//! Run records and the `metrics_v1` report.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunVerdict {
    #[serde(rename = "SAFE")]
    Safe,
    #[serde(rename = "UNSAFE")]
    Unsafe,
    #[serde(rename = "TIMEOUT")]
    Timeout,
    #[serde(rename = "ERROR")]
    Error,
}

impl RunVerdict {
    pub fn solved(self) -> bool {
        matches!(self, RunVerdict::Safe | RunVerdict::Unsafe)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub path: String,
    pub verdict: RunVerdict,
    /// Pass/fail truth for this run: false on gate failures, crashes, or
    /// verdict/artifact inconsistencies. Clean timeouts stay true.
    pub ok: bool,
    pub wall_sec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    /// Present iff the verdict is SAFE or UNSAFE.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cert_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cex_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_path: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counters: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Par2 {
    pub avg_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub total: usize,
    pub solved: usize,
    pub timeouts: usize,
    pub errors: usize,
    pub par2_avg_sec: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema: String,
    pub timeout_sec: f64,
    pub jobs: usize,
    pub timing: String,
    pub par2: Par2,
    pub solved: usize,
    pub safe: usize,
    #[serde(rename = "unsafe")]
    pub unsafe_count: usize,
    pub timeouts: usize,
    pub errors: usize,
    pub buckets: BTreeMap<String, BucketStats>,
    pub runs: Vec<RunRecord>,
}

/// Mean penalized runtime: solved instances contribute their time, every
/// other instance counts as 2x the limit. Empty input is 0 by convention.
pub fn par2(times: &[(bool, f64)], timeout: f64) -> f64 {
    if times.is_empty() {
        return 0.0;
    }
    let total: f64 = times
        .iter()
        .map(|&(solved, sec)| if solved { sec } else { 2.0 * timeout })
        .sum();
    total / times.len() as f64
}

/// Family bucket: instance-name prefix before the first digit run.
pub fn bucket_key(id: &str) -> String {
    let end = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let key = &id[..end];
    if key.is_empty() {
        "other".to_string()
    } else {
        key.to_string()
    }
}

/// Pure aggregation from run records; `run_suite` and any re-aggregation
/// of persisted records produce identical reports.
pub fn aggregate(
    runs: Vec<RunRecord>,
    timeout_sec: f64,
    jobs: usize,
    timing: &str,
) -> BenchReport {
    let solved = runs.iter().filter(|r| r.verdict.solved() && r.ok).count();
    let safe = runs
        .iter()
        .filter(|r| r.verdict == RunVerdict::Safe && r.ok)
        .count();
    let unsafe_count = runs
        .iter()
        .filter(|r| r.verdict == RunVerdict::Unsafe && r.ok)
        .count();
    let timeouts = runs
        .iter()
        .filter(|r| r.verdict == RunVerdict::Timeout)
        .count();
    let errors = runs
        .iter()
        .filter(|r| r.verdict == RunVerdict::Error || !r.ok)
        .count();
    let times: Vec<(bool, f64)> = runs
        .iter()
        .map(|r| (r.verdict.solved() && r.ok, r.wall_sec))
        .collect();
    let avg = par2(&times, timeout_sec);
    let mut buckets: BTreeMap<String, BucketStats> = BTreeMap::new();
    for r in &runs {
        let entry = buckets.entry(bucket_key(&r.id)).or_insert(BucketStats {
            total: 0,
            solved: 0,
            timeouts: 0,
            errors: 0,
            par2_avg_sec: 0.0,
        });
        entry.total += 1;
        if r.verdict.solved() && r.ok {
            entry.solved += 1;
        }
        if r.verdict == RunVerdict::Timeout {
            entry.timeouts += 1;
        }
        if r.verdict == RunVerdict::Error || !r.ok {
            entry.errors += 1;
        }
    }
    for (key, stats) in buckets.iter_mut() {
        let times: Vec<(bool, f64)> = runs
            .iter()
            .filter(|r| &bucket_key(&r.id) == key)
            .map(|r| (r.verdict.solved() && r.ok, r.wall_sec))
            .collect();
        stats.par2_avg_sec = par2(&times, timeout_sec);
    }
    BenchReport {
        schema: "metrics_v1".to_string(),
        timeout_sec,
        jobs,
        timing: timing.to_string(),
        par2: Par2 { avg_sec: avg },
        solved,
        safe,
        unsafe_count,
        timeouts,
        errors,
        buckets,
        runs,
    }
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par2_matches_the_definition() {
        let v = par2(&[(true, 100.0), (true, 250.0), (false, 1800.0)], 1800.0);
        assert!((v - 1316.6666666).abs() < 0.01);
        assert_eq!(par2(&[], 1800.0), 0.0);
        assert_eq!(par2(&[(true, 42.0)], 1800.0), 42.0);
        assert_eq!(par2(&[(false, 0.0), (false, 9.0)], 30.0), 60.0);
    }

    #[test]
    fn par2_monotone_under_timeout_conversion() {
        let timeout = 30.0;
        let solved = [(true, 3.0), (true, 12.0), (true, 59.9)];
        let base = par2(&solved, timeout);
        for flip in 0..solved.len() {
            let mut v = solved.to_vec();
            v[flip].0 = false;
            let worse = par2(&v, timeout);
            assert!(worse >= base);
            if solved[flip].1 < 2.0 * timeout {
                assert!(worse > base);
            }
        }
    }

    #[test]
    fn bucket_key_prefix_before_first_digit() {
        assert_eq!(bucket_key("counter4_bad10_en"), "counter");
        assert_eq!(bucket_key("rand12_2_s5"), "rand");
        assert_eq!(bucket_key("9lives"), "other");
        assert_eq!(bucket_key("plain"), "plain");
    }

    fn record(id: &str, verdict: RunVerdict, ok: bool, sec: f64) -> RunRecord {
        RunRecord {
            id: id.into(),
            path: format!("{id}.aag"),
            verdict,
            ok,
            wall_sec: sec,
            exit_code: Some(0),
            gate: None,
            cert_path: None,
            cex_path: None,
            log_path: None,
            counters: BTreeMap::new(),
        }
    }

    #[test]
    fn reaggregation_is_byte_identical() {
        let runs = vec![
            record("a1", RunVerdict::Safe, true, 1.5),
            record("a2", RunVerdict::Timeout, true, 30.0),
            record("b1", RunVerdict::Unsafe, true, 0.25),
            record("b2", RunVerdict::Error, false, 0.0),
        ];
        let report = aggregate(runs, 30.0, 2, "real");
        let text = report.to_json();
        let parsed = BenchReport::from_json(&text).unwrap();
        let again = aggregate(parsed.runs, parsed.timeout_sec, parsed.jobs, &parsed.timing);
        assert_eq!(text, again.to_json());
        assert_eq!(report.solved, 2);
        assert_eq!(report.unsafe_count, 1);
        assert_eq!(report.timeouts, 1);
        assert_eq!(report.errors, 1);
    }
}
