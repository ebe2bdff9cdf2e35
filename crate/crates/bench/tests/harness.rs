//! Harness behavior against a scriptable mock solver that serves canned
//! (but genuine) artifacts.

use mck_bench::{run_suite, RunVerdict, SolverCmd, SuiteConfig, TimingMode};
use mck_core::ic3::{check, CheckOptions, Verdict};
use mck_core::tsys::TransitionSystem;
use mck_testgen::gen;
use std::collections::BTreeMap;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::time::Duration;

const MOCK_SOLVER: &str = r#"#!/bin/sh
# mock solver honoring the bench check contract
dir=$(dirname "$0")
shift # "check"
inst="$1"; shift
out=""
while [ $# -gt 0 ]; do
  case "$1" in
    --out-dir) out="$2"; shift 2 ;;
    *) shift ;;
  esac
done
stem=$(basename "$inst"); stem=${stem%.*}
verdict=ERROR; exit_code=3; sleep_sec=""; artifact=""; ext=""; declared_ms=""
. "$dir/profile/$stem"
[ -n "$sleep_sec" ] && sleep "$sleep_sec"
[ -n "$artifact" ] && cp "$artifact" "$out/$stem.$ext"
echo "RESULT: $verdict"
[ -n "$declared_ms" ] && echo ". HYP declared_ms: $declared_ms"
exit $exit_code
"#;

struct Mock {
    dir: PathBuf,
}

impl Mock {
    fn new(dir: &Path) -> Self {
        let solver = dir.join("solver.sh");
        std::fs::write(&solver, MOCK_SOLVER).unwrap();
        std::fs::set_permissions(&solver, std::fs::Permissions::from_mode(0o755)).unwrap();
        std::fs::create_dir_all(dir.join("profile")).unwrap();
        std::fs::create_dir_all(dir.join("artifacts")).unwrap();
        Mock {
            dir: dir.to_path_buf(),
        }
    }

    fn cmd(&self) -> SolverCmd {
        SolverCmd::new(self.dir.join("solver.sh"))
    }

    fn profile(&self, stem: &str, entries: &BTreeMap<&str, String>) {
        let text: String = entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        std::fs::write(self.dir.join("profile").join(stem), text).unwrap();
    }
}

/// Write an instance and a genuine artifact computed by the real checker.
fn prepare_instance(
    mock: &Mock,
    suite_dir: &Path,
    name: &str,
    circuit: mck_core::AigerCircuit,
) -> (PathBuf, &'static str, String) {
    let path = suite_dir.join(format!("{name}.aag"));
    std::fs::write(&path, circuit.to_ascii()).unwrap();
    let ts = TransitionSystem::new(circuit, 0).unwrap();
    let res = check(&ts, &CheckOptions::default()).unwrap();
    let (verdict, ext, text) = match res.verdict {
        Verdict::Safe(cert) => ("SAFE", "cert", cert.to_text()),
        Verdict::Unsafe(w) => ("UNSAFE", "cex", w.to_text()),
        Verdict::Timeout => panic!("trivial instance timed out"),
    };
    let artifact = mock.dir.join("artifacts").join(format!("{name}.{ext}"));
    std::fs::write(&artifact, text).unwrap();
    (artifact, verdict, ext.to_string())
}

fn honest_profile(mock: &Mock, suite: &Path, name: &str, circuit: mck_core::AigerCircuit) -> PathBuf {
    let (artifact, verdict, ext) = prepare_instance(mock, suite, name, circuit);
    let mut p = BTreeMap::new();
    p.insert("verdict", verdict.to_string());
    p.insert(
        "exit_code",
        if verdict == "SAFE" { "0" } else { "1" }.to_string(),
    );
    p.insert("artifact", artifact.display().to_string());
    p.insert("ext", ext);
    mock.profile(name, &p);
    suite.join(format!("{name}.aag"))
}

fn cfg(work: &Path, timeout: f64) -> SuiteConfig {
    SuiteConfig {
        timeout: Duration::from_secs_f64(timeout),
        jobs: 2,
        timing: TimingMode::Real,
        work_dir: work.to_path_buf(),
    }
}

#[test]
fn empty_suite_reports_zero_par2() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let report = run_suite(&mock.cmd(), &[], &cfg(&tmp.path().join("w"), 5.0)).unwrap();
    assert_eq!(report.runs.len(), 0);
    assert_eq!(report.par2.avg_sec, 0.0);
}

#[test]
fn honest_mixed_suite_solves_and_gates_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let instances = vec![
        honest_profile(
            &mock,
            &suite_dir,
            "safe_ring",
            gen::one_hot_ring(4, 0, 2),
        ),
        honest_profile(&mock, &suite_dir, "unsafe_toggle", gen::toggle()),
        honest_profile(
            &mock,
            &suite_dir,
            "safe_lfsr",
            gen::lfsr_zero_bad(4, &[0, 3]),
        ),
    ];
    let report = run_suite(&mock.cmd(), &instances, &cfg(&tmp.path().join("w"), 5.0)).unwrap();
    assert_eq!(report.solved, 3);
    assert_eq!(report.safe, 2);
    assert_eq!(report.unsafe_count, 1);
    assert_eq!(report.timeouts, 0);
    assert!(report.runs.iter().all(|r| r.ok));
    assert!(report
        .runs
        .iter()
        .all(|r| r.gate.as_ref().is_some_and(|g| g.passed)));
}

#[test]
fn always_timeout_stub_scores_twice_the_limit() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let mut instances = Vec::new();
    for name in ["t1", "t2", "t3"] {
        let path = suite_dir.join(format!("{name}.aag"));
        std::fs::write(&path, gen::toggle().to_ascii()).unwrap();
        let mut p = BTreeMap::new();
        p.insert("verdict", "TIMEOUT".to_string());
        p.insert("exit_code", "2".to_string());
        mock.profile(name, &p);
        instances.push(path);
    }
    let timeout = 5.0;
    let report = run_suite(&mock.cmd(), &instances, &cfg(&tmp.path().join("w"), timeout)).unwrap();
    assert_eq!(report.timeouts, 3);
    assert_eq!(report.par2.avg_sec, 2.0 * timeout);
    assert!(report.runs.iter().all(|r| r.ok));
}

#[test]
fn missing_artifact_fails_the_gate() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let path = suite_dir.join("liar.aag");
    std::fs::write(&path, gen::one_hot_ring(4, 0, 2).to_ascii()).unwrap();
    let mut p = BTreeMap::new();
    p.insert("verdict", "SAFE".to_string());
    p.insert("exit_code", "0".to_string());
    mock.profile("liar", &p);
    let report = run_suite(&mock.cmd(), &[path], &cfg(&tmp.path().join("w"), 5.0)).unwrap();
    let run = &report.runs[0];
    assert_eq!(run.verdict, RunVerdict::Safe);
    assert!(!run.ok);
    let gate = run.gate.as_ref().unwrap();
    assert!(!gate.passed);
    assert!(gate.reason.as_ref().unwrap().contains("missing certificate"));
    assert_eq!(report.solved, 0);
}

#[test]
fn stale_artifact_from_another_instance_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    // Genuine certificate for the LFSR, served for the mod-counter.
    let (lfsr_cert, _, _) =
        prepare_instance(&mock, &suite_dir, "donor", gen::lfsr_zero_bad(4, &[0, 3]));
    let victim = suite_dir.join("victim.aag");
    std::fs::write(&victim, gen::mod_counter(4, 6, 11).to_ascii()).unwrap();
    let mut p = BTreeMap::new();
    p.insert("verdict", "SAFE".to_string());
    p.insert("exit_code", "0".to_string());
    p.insert("artifact", lfsr_cert.display().to_string());
    p.insert("ext", "cert".to_string());
    mock.profile("victim", &p);
    let report = run_suite(&mock.cmd(), &[victim], &cfg(&tmp.path().join("w"), 5.0)).unwrap();
    let run = &report.runs[0];
    assert!(!run.ok);
    assert!(run
        .gate
        .as_ref()
        .unwrap()
        .reason
        .as_ref()
        .unwrap()
        .contains("certificate check"));
}

#[test]
fn crashing_child_is_an_isolated_error_record() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let path = suite_dir.join("crash.aag");
    std::fs::write(&path, gen::toggle().to_ascii()).unwrap();
    let mut p = BTreeMap::new();
    p.insert("verdict", "ERROR".to_string());
    p.insert("exit_code", "7".to_string());
    mock.profile("crash", &p);
    let ok_path = honest_profile(&mock, &suite_dir, "fine", gen::toggle());
    let report = run_suite(
        &mock.cmd(),
        &[path, ok_path],
        &cfg(&tmp.path().join("w"), 5.0),
    )
    .unwrap();
    assert_eq!(report.runs.len(), 2);
    assert_eq!(report.runs[0].verdict, RunVerdict::Error);
    assert!(!report.runs[0].ok);
    assert!(report.runs[1].ok);
}

#[test]
fn overrunning_child_is_killed_and_recorded_as_timeout() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let path = suite_dir.join("sleeper.aag");
    std::fs::write(&path, gen::toggle().to_ascii()).unwrap();
    let mut p = BTreeMap::new();
    p.insert("verdict", "SAFE".to_string());
    p.insert("exit_code", "0".to_string());
    p.insert("sleep_sec", "30".to_string());
    mock.profile("sleeper", &p);
    let report = run_suite(&mock.cmd(), &[path], &cfg(&tmp.path().join("w"), 0.1)).unwrap();
    let run = &report.runs[0];
    assert_eq!(run.verdict, RunVerdict::Timeout);
    assert!(run.ok);
    assert!(run.wall_sec < 10.0, "kill happened well before the sleep");
}

#[test]
fn declared_timing_overrides_measured_wall_time() {
    let tmp = tempfile::tempdir().unwrap();
    let mock = Mock::new(tmp.path());
    let suite_dir = tmp.path().join("suite");
    std::fs::create_dir_all(&suite_dir).unwrap();
    let (artifact, _, _) = prepare_instance(&mock, &suite_dir, "timed", gen::toggle());
    let mut p = BTreeMap::new();
    p.insert("verdict", "UNSAFE".to_string());
    p.insert("exit_code", "1".to_string());
    p.insert("artifact", artifact.display().to_string());
    p.insert("ext", "cex".to_string());
    p.insert("declared_ms", "1500".to_string());
    mock.profile("timed", &p);
    let mut config = cfg(&tmp.path().join("w"), 5.0);
    config.timing = TimingMode::Declared;
    let report = run_suite(&mock.cmd(), &[suite_dir.join("timed.aag")], &config).unwrap();
    assert_eq!(report.runs[0].wall_sec, 1.5);
    assert_eq!(report.par2.avg_sec, 1.5);
    assert_eq!(report.timing, "declared");
}
