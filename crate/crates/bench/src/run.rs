//! Child-process execution with wall-clock enforcement and artifact gating.
//!
//! Solver contract: the harness invokes
//! `<program> [prepend-args...] check <instance> --timeout <secs>
//! --emit-artifacts --out-dir <run-dir>` and expects exit code 0 for SAFE
//! (with `<stem>.cert` in the run dir), 1 for UNSAFE (with `<stem>.cex`),
//! 2 for timeout, anything else for errors. Stdout carries the
//! `RESULT: <verdict>` line and `. HYP <key>: <value>` counters.

use crate::report::{aggregate, BenchReport, GateOutcome, RunRecord, RunVerdict};
use mck_core::certify;
use mck_core::tsys::TransitionSystem;
use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::time::{Duration, Instant};

/// Extra wall time allowed past the nominal timeout before the child is
/// killed; covers the solver's own timeout bookkeeping.
const KILL_GRACE: Duration = Duration::from_secs(2);

#[derive(Debug, Clone)]
pub struct SolverCmd {
    pub program: PathBuf,
    /// Appended after the standard contract arguments (policy overrides
    /// and similar solver options).
    pub extra_args: Vec<String>,
}

impl SolverCmd {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        SolverCmd {
            program: program.into(),
            extra_args: Vec::new(),
        }
    }

    pub fn with_args(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        SolverCmd {
            program: program.into(),
            extra_args: args,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimingMode {
    /// Record measured wall-clock time.
    Real,
    /// Record the child's `declared_ms` counter when present (hermetic
    /// replay runs); falls back to measured time.
    Declared,
}

impl TimingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TimingMode::Real => "real",
            TimingMode::Declared => "declared",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub timeout: Duration,
    pub jobs: usize,
    pub timing: TimingMode,
    /// Per-run artifact/log directories are created under here.
    pub work_dir: PathBuf,
}

/// Run every instance, gate solved runs through the independent checks,
/// and aggregate. Instance order is preserved in the report regardless of
/// scheduling. Individual failures (bad instance, crashing child) become
/// failed records, never harness errors.
pub fn run_suite(
    solver: &SolverCmd,
    instances: &[PathBuf],
    cfg: &SuiteConfig,
) -> std::io::Result<BenchReport> {
    std::fs::create_dir_all(&cfg.work_dir)?;
    let jobs = cfg.jobs.max(1);
    let (tx, rx) = mpsc::channel::<(usize, RunRecord)>();
    let next = std::sync::atomic::AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(instances.len().max(1)) {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if i >= instances.len() {
                    break;
                }
                let record = run_one(solver, &instances[i], cfg);
                if tx.send((i, record)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
    });
    let mut indexed: Vec<(usize, RunRecord)> = rx.into_iter().collect();
    indexed.sort_by_key(|(i, _)| *i);
    let runs = indexed.into_iter().map(|(_, r)| r).collect();
    Ok(aggregate(
        runs,
        cfg.timeout.as_secs_f64(),
        jobs,
        cfg.timing.as_str(),
    ))
}

fn instance_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string())
}

/// Execute one instance in a child process.
pub fn run_one(solver: &SolverCmd, instance: &Path, cfg: &SuiteConfig) -> RunRecord {
    let id = instance_stem(instance);
    let run_dir = cfg.work_dir.join(&id);
    let mut record = RunRecord {
        id: id.clone(),
        path: instance.display().to_string(),
        verdict: RunVerdict::Error,
        ok: false,
        wall_sec: 0.0,
        exit_code: None,
        gate: None,
        cert_path: None,
        cex_path: None,
        log_path: None,
        counters: BTreeMap::new(),
    };
    if std::fs::create_dir_all(&run_dir).is_err() {
        return record;
    }

    // Parse the instance up front: the gate validates artifacts against
    // the same netlist the solver saw; parse failures are per-run errors.
    let ts = match std::fs::read(instance)
        .map_err(|e| e.to_string())
        .and_then(|bytes| {
            mck_core::AigerCircuit::parse(&bytes).map_err(|e| e.to_string())
        })
        .and_then(|c| TransitionSystem::new(c, 0).map_err(|e| e.to_string()))
    {
        Ok(ts) => ts,
        Err(e) => {
            let _ = std::fs::write(run_dir.join("run.log"), format!("parse failure: {e}\n"));
            record.log_path = Some(run_dir.join("run.log").display().to_string());
            return record;
        }
    };

    let mut cmd = Command::new(&solver.program);
    cmd.arg("check")
        .arg(instance)
        .arg("--timeout")
        .arg(format!("{}", cfg.timeout.as_secs_f64()))
        .arg("--emit-artifacts")
        .arg("--out-dir")
        .arg(&run_dir)
        .args(&solver.extra_args)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    // Own process group so a timeout kill takes the whole child tree with
    // it (otherwise grandchildren keep the pipes open).
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        cmd.process_group(0);
    }

    let start = Instant::now();
    let child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => {
            let _ = std::fs::write(run_dir.join("run.log"), format!("spawn failure: {e}\n"));
            record.log_path = Some(run_dir.join("run.log").display().to_string());
            return record;
        }
    };
    let (status, stdout, stderr, killed) = supervise(child, cfg.timeout + KILL_GRACE);
    let elapsed = start.elapsed().as_secs_f64();

    let stdout_text = String::from_utf8_lossy(&stdout).into_owned();
    let stderr_text = String::from_utf8_lossy(&stderr).into_owned();
    let log_path = run_dir.join("run.log");
    let _ = std::fs::write(
        &log_path,
        format!("--- stdout ---\n{stdout_text}\n--- stderr ---\n{stderr_text}\n"),
    );
    record.log_path = Some(log_path.display().to_string());

    let mut result_line = None;
    for line in stdout_text.lines() {
        if let Some(rest) = line.strip_prefix("RESULT: ") {
            result_line = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix(". HYP ") {
            if let Some((key, value)) = rest.split_once(':') {
                if let Ok(v) = value.trim().parse::<u64>() {
                    record.counters.insert(key.trim().to_string(), v);
                }
            }
        }
    }

    record.exit_code = status;
    record.verdict = match (killed, status) {
        (true, _) => RunVerdict::Timeout,
        (false, Some(0)) => RunVerdict::Safe,
        (false, Some(1)) => RunVerdict::Unsafe,
        (false, Some(2)) => RunVerdict::Timeout,
        _ => RunVerdict::Error,
    };
    record.wall_sec = match cfg.timing {
        TimingMode::Real => elapsed,
        TimingMode::Declared => record
            .counters
            .get("declared_ms")
            .map(|&ms| ms as f64 / 1000.0)
            .unwrap_or(elapsed),
    };

    // Verdict line/exit code consistency.
    if let Some(line) = &result_line {
        let consistent = matches!(
            (record.verdict, line.as_str()),
            (RunVerdict::Safe, "SAFE")
                | (RunVerdict::Unsafe, "UNSAFE")
                | (RunVerdict::Timeout, "TIMEOUT")
        );
        if !consistent && record.verdict != RunVerdict::Error {
            record.ok = false;
            record.gate = Some(GateOutcome {
                passed: false,
                reason: Some(format!(
                    "exit code says {:?} but stdout says {line}",
                    record.verdict
                )),
            });
            record.verdict = RunVerdict::Error;
            return record;
        }
    }

    match record.verdict {
        RunVerdict::Timeout => {
            record.ok = true;
            // A solved verdict must fit inside the timeout.
        }
        RunVerdict::Error => {
            record.ok = false;
        }
        RunVerdict::Safe => {
            let cert_path = run_dir.join(format!("{id}.cert"));
            record.cert_path = Some(cert_path.display().to_string());
            let gate = gate_certificate(&ts, &cert_path);
            record.ok = gate.passed;
            record.gate = Some(gate);
        }
        RunVerdict::Unsafe => {
            let cex_path = run_dir.join(format!("{id}.cex"));
            record.cex_path = Some(cex_path.display().to_string());
            let gate = gate_witness(&ts, &cex_path);
            record.ok = gate.passed;
            record.gate = Some(gate);
        }
    }
    if record.verdict.solved() && record.wall_sec > cfg.timeout.as_secs_f64() {
        record.ok = false;
        record.gate = Some(GateOutcome {
            passed: false,
            reason: Some("solved verdict reported after the timeout budget".to_string()),
        });
    }
    record
}

fn gate_certificate(ts: &TransitionSystem, path: &Path) -> GateOutcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(_) => {
            return GateOutcome {
                passed: false,
                reason: Some("missing certificate artifact".to_string()),
            }
        }
    };
    let cert = match certify::Certificate::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            return GateOutcome {
                passed: false,
                reason: Some(format!("certificate parse: {e}")),
            }
        }
    };
    match certify::check_certificate(ts, &cert) {
        Ok(()) => GateOutcome {
            passed: true,
            reason: None,
        },
        Err(e) => GateOutcome {
            passed: false,
            reason: Some(format!("certificate check: {e}")),
        },
    }
}

fn gate_witness(ts: &TransitionSystem, path: &Path) -> GateOutcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(_) => {
            return GateOutcome {
                passed: false,
                reason: Some("missing witness artifact".to_string()),
            }
        }
    };
    let witness = match certify::Witness::parse(&text) {
        Ok(w) => w,
        Err(e) => {
            return GateOutcome {
                passed: false,
                reason: Some(format!("witness parse: {e}")),
            }
        }
    };
    match certify::replay_witness(ts, &witness) {
        Ok(_) => GateOutcome {
            passed: true,
            reason: None,
        },
        Err(e) => GateOutcome {
            passed: false,
            reason: Some(format!("witness replay: {e}")),
        },
    }
}

/// Wait for the child with a hard deadline; returns (exit code, stdout,
/// stderr, killed). Reader threads drain the pipes to avoid deadlock.
fn supervise(mut child: Child, limit: Duration) -> (Option<i32>, Vec<u8>, Vec<u8>, bool) {
    let mut stdout_pipe = child.stdout.take();
    let mut stderr_pipe = child.stderr.take();
    let out_handle = std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(p) = stdout_pipe.as_mut() {
            let _ = p.read_to_end(&mut buf);
        }
        buf
    });
    let err_handle = std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(p) = stderr_pipe.as_mut() {
            let _ = p.read_to_end(&mut buf);
        }
        buf
    });
    let start = Instant::now();
    let mut killed = false;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status.code(),
            Ok(None) => {
                if start.elapsed() > limit {
                    kill_tree(&mut child);
                    killed = true;
                    break child.wait().ok().and_then(|s| s.code());
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(_) => break None,
        }
    };
    let stdout = out_handle.join().unwrap_or_default();
    let stderr = err_handle.join().unwrap_or_default();
    (status, stdout, stderr, killed)
}

#[cfg(unix)]
fn kill_tree(child: &mut Child) {
    // The child was spawned as its own process group leader.
    unsafe {
        libc::kill(-(child.id() as i32), libc::SIGKILL);
    }
    let _ = child.kill();
}

#[cfg(not(unix))]
fn kill_tree(child: &mut Child) {
    let _ = child.kill();
}
