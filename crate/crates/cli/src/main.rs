//! Single entry binary: `check`, `certify`, `replay`, `bench`, `evolve`.
//!
//! Exit codes: 0 = SAFE (or success), 1 = UNSAFE (or invalid artifact),
//! 2 = timeout, 3 and above = errors. Stdout carries only the RESULT line
//! and `. HYP` counters; everything diagnostic goes to stderr.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use mck_bench::{run_suite, SolverCmd, SuiteConfig, TimingMode};
use mck_core::certify;
use mck_core::ic3::policy::PolicySet;
use mck_core::ic3::{check, CheckOptions, Verdict};
use mck_core::tsys::TransitionSystem;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

const EXIT_SAFE: u8 = 0;
const EXIT_UNSAFE: u8 = 1;
const EXIT_TIMEOUT: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "mck", version, about = "IC3/PDR safety model checker for AIGER circuits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Diagnostic verbosity (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the safety property of an AIGER circuit.
    Check(CheckArgs),
    /// Validate a SAFE certificate against a circuit (exit 0 = valid).
    Certify { aig: PathBuf, cert: PathBuf },
    /// Replay an UNSAFE witness against a circuit (exit 0 = valid).
    Replay { aig: PathBuf, cex: PathBuf },
    /// Run a suite of instances under a timeout and write metrics JSON.
    Bench(BenchArgs),
    /// Run the offline evolution loop from a run config.
    Evolve(EvolveArgs),
}

#[derive(Args)]
struct CheckArgs {
    aig: PathBuf,
    /// Wall-clock timeout in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Heuristic policy override, slot=variant[,key=value...]; repeatable.
    #[arg(long = "policy")]
    policies: Vec<String>,
    /// Write the .cert/.cex artifact next to the input (or into --out-dir).
    #[arg(long)]
    emit_artifacts: bool,
    /// Artifact output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// RNG seed; 'random' draws one from the OS.
    #[arg(long, default_value = "451")]
    seed: String,
    /// Property index when the circuit has several outputs/bads.
    #[arg(long, default_value_t = 0)]
    property: usize,
    /// Abort after this many SAT calls.
    #[arg(long)]
    max_sat_calls: Option<u64>,
    /// Dump the solver clause database as DIMACS after the run.
    #[arg(long)]
    dump_dimacs: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .aag/.aig files, or a list file with one path per line.
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    timeout: f64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Metrics JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Solver binary to benchmark; defaults to this executable.
    #[arg(long)]
    solver: Option<PathBuf>,
    /// Extra argument prepended to the solver invocation; repeatable.
    #[arg(long = "solver-arg")]
    solver_args: Vec<String>,
    /// 'real' wall-clock timing or 'declared' (hermetic replays).
    #[arg(long, default_value = "real")]
    timing: String,
    /// Scratch directory for per-run artifacts and logs.
    #[arg(long)]
    work_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    rounds: usize,
    /// Continue a previous run from its persisted state.
    #[arg(long)]
    resume: bool,
}

fn main() -> ExitCode {
    // Die quietly on closed pipes (stdout is routinely piped to head/grep).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors exit >= 3; --help/--version exit 0.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_ERROR);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Check(args) => cmd_check(args, cli.verbose),
        Cmd::Certify { aig, cert } => cmd_certify(&aig, &cert),
        Cmd::Replay { aig, cex } => cmd_replay(&aig, &cex),
        Cmd::Bench(args) => cmd_bench(args),
        Cmd::Evolve(args) => cmd_evolve(args),
    }
}

fn load_system(path: &Path, property: usize) -> Result<TransitionSystem> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let circuit = mck_core::AigerCircuit::parse(&bytes)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(TransitionSystem::new(circuit, property)?)
}

fn cmd_check(args: CheckArgs, verbose: u8) -> Result<u8> {
    let ts = load_system(&args.aig, args.property)?;
    let seed = match args.seed.as_str() {
        "random" => rand::random::<u64>(),
        s => s
            .parse::<u64>()
            .map_err(|_| anyhow!("--seed takes a number or 'random'"))?,
    };
    let opts = CheckOptions {
        timeout: args.timeout.map(Duration::from_secs_f64),
        policies: PolicySet::from_specs(&args.policies)?,
        seed,
        max_sat_calls: args.max_sat_calls,
        dimacs_dump: args.dump_dimacs.clone(),
        ..Default::default()
    };
    let result = check(&ts, &opts)?;
    if verbose > 0 {
        eprintln!("verdict: {}", result.verdict.name());
        eprintln!(
            "push success rate (last round): {:.3}",
            result.heuristics.push_success_rate
        );
    }
    let stem = args
        .aig
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let out_dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| args.aig.parent().unwrap_or(Path::new(".")).to_path_buf());
    let code = match &result.verdict {
        Verdict::Safe(cert) => {
            if args.emit_artifacts {
                std::fs::create_dir_all(&out_dir)?;
                let path = out_dir.join(format!("{stem}.cert"));
                std::fs::write(&path, cert.to_text())
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("certificate written to {}", path.display());
            }
            EXIT_SAFE
        }
        Verdict::Unsafe(w) => {
            if args.emit_artifacts {
                std::fs::create_dir_all(&out_dir)?;
                let path = out_dir.join(format!("{stem}.cex"));
                std::fs::write(&path, w.to_text())
                    .with_context(|| format!("writing {}", path.display()))?;
                eprintln!("witness written to {}", path.display());
            }
            EXIT_UNSAFE
        }
        Verdict::Timeout => EXIT_TIMEOUT,
    };
    // Stdout contract: the RESULT line plus one-line HYP counters.
    println!("RESULT: {}", result.verdict.name());
    for (key, value) in &result.counters {
        println!(". HYP {key}: {value}");
    }
    Ok(code)
}

fn cmd_certify(aig: &Path, cert_path: &Path) -> Result<u8> {
    let ts = load_system(aig, 0)?;
    let text = std::fs::read_to_string(cert_path)
        .with_context(|| format!("reading {}", cert_path.display()))?;
    let cert = match certify::Certificate::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid certificate file: {e}");
            return Ok(EXIT_UNSAFE);
        }
    };
    match certify::check_certificate(&ts, &cert) {
        Ok(()) => {
            eprintln!("certificate valid ({} clauses)", cert.len());
            Ok(EXIT_SAFE)
        }
        Err(e) => {
            eprintln!("certificate rejected: {e}");
            Ok(EXIT_UNSAFE)
        }
    }
}

fn cmd_replay(aig: &Path, cex_path: &Path) -> Result<u8> {
    let ts = load_system(aig, 0)?;
    let text = std::fs::read_to_string(cex_path)
        .with_context(|| format!("reading {}", cex_path.display()))?;
    let witness = match certify::Witness::parse(&text) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("invalid witness file: {e}");
            return Ok(EXIT_UNSAFE);
        }
    };
    match certify::replay_witness(&ts, &witness) {
        Ok(step) => {
            eprintln!("witness valid, bad raised at step {step}");
            Ok(EXIT_SAFE)
        }
        Err(e) => {
            eprintln!("witness rejected: {e}");
            Ok(EXIT_UNSAFE)
        }
    }
}

fn collect_suite(suite: &Path) -> Result<Vec<PathBuf>> {
    if suite.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(suite)
            .with_context(|| format!("reading {}", suite.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("aag") | Some("aig")
                )
            })
            .collect();
        paths.sort();
        Ok(paths)
    } else {
        let text = std::fs::read_to_string(suite)
            .with_context(|| format!("reading {}", suite.display()))?;
        let base = suite.parent().unwrap_or(Path::new("."));
        Ok(text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect())
    }
}

fn cmd_bench(args: BenchArgs) -> Result<u8> {
    let instances = collect_suite(&args.suite)?;
    if args.timeout <= 0.0 {
        return Err(anyhow!("--timeout must be positive"));
    }
    let solver = match &args.solver {
        Some(p) => SolverCmd::with_args(p.clone(), args.solver_args.clone()),
        None => SolverCmd::with_args(std::env::current_exe()?, args.solver_args.clone()),
    };
    let timing = match args.timing.as_str() {
        "real" => TimingMode::Real,
        "declared" => TimingMode::Declared,
        other => return Err(anyhow!("--timing must be 'real' or 'declared', got '{other}'")),
    };
    let work_dir = args.work_dir.clone().unwrap_or_else(|| {
        let mut p = args.out.clone();
        p.set_extension("work");
        p
    });
    let cfg = SuiteConfig {
        timeout: Duration::from_secs_f64(args.timeout),
        jobs: args.jobs,
        timing,
        work_dir,
    };
    let report = run_suite(&solver, &instances, &cfg)?;
    if let Some(parent) = args.out.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&args.out, report.to_json())
        .with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!(
        "{} instances: {} solved ({} safe, {} unsafe), {} timeouts, {} errors; PAR2 {:.2}s",
        report.runs.len(),
        report.solved,
        report.safe,
        report.unsafe_count,
        report.timeouts,
        report.errors,
        report.par2.avg_sec
    );
    Ok(EXIT_SAFE)
}

fn cmd_evolve(args: EvolveArgs) -> Result<u8> {
    let mut orch = mck_evolve::Orchestrator::new(&args.config, args.resume)?;
    let summary = orch.run(args.rounds)?;
    eprintln!(
        "completed {} rounds, {} promotions; champion PAR2 {:.3}s, hash {}",
        summary.rounds, summary.promotions, summary.champion_par2, summary.champion_hash
    );
    Ok(EXIT_SAFE)
}
