//! The sequential evolution loop: select scope, propose, validate through
//! the hard gates, benchmark, diagnose, and promote or roll back — with
//! full per-round provenance.
//!
//! Promotion is mechanical and consumes only gate-passed reports: a
//! challenger whose gate failed can never become champion, whatever its
//! benchmark numbers claim. The evaluator's ACCEPT/REVERT/RETRY decision
//! is recorded and its MoveSet steers the next round's scope, but it
//! cannot override the gates or the promotion rule.

use crate::agent::{Agent, AgentError, HttpAgent, ProposeResponse, ScriptedAgent};
use crate::cj::{self, PolicyState};
use crate::config::{Mode, RunConfig, SlotManifest};
use crate::patch::{self, AdmissionRules};
use crate::prompt::{assemble_prompt, AgentRole, PromptInputs};
use crate::repo;
use crate::types::{
    BenchSummary, Diagnosis, GateSummary, IterationRecord, MoveSet, Promotion,
};
use mck_bench::{run_suite, BenchReport, SolverCmd, SuiteConfig, TimingMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Repo(#[from] repo::RepoError),
    #[error("agent error: {0}")]
    Agent(#[from] AgentError),
    #[error("champion failed the gate suite before any evolution: {0:?}")]
    ChampionGateFailed(Vec<String>),
    #[error("io error at {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("bench harness failure: {0}")]
    Bench(String),
    #[error("cannot resume: {0}")]
    Resume(String),
}

fn io_err(p: &Path) -> impl FnOnce(std::io::Error) -> EvolveError + '_ {
    move |e| EvolveError::Io(p.to_path_buf(), e)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PersistedState {
    round: usize,
    p_jump: f64,
    history: Vec<f64>,
    sweep_slot: usize,
    sweep_non_improving: usize,
    promotions: usize,
    champion_hash: String,
    moveset: Option<MoveSet>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rounds: usize,
    pub promotions: usize,
    pub champion_hash: String,
    pub champion_par2: f64,
}

pub struct Orchestrator {
    cfg: RunConfig,
    checkout: PathBuf,
    manifest: SlotManifest,
    slots: Vec<String>,
    agent: Box<dyn Agent>,
    policy: PolicyState,
    moveset: Option<MoveSet>,
    sweep_slot: usize,
    sweep_non_improving: usize,
    round: usize,
    promotions: usize,
    champion_hash: String,
    champion_report: BenchReport,
    prov: PathBuf,
    gate_paths: Vec<PathBuf>,
    evolution_paths: Vec<PathBuf>,
}

impl Orchestrator {
    /// Load config, snapshot the baseline, and establish the champion's
    /// gate-passed report (running gate and evolution suites once).
    pub fn new(config_path: &Path, resume: bool) -> Result<Self, EvolveError> {
        let cfg = RunConfig::load(config_path)?;
        let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
        let checkout = base.join(&cfg.checkout);
        let manifest = SlotManifest::load(&base.join(&cfg.slot_manifest))?;
        let slots = manifest.slot_names();
        let prov = base.join(&cfg.provenance_dir);
        std::fs::create_dir_all(&prov).map_err(io_err(&prov))?;
        let gate_paths: Vec<PathBuf> = cfg
            .gate_suite
            .iter()
            .map(|e| base.join(e.path()))
            .collect();
        let evolution_paths: Vec<PathBuf> = cfg
            .evolution_suite
            .iter()
            .map(|e| base.join(e.path()))
            .collect();
        let agent: Box<dyn Agent> = match cfg.agent.kind.as_str() {
            "scripted" => {
                let t = cfg.agent.transcript.clone().ok_or_else(|| {
                    crate::config::ConfigError::Invalid(
                        "scripted agent requires a transcript path".into(),
                    )
                })?;
                Box::new(ScriptedAgent::load(&base.join(t))?)
            }
            "http" => {
                let endpoint = cfg.agent.endpoint.clone().ok_or_else(|| {
                    crate::config::ConfigError::Invalid("http agent requires an endpoint".into())
                })?;
                Box::new(HttpAgent::new(
                    endpoint,
                    cfg.agent.model.clone().unwrap_or_default(),
                    std::time::Duration::from_secs_f64(cfg.agent.timeout_sec),
                ))
            }
            other => {
                return Err(crate::config::ConfigError::Invalid(format!(
                    "unknown agent kind '{other}'"
                ))
                .into())
            }
        };

        let baseline_dir = prov.join("baseline");
        if !baseline_dir.exists() {
            repo::snapshot(&checkout, &cfg.hash_ignore, &baseline_dir)?;
        }

        let mut orch = Orchestrator {
            policy: PolicyState {
                p_jump: cfg.policy.p_jump_init,
                p_min: cfg.policy.p_jump_min,
                p_max: cfg.policy.p_jump_max,
                jump_size: cfg.policy.jump_size,
                weights: cfg.policy.weights,
                history: Vec::new(),
            },
            moveset: None,
            sweep_slot: 0,
            sweep_non_improving: 0,
            round: 0,
            promotions: 0,
            champion_hash: String::new(),
            champion_report: mck_bench::aggregate(vec![], cfg.timeout_sec, cfg.jobs, &cfg.timing),
            agent,
            manifest,
            slots,
            checkout,
            prov,
            gate_paths,
            evolution_paths,
            cfg,
        };

        if resume && orch.prov.join("state.json").exists() {
            orch.resume_state()?;
        } else {
            orch.establish_champion()?;
        }
        Ok(orch)
    }

    fn timing(&self) -> TimingMode {
        if self.cfg.timing == "declared" {
            TimingMode::Declared
        } else {
            TimingMode::Real
        }
    }

    fn solver_cmd(&self) -> SolverCmd {
        let prog = &self.cfg.solver_cmd[0];
        let program = if Path::new(prog).is_absolute() {
            PathBuf::from(prog)
        } else {
            self.checkout.join(prog)
        };
        SolverCmd::with_args(program, self.cfg.solver_cmd[1..].to_vec())
    }

    fn suite_cfg(&self, work: PathBuf) -> SuiteConfig {
        SuiteConfig {
            timeout: std::time::Duration::from_secs_f64(self.cfg.timeout_sec),
            jobs: self.cfg.jobs,
            timing: self.timing(),
            work_dir: work,
        }
    }

    fn gate_pass(report: &BenchReport) -> GateSummary {
        gate_summary(report)
    }

    /// Gate the current checkout and record its evolution-suite report as
    /// the champion baseline.
    fn establish_champion(&mut self) -> Result<(), EvolveError> {
        self.champion_hash = repo::content_hash(&self.checkout, &self.cfg.hash_ignore)?;
        let champ_dir = self.prov.join("champion");
        std::fs::create_dir_all(&champ_dir).map_err(io_err(&champ_dir))?;
        repo::build(
            &self.checkout,
            &self.cfg.build_cmd,
            &champ_dir.join("build.log"),
        )?;
        let gate_report = run_suite(
            &self.solver_cmd(),
            &self.gate_paths,
            &self.suite_cfg(champ_dir.join("gate_work")),
        )
        .map_err(|e| EvolveError::Bench(e.to_string()))?;
        let gate = Self::gate_pass(&gate_report);
        std::fs::write(champ_dir.join("gate.json"), gate_report.to_json())
            .map_err(io_err(&champ_dir))?;
        if !gate.passed {
            return Err(EvolveError::ChampionGateFailed(gate.reasons));
        }
        let report = run_suite(
            &self.solver_cmd(),
            &self.evolution_paths,
            &self.suite_cfg(champ_dir.join("bench_work")),
        )
        .map_err(|e| EvolveError::Bench(e.to_string()))?;
        std::fs::write(champ_dir.join("metrics.json"), report.to_json())
            .map_err(io_err(&champ_dir))?;
        // Immutable copy: champion/metrics.json is overwritten on promotion.
        std::fs::write(self.prov.join("baseline_metrics.json"), report.to_json())
            .map_err(io_err(&self.prov))?;
        repo::snapshot(&self.checkout, &self.cfg.hash_ignore, &self.prov.join("champion_src"))?;
        self.champion_report = report;
        Ok(())
    }

    fn resume_state(&mut self) -> Result<(), EvolveError> {
        let path = self.prov.join("state.json");
        let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
        let state: PersistedState =
            serde_json::from_str(&text).map_err(|e| EvolveError::Resume(e.to_string()))?;
        // Re-sync the checkout to the recorded champion.
        repo::restore(&self.prov.join("champion_src"), &self.checkout, &self.cfg.hash_ignore)?;
        let hash = repo::content_hash(&self.checkout, &self.cfg.hash_ignore)?;
        if hash != state.champion_hash {
            return Err(EvolveError::Resume(format!(
                "champion snapshot hash {hash} does not match recorded {}",
                state.champion_hash
            )));
        }
        let metrics_path = self.prov.join("champion/metrics.json");
        let text = std::fs::read_to_string(&metrics_path).map_err(io_err(&metrics_path))?;
        self.champion_report =
            BenchReport::from_json(&text).map_err(|e| EvolveError::Resume(e.to_string()))?;
        self.round = state.round;
        self.policy.p_jump = state.p_jump;
        self.policy.history = state.history;
        self.sweep_slot = state.sweep_slot;
        self.sweep_non_improving = state.sweep_non_improving;
        self.promotions = state.promotions;
        self.champion_hash = state.champion_hash;
        self.moveset = state.moveset;
        Ok(())
    }

    fn persist_state(&self) -> Result<(), EvolveError> {
        let state = PersistedState {
            round: self.round,
            p_jump: self.policy.p_jump,
            history: self.policy.history.clone(),
            sweep_slot: self.sweep_slot,
            sweep_non_improving: self.sweep_non_improving,
            promotions: self.promotions,
            champion_hash: self.champion_hash.clone(),
            moveset: self.moveset.clone(),
        };
        let path = self.prov.join("state.json");
        let mut text = serde_json::to_string_pretty(&state).expect("serializable");
        text.push('\n');
        std::fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn champion_par2(&self) -> f64 {
        self.champion_report.par2.avg_sec
    }

    pub fn champion_hash(&self) -> &str {
        &self.champion_hash
    }

    /// Run `rounds` iterations, appending provenance after each.
    pub fn run(&mut self, rounds: usize) -> Result<RunSummary, EvolveError> {
        for _ in 0..rounds {
            let record = self.run_iteration()?;
            self.append_record(&record)?;
            self.persist_state()?;
        }
        Ok(RunSummary {
            rounds: self.round,
            promotions: self.promotions,
            champion_hash: self.champion_hash.clone(),
            champion_par2: self.champion_par2(),
        })
    }

    fn append_record(&self, record: &IterationRecord) -> Result<(), EvolveError> {
        use std::io::Write;
        let path = self.prov.join("index.jsonl");
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let line = serde_json::to_string(record).expect("serializable record");
        writeln!(file, "{line}").map_err(io_err(&path))?;
        Ok(())
    }

    /// One full iteration; every outcome (including agent failures and
    /// rejected patches) produces a complete record and leaves the
    /// checkout at the champion.
    pub fn run_iteration(&mut self) -> Result<IterationRecord, EvolveError> {
        self.round += 1;
        let round = self.round;
        let round_dir = self.prov.join(format!("round_{round:03}"));
        std::fs::create_dir_all(&round_dir).map_err(io_err(&round_dir))?;
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.cfg
                .seed
                .wrapping_add((round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
        );

        // (i) Select scope.
        let mode = self.cfg.mode_at(round - 1);
        let (allowed, guidance, p_jump) = match mode {
            Mode::Sweep => {
                let slot = self.slots[self.sweep_slot % self.slots.len()].clone();
                let guidance: Vec<crate::types::Move> = self
                    .moveset
                    .as_ref()
                    .map(|ms| {
                        ms.moves
                            .iter()
                            .filter(|m| m.slot == slot)
                            .cloned()
                            .collect()
                    })
                    .unwrap_or_default();
                (vec![slot], guidance, self.policy.p_jump)
            }
            Mode::CompassJump => {
                let sel = cj::compass_jump(&self.slots, self.moveset.as_ref(), &self.policy, &mut rng);
                self.policy.p_jump = sel.p_jump;
                (sel.allowed, sel.guidance, sel.p_jump)
            }
        };

        let mut record = IterationRecord {
            round,
            mode: mode.as_str().to_string(),
            allowed_slots: allowed.clone(),
            guidance: guidance.clone(),
            p_jump,
            patch_file: None,
            hypothesis_file: None,
            admission_failure: None,
            build_ok: false,
            build_log: None,
            gate: None,
            gate_file: None,
            bench: None,
            metrics_file: None,
            diagnosis: None,
            agent_failure: None,
            promotion: Promotion::Revert,
            champion_hash: self.champion_hash.clone(),
            champion_par2: self.champion_par2(),
        };

        // (ii) Propose.
        let proposal = match self.propose(&round_dir, &allowed, &guidance) {
            Ok(p) => p,
            Err(e) => {
                record.agent_failure = Some(e.to_string());
                self.finish_round(&mut record, None, 0.0);
                return Ok(record);
            }
        };
        let patch_path = round_dir.join("patch.diff");
        std::fs::write(&patch_path, &proposal.patch).map_err(io_err(&patch_path))?;
        record.patch_file = Some(rel_to(&self.prov, &patch_path));
        let hyp_json =
            serde_json::to_string_pretty(&proposal.hypothesis).expect("serializable hypothesis");
        let hyp_path = round_dir.join("Hypothesis.json");
        std::fs::write(&hyp_path, &hyp_json).map_err(io_err(&hyp_path))?;
        record.hypothesis_file = Some(rel_to(&self.prov, &hyp_path));

        // Hypothesis scope and patch admission, before any build.
        if let Err(e) = proposal.hypothesis.validate(&allowed) {
            record.admission_failure = Some(e.to_string());
            return self.reject_before_build(record, &round_dir, &proposal);
        }
        let (max_added_lines, max_files) = AdmissionRules::caps();
        let rules = AdmissionRules {
            max_added_lines,
            max_files,
            allowed_files: self.manifest.allowed_files(&allowed),
            allowed_extensions: self.manifest.allowed_extensions.clone(),
            forbidden_prefixes: self.manifest.forbidden.clone(),
        };
        let stats = match patch::inspect_patch(&proposal.patch) {
            Ok(s) => s,
            Err(e) => {
                record.admission_failure = Some(e.to_string());
                return self.reject_before_build(record, &round_dir, &proposal);
            }
        };
        if let Err(e) = patch::admit(&stats, &rules) {
            record.admission_failure = Some(e.to_string());
            return self.reject_before_build(record, &round_dir, &proposal);
        }

        // (iii) Validate: apply, build, hard gates.
        if let Err(e) = patch::apply_patch(&self.checkout, &proposal.patch) {
            record.admission_failure = Some(format!("apply failed: {e}"));
            return self.reject_before_build(record, &round_dir, &proposal);
        }
        // The fixed-path hypothesis document at the repo root.
        std::fs::write(self.checkout.join("Hypothesis.json"), &hyp_json)
            .map_err(io_err(&self.checkout))?;

        let build_log = round_dir.join("build.log");
        record.build_log = Some(rel_to(&self.prov, &build_log));
        let build_result = repo::build(&self.checkout, &self.cfg.build_cmd, &build_log);
        record.build_ok = build_result.is_ok();
        if build_result.is_err() {
            self.rollback()?;
            let diag = self.diagnose_round(&round_dir, &record, &proposal, None, None, true);
            record.diagnosis = diag;
            let diag = record.diagnosis.clone();
            self.finish_round(&mut record, diag, 0.0);
            return Ok(record);
        }

        let gate_report = run_suite(
            &self.solver_cmd(),
            &self.gate_paths,
            &self.suite_cfg(round_dir.join("gate_work")),
        )
        .map_err(|e| EvolveError::Bench(e.to_string()))?;
        let gate_path = round_dir.join("gate.json");
        std::fs::write(&gate_path, gate_report.to_json()).map_err(io_err(&gate_path))?;
        record.gate_file = Some(rel_to(&self.prov, &gate_path));
        let gate = Self::gate_pass(&gate_report);
        record.gate = Some(gate.clone());
        if !gate.passed {
            self.rollback()?;
            let diag =
                self.diagnose_round(&round_dir, &record, &proposal, Some(&gate_report), None, false);
            record.diagnosis = diag;
            let diag = record.diagnosis.clone();
            self.finish_round(&mut record, diag, 0.0);
            return Ok(record);
        }

        // (iv) Test on the evolution workload.
        let challenger = run_suite(
            &self.solver_cmd(),
            &self.evolution_paths,
            &self.suite_cfg(round_dir.join("bench_work")),
        )
        .map_err(|e| EvolveError::Bench(e.to_string()))?;
        let metrics_path = round_dir.join("metrics.json");
        std::fs::write(&metrics_path, challenger.to_json()).map_err(io_err(&metrics_path))?;
        record.metrics_file = Some(rel_to(&self.prov, &metrics_path));

        let decision = promote(
            &self.champion_report,
            &challenger,
            self.cfg.regression_budget,
            self.cfg.min_par2_improvement_sec,
        )
        .map_err(|e| EvolveError::Bench(e.to_string()))?;
        record.bench = Some(BenchSummary {
            par2_avg_sec: challenger.par2.avg_sec,
            solved: challenger.solved,
            safe: challenger.safe,
            unsafe_count: challenger.unsafe_count,
            timeouts: challenger.timeouts,
            lost: decision.lost.clone(),
        });

        // (v) Diagnose & guide.
        let diag = self.diagnose_round(
            &round_dir,
            &record,
            &proposal,
            Some(&gate_report),
            Some(&challenger),
            false,
        );
        record.diagnosis = diag;

        // Promotion: mechanical, gates first. The evolution report itself
        // must be clean (every run ok) for the challenger to be eligible.
        let eligible = challenger.runs.iter().all(|r| r.ok);
        if eligible && decision.outcome == Promotion::Promote {
            let delta = challenger.par2.avg_sec - self.champion_par2();
            self.champion_report = challenger;
            self.champion_hash = repo::content_hash(&self.checkout, &self.cfg.hash_ignore)?;
            repo::snapshot(
                &self.checkout,
                &self.cfg.hash_ignore,
                &self.prov.join("champion_src"),
            )?;
            std::fs::copy(&metrics_path, self.prov.join("champion/metrics.json"))
                .map_err(io_err(&metrics_path))?;
            let _ = std::fs::remove_file(self.checkout.join("Hypothesis.json"));
            record.promotion = Promotion::Promote;
            self.promotions += 1;
            self.sweep_non_improving = 0;
            record.champion_hash = self.champion_hash.clone();
            record.champion_par2 = self.champion_par2();
            self.policy.history.push(delta);
            self.ingest_moveset(record.diagnosis.as_ref());
            return Ok(record);
        }

        self.rollback()?;
        let diag = record.diagnosis.clone();
            self.finish_round(&mut record, diag, 0.0);
        Ok(record)
    }

    fn rollback(&mut self) -> Result<(), EvolveError> {
        let _ = std::fs::remove_file(self.checkout.join("Hypothesis.json"));
        repo::restore(
            &self.prov.join("champion_src"),
            &self.checkout,
            &self.cfg.hash_ignore,
        )?;
        let hash = repo::content_hash(&self.checkout, &self.cfg.hash_ignore)?;
        if hash != self.champion_hash {
            return Err(repo::RepoError::RollbackMismatch {
                got: hash,
                want: self.champion_hash.clone(),
            }
            .into());
        }
        Ok(())
    }

    /// Non-promoted rounds: update history, sweep bookkeeping, and the
    /// next-round moveset.
    fn finish_round(
        &mut self,
        record: &mut IterationRecord,
        diagnosis: Option<Diagnosis>,
        delta: f64,
    ) {
        self.policy.history.push(delta);
        self.sweep_non_improving += 1;
        if self.sweep_non_improving >= self.cfg.policy.sweep_advance_after {
            self.sweep_slot = (self.sweep_slot + 1) % self.slots.len();
            self.sweep_non_improving = 0;
        }
        record.champion_hash = self.champion_hash.clone();
        record.champion_par2 = self.champion_par2();
        self.ingest_moveset(diagnosis.as_ref());
    }

    fn ingest_moveset(&mut self, diagnosis: Option<&Diagnosis>) {
        if let Some(d) = diagnosis {
            let sanitized = d.moveset.clone().sanitized(&self.slots);
            if !sanitized.is_empty() {
                let ranked = cj::rank_by_score(&sanitized, &self.policy.weights);
                self.moveset = Some(MoveSet { moves: ranked });
            }
        }
    }

    fn reject_before_build(
        &mut self,
        mut record: IterationRecord,
        round_dir: &Path,
        proposal: &ProposeResponse,
    ) -> Result<IterationRecord, EvolveError> {
        // Nothing was applied, but restore defensively so a partial apply
        // can never leak into the champion.
        self.rollback()?;
        let diag = self.diagnose_round(round_dir, &record, proposal, None, None, true);
        record.diagnosis = diag;
        let diag = record.diagnosis.clone();
            self.finish_round(&mut record, diag, 0.0);
        Ok(record)
    }

    fn propose(
        &mut self,
        round_dir: &Path,
        allowed: &[String],
        guidance: &[crate::types::Move],
    ) -> Result<ProposeResponse, AgentError> {
        let inputs = self.programmer_inputs(allowed, guidance);
        let full = assemble_prompt(AgentRole::Programmer, &inputs, &self.cfg.prompt, false)
            .or_else(|_| assemble_prompt(AgentRole::Programmer, &inputs, &self.cfg.prompt, true))
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        let prompt_path = round_dir.join("prompt_programmer.txt");
        let _ = std::fs::write(&prompt_path, &full);
        match self.agent.propose(&full) {
            Ok(p) => Ok(p),
            Err(first) => {
                // One retry with the slim prompt, then the round aborts.
                let slim =
                    assemble_prompt(AgentRole::Programmer, &inputs, &self.cfg.prompt, true)
                        .map_err(|e| AgentError::Transport(e.to_string()))?;
                let _ = std::fs::write(round_dir.join("prompt_programmer_slim.txt"), &slim);
                self.agent.propose(&slim).map_err(|second| {
                    AgentError::Transport(format!("propose failed twice: {first}; then {second}"))
                })
            }
        }
    }

    fn diagnose_round(
        &mut self,
        round_dir: &Path,
        record: &IterationRecord,
        proposal: &ProposeResponse,
        gate_report: Option<&BenchReport>,
        challenger: Option<&BenchReport>,
        fatal_build_error: bool,
    ) -> Option<Diagnosis> {
        let inputs = self.evaluator_inputs(record, proposal, gate_report, challenger);
        let full = assemble_prompt(AgentRole::Evaluator, &inputs, &self.cfg.prompt, false)
            .or_else(|_| assemble_prompt(AgentRole::Evaluator, &inputs, &self.cfg.prompt, true))
            .ok()?;
        let _ = std::fs::write(round_dir.join("prompt_evaluator.txt"), &full);
        let attempt = |agent: &mut Box<dyn Agent>, prompt: &str| -> Result<Diagnosis, AgentError> {
            let d = agent.diagnose(prompt)?;
            d.validate(fatal_build_error)
                .map_err(|e| AgentError::Schema(e.to_string()))?;
            Ok(d)
        };
        let diag = match attempt(&mut self.agent, &full) {
            Ok(d) => Some(d),
            Err(_) => {
                let slim =
                    assemble_prompt(AgentRole::Evaluator, &inputs, &self.cfg.prompt, true).ok()?;
                let _ = std::fs::write(round_dir.join("prompt_evaluator_slim.txt"), &slim);
                attempt(&mut self.agent, &slim).ok()
            }
        };
        if let Some(d) = &diag {
            let path = round_dir.join("diagnosis.json");
            let mut text = serde_json::to_string_pretty(d).expect("serializable diagnosis");
            text.push('\n');
            let _ = std::fs::write(path, text);
        }
        diag
    }

    fn read_kb(&self, slots: &[String]) -> String {
        let Some(dir) = &self.cfg.prompt.kb_dir else {
            return String::new();
        };
        let base = self.prov.parent().unwrap_or(Path::new(".")).join(dir);
        let mut out = String::new();
        for slot in slots {
            let path = base.join(format!("{slot}.md"));
            if let Ok(text) = std::fs::read_to_string(&path) {
                out.push_str(&format!("## {slot}\n{text}\n"));
            }
        }
        out
    }

    fn slot_code(&self, slots: &[String]) -> Vec<(String, String)> {
        self.manifest
            .allowed_files(slots)
            .into_iter()
            .filter_map(|rel| {
                let path = self.checkout.join(&rel);
                std::fs::read_to_string(&path).ok().map(|text| (rel, text))
            })
            .collect()
    }

    fn slow_logs(&self, report: &BenchReport) -> Vec<(String, String)> {
        let mut runs: Vec<_> = report.runs.iter().collect();
        runs.sort_by(|a, b| b.wall_sec.partial_cmp(&a.wall_sec).unwrap());
        runs.iter()
            .filter_map(|r| {
                let path = r.log_path.as_ref()?;
                let text = std::fs::read_to_string(path).ok()?;
                Some((r.id.clone(), text))
            })
            .collect()
    }

    fn programmer_inputs(
        &self,
        allowed: &[String],
        guidance: &[crate::types::Move],
    ) -> PromptInputs {
        PromptInputs {
            slot_focus: allowed.to_vec(),
            guidance: guidance.to_vec(),
            metrics: self.champion_report.to_json(),
            slow_logs: self.slow_logs(&self.champion_report),
            code: self.slot_code(allowed),
            kb: self.read_kb(allowed),
            prev_moves: self.moveset.clone(),
            ..Default::default()
        }
    }

    fn evaluator_inputs(
        &self,
        record: &IterationRecord,
        proposal: &ProposeResponse,
        gate_report: Option<&BenchReport>,
        challenger: Option<&BenchReport>,
    ) -> PromptInputs {
        let mut notes = String::new();
        if let Some(a) = &record.admission_failure {
            notes.push_str(&format!("patch rejected before build: {a}\n"));
        }
        if !record.build_ok {
            notes.push_str("build failed; see build log\n");
        }
        if let Some(g) = &record.gate {
            if !g.passed {
                notes.push_str(&format!("hard gate failed: {:?}\n", g.reasons));
            }
        }
        let build_log = record
            .build_log
            .as_ref()
            .map(|p| self.prov.join(p))
            .and_then(|p| std::fs::read_to_string(p).ok())
            .unwrap_or_default();
        PromptInputs {
            slot_focus: record.allowed_slots.clone(),
            guidance: record.guidance.clone(),
            diff: proposal.patch.clone(),
            metrics: challenger.map(|r| r.to_json()).unwrap_or_default(),
            baseline: self.champion_report.to_json(),
            slow_logs: challenger
                .map(|r| self.slow_logs(r))
                .unwrap_or_else(|| {
                    if build_log.is_empty() {
                        vec![]
                    } else {
                        vec![("build".to_string(), build_log)]
                    }
                }),
            code: vec![],
            kb: self.read_kb(&record.allowed_slots),
            hypothesis: serde_json::to_string_pretty(&proposal.hypothesis).unwrap_or_default(),
            prev_moves: self.moveset.clone(),
            diagnosis: String::new(),
            notes: if let Some(g) = gate_report {
                format!("{notes}\ngate summary: {} runs, {} ok", g.runs.len(),
                        g.runs.iter().filter(|r| r.ok).count())
            } else {
                notes
            },
        }
    }
}

fn rel_to(base: &Path, path: &Path) -> String {
    path.strip_prefix(base)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned()
}

#[derive(Debug, Error, PartialEq)]
pub enum PromoteError {
    #[error("reports cover different suites: champion has {champion:?}, challenger {challenger:?}")]
    SuiteMismatch {
        champion: Vec<String>,
        challenger: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromotionDecision {
    pub outcome: Promotion,
    /// Instances the champion solved cleanly that the challenger lost.
    pub lost: Vec<String>,
}

/// The promotion rule over two gate-passed reports on the same suite:
/// promote iff the challenger strictly improves PAR2 (by more than
/// `min_improvement`), solves at least as many instances, and loses at
/// most `budget` instances the champion solved.
pub fn promote(
    champion: &BenchReport,
    challenger: &BenchReport,
    budget: usize,
    min_improvement: f64,
) -> Result<PromotionDecision, PromoteError> {
    let ids = |r: &BenchReport| -> Vec<String> {
        let mut v: Vec<String> = r.runs.iter().map(|x| x.id.clone()).collect();
        v.sort();
        v
    };
    let (a, b) = (ids(champion), ids(challenger));
    if a != b {
        return Err(PromoteError::SuiteMismatch {
            champion: a,
            challenger: b,
        });
    }
    let lost: Vec<String> = champion
        .runs
        .iter()
        .filter(|r| r.ok && r.verdict.solved())
        .filter(|r| {
            !challenger
                .runs
                .iter()
                .any(|c| c.id == r.id && c.ok && c.verdict.solved())
        })
        .map(|r| r.id.clone())
        .collect();
    let improves = challenger.par2.avg_sec < champion.par2.avg_sec - min_improvement;
    let outcome = if improves && challenger.solved >= champion.solved && lost.len() <= budget {
        Promotion::Promote
    } else {
        Promotion::Revert
    };
    Ok(PromotionDecision { outcome, lost })
}

/// Distill a suite report into the hard-gate verdict: pass iff every run
/// is clean — solved runs have validating artifacts consistent with their
/// exit codes, nothing crashed, no artifact is missing. Timeouts are
/// allowed; they cost PAR2, not soundness.
pub fn gate_summary(report: &BenchReport) -> GateSummary {
    let reasons: Vec<String> = report
        .runs
        .iter()
        .filter(|r| !r.ok)
        .map(|r| {
            format!(
                "{}: {}",
                r.id,
                r.gate
                    .as_ref()
                    .and_then(|g| g.reason.clone())
                    .unwrap_or_else(|| format!("{:?} run not ok", r.verdict))
            )
        })
        .collect();
    GateSummary {
        passed: reasons.is_empty(),
        reasons,
    }
}

/// Run the gate suite against a solver build and judge it. This is the
/// admission check every challenger must clear before its benchmark
/// numbers are considered at all.
pub fn hard_gate(
    solver: &SolverCmd,
    gate_suite: &[PathBuf],
    cfg: &mck_bench::SuiteConfig,
) -> Result<(GateSummary, BenchReport), EvolveError> {
    let report =
        run_suite(solver, gate_suite, cfg).map_err(|e| EvolveError::Bench(e.to_string()))?;
    Ok((gate_summary(&report), report))
}

/// Rebuild a champion checkout from the recorded baseline plus the
/// promoted patch diffs alone; returns the reconstructed content hash.
pub fn reconstruct_champion(
    prov: &Path,
    dest: &Path,
    hash_ignore: &[String],
) -> Result<String, EvolveError> {
    repo::snapshot(&prov.join("baseline"), &[], dest)?;
    let index = prov.join("index.jsonl");
    let text = std::fs::read_to_string(&index).map_err(io_err(&index))?;
    for line in text.lines() {
        let record: IterationRecord =
            serde_json::from_str(line).map_err(|e| EvolveError::Resume(e.to_string()))?;
        if record.promotion == Promotion::Promote {
            let patch_path = prov.join(record.patch_file.as_ref().expect("promoted round has a patch"));
            let diff = std::fs::read_to_string(&patch_path).map_err(io_err(&patch_path))?;
            patch::apply_patch(dest, &diff)
                .map_err(|e| EvolveError::Resume(format!("replaying round {}: {e}", record.round)))?;
        }
    }
    Ok(repo::content_hash(dest, hash_ignore)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use mck_bench::{aggregate, RunRecord, RunVerdict};
    use std::collections::BTreeMap;

    fn record(id: &str, verdict: RunVerdict, ok: bool, sec: f64) -> RunRecord {
        RunRecord {
            id: id.into(),
            path: format!("{id}.aag"),
            verdict,
            ok,
            wall_sec: sec,
            exit_code: None,
            gate: None,
            cert_path: None,
            cex_path: None,
            log_path: None,
            counters: BTreeMap::new(),
        }
    }

    fn report(entries: &[(&str, RunVerdict, bool, f64)]) -> BenchReport {
        aggregate(
            entries
                .iter()
                .map(|(id, v, ok, sec)| record(id, *v, *ok, *sec))
                .collect(),
            100.0,
            1,
            "declared",
        )
    }

    #[test]
    fn identical_reports_revert() {
        let r = report(&[
            ("a", RunVerdict::Safe, true, 10.0),
            ("b", RunVerdict::Unsafe, true, 20.0),
        ]);
        let d = promote(&r, &r.clone(), 1, 0.0).unwrap();
        assert_eq!(d.outcome, Promotion::Revert);
        assert!(d.lost.is_empty());
    }

    #[test]
    fn strict_par2_improvement_with_same_solved_promotes() {
        let champion = report(&[
            ("a", RunVerdict::Safe, true, 100.0),
            ("b", RunVerdict::Unsafe, true, 80.0),
        ]);
        let challenger = report(&[
            ("a", RunVerdict::Safe, true, 50.0),
            ("b", RunVerdict::Unsafe, true, 80.0),
        ]);
        let d = promote(&champion, &challenger, 1, 0.0).unwrap();
        assert_eq!(d.outcome, Promotion::Promote);
    }

    #[test]
    fn losing_more_instances_than_the_budget_reverts() {
        // Challenger is much faster and solves as many instances overall,
        // but drops two the champion solved — over a budget of one.
        let champion = report(&[
            ("a", RunVerdict::Safe, true, 90.0),
            ("b", RunVerdict::Safe, true, 90.0),
            ("c", RunVerdict::Safe, true, 90.0),
            ("d", RunVerdict::Timeout, true, 100.0),
            ("e", RunVerdict::Timeout, true, 100.0),
        ]);
        let challenger = report(&[
            ("a", RunVerdict::Safe, true, 1.0),
            ("b", RunVerdict::Timeout, true, 100.0),
            ("c", RunVerdict::Timeout, true, 100.0),
            ("d", RunVerdict::Safe, true, 1.0),
            ("e", RunVerdict::Unsafe, true, 1.0),
        ]);
        assert!(challenger.par2.avg_sec < champion.par2.avg_sec);
        assert_eq!(challenger.solved, champion.solved);
        let d = promote(&champion, &challenger, 1, 0.0).unwrap();
        assert_eq!(d.outcome, Promotion::Revert);
        assert_eq!(d.lost, vec!["b".to_string(), "c".to_string()]);
        // with budget 2 the same pair promotes
        let d = promote(&champion, &challenger, 2, 0.0).unwrap();
        assert_eq!(d.outcome, Promotion::Promote);
    }

    #[test]
    fn fewer_solved_reverts_even_with_better_par2() {
        let champion = report(&[
            ("a", RunVerdict::Safe, true, 10.0),
            ("b", RunVerdict::Safe, true, 190.0),
        ]);
        // absurdly fast but solves fewer: the solved-count rule wins
        let challenger = report(&[
            ("a", RunVerdict::Safe, true, 0.0),
            ("b", RunVerdict::Error, false, 0.0),
        ]);
        let d = promote(&champion, &challenger, 5, 0.0).unwrap();
        assert_eq!(d.outcome, Promotion::Revert);
    }

    #[test]
    fn suite_mismatch_is_an_error() {
        let a = report(&[("a", RunVerdict::Safe, true, 1.0)]);
        let b = report(&[("x", RunVerdict::Safe, true, 1.0)]);
        assert!(matches!(
            promote(&a, &b, 1, 0.0),
            Err(PromoteError::SuiteMismatch { .. })
        ));
    }

    #[test]
    fn min_improvement_margin_applies() {
        let champion = report(&[("a", RunVerdict::Safe, true, 10.0)]);
        let challenger = report(&[("a", RunVerdict::Safe, true, 9.99)]);
        assert_eq!(
            promote(&champion, &challenger, 1, 0.0).unwrap().outcome,
            Promotion::Promote
        );
        assert_eq!(
            promote(&champion, &challenger, 1, 0.05).unwrap().outcome,
            Promotion::Revert
        );
    }
}
