//! Budgeted prompt assembly.
//!
//! Sections are attached in a fixed order — core fields (slot focus, diff
//! summary, key metrics), local code snippets, logs of the slowest cases,
//! then slot-relevant knowledge-base snippets — each under its own length
//! cap. When the result would still exceed the total budget (or the agent
//! failed to answer), the slim variant drops the KB section and shortens
//! logs, metrics, and the move list.

use crate::config::PromptConfig;
use crate::types::{Move, MoveSet};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("prompt exceeds budget even in slim form: total {total} > {budget}; sections: {sections:?}")]
pub struct PromptOverflow {
    pub total: usize,
    pub budget: usize,
    pub sections: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentRole {
    Programmer,
    Evaluator,
}

#[derive(Debug, Default, Clone)]
pub struct PromptInputs {
    pub slot_focus: Vec<String>,
    pub guidance: Vec<Move>,
    pub diff: String,
    pub metrics: String,
    pub baseline: String,
    /// (case id, log text), pre-sorted slowest first.
    pub slow_logs: Vec<(String, String)>,
    /// (path, text) of slot-relevant source files.
    pub code: Vec<(String, String)>,
    pub kb: String,
    pub hypothesis: String,
    pub prev_moves: Option<MoveSet>,
    pub diagnosis: String,
    pub notes: String,
}

fn clip_chars(s: &str, cap: usize) -> (String, bool) {
    if s.len() <= cap {
        return (s.to_string(), false);
    }
    let mut end = cap;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    (format!("{}\n[...truncated]", &s[..end]), true)
}

fn clip_lines_chars(s: &str, max_lines: usize, max_chars: usize) -> String {
    let taken: Vec<&str> = s.lines().take(max_lines).collect();
    let joined = taken.join("\n");
    clip_chars(&joined, max_chars).0
}

fn preamble(role: AgentRole) -> &'static str {
    match role {
        AgentRole::Programmer => {
            "ROLE: programmer\n\
             Propose one minimal heuristic or instrumentation change inside the slot focus.\n\
             Constraints: at most 80 added lines across at most 3 files; touch only the listed slot files;\n\
             keep the exit-code contract (0 = SAFE, 1 = UNSAFE) and artifact emission intact.\n\
             Respond with a JSON object {\"patch\": <unified diff>, \"hypothesis\": <hypothesis_v1>}.\n\
             The hypothesis must declare primary_slot and a fallback plan.\n"
        }
        AgentRole::Evaluator => {
            "ROLE: evaluator\n\
             Given the diff, logs and metrics below, decide ACCEPT, REVERT, or RETRY.\n\
             Treat runs[*].ok as the pass/fail truth; PAR2 (lower is better) is the primary signal.\n\
             REVERT on any build, witness, or consistency failure. RETRY when the patch looks inert.\n\
             Respond with one diagnosis_v1 JSON object carrying 3-6 numeric reasons and a ranked\n\
             moveset of (slot, direction, conf, risk, cost) entries for the next round.\n"
        }
    }
}

/// Assemble the prompt. `slim` omits the KB and tightens every cap.
pub fn assemble_prompt(
    role: AgentRole,
    inputs: &PromptInputs,
    cfg: &PromptConfig,
    slim: bool,
) -> Result<String, PromptOverflow> {
    let (code_cap, log_lines, log_chars, metrics_cap, moves_cap) = if slim {
        (cfg.code_chars / 4, cfg.log_lines / 4, cfg.log_chars / 4, 800, 3)
    } else {
        (cfg.code_chars, cfg.log_lines, cfg.log_chars, 4000, 16)
    };
    let mut sections: Vec<(String, String)> = Vec::new();

    // 1. core fields
    let mut core = String::new();
    core.push_str(preamble(role));
    writeln!(core, "SLOT_FOCUS: {}", inputs.slot_focus.join(", ")).unwrap();
    if !inputs.guidance.is_empty() {
        core.push_str("GUIDANCE:\n");
        for m in inputs.guidance.iter().take(moves_cap) {
            writeln!(
                core,
                "- slot={} conf={:.2} risk={:.2} cost={:.2} :: {}",
                m.slot, m.conf, m.risk, m.cost, m.direction
            )
            .unwrap();
        }
    }
    if !inputs.diff.is_empty() {
        let (d, _) = clip_chars(&inputs.diff, code_cap);
        writeln!(core, "DIFF:\n{d}").unwrap();
    }
    if !inputs.metrics.is_empty() {
        let (m, _) = clip_chars(&inputs.metrics, metrics_cap);
        writeln!(core, "METRICS:\n{m}").unwrap();
    }
    if !inputs.baseline.is_empty() {
        let (b, _) = clip_chars(&inputs.baseline, metrics_cap);
        writeln!(core, "BASELINE:\n{b}").unwrap();
    }
    if !inputs.hypothesis.is_empty() {
        let (h, _) = clip_chars(&inputs.hypothesis, 1200);
        writeln!(core, "HYPOTHESIS:\n{h}").unwrap();
    }
    if !inputs.diagnosis.is_empty() {
        let (d, _) = clip_chars(&inputs.diagnosis, 1600);
        writeln!(core, "LATEST_DIAGNOSIS:\n{d}").unwrap();
    }
    if let Some(ms) = &inputs.prev_moves {
        core.push_str("PREV_MOVES:\n");
        for m in ms.moves.iter().take(moves_cap) {
            writeln!(
                core,
                "- slot={} conf={:.2} risk={:.2} cost={:.2} :: {}",
                m.slot, m.conf, m.risk, m.cost, m.direction
            )
            .unwrap();
        }
    }
    if !inputs.notes.is_empty() {
        let (n, _) = clip_chars(&inputs.notes, 1200);
        writeln!(core, "NOTES:\n{n}").unwrap();
    }
    sections.push(("core".to_string(), core));

    // 2. budgeted code snippets
    if !inputs.code.is_empty() {
        let mut code = String::new();
        let per_file = (code_cap / inputs.code.len()).max(200);
        for (path, text) in &inputs.code {
            let (t, _) = clip_chars(text, per_file);
            writeln!(code, "FILE {path}:\n{t}").unwrap();
        }
        let (clipped, _) = clip_chars(&code, code_cap);
        sections.push(("code".to_string(), format!("CODE:\n{clipped}")));
    }

    // 3. logs of the slowest top-k% cases
    if !inputs.slow_logs.is_empty() {
        let k = ((inputs.slow_logs.len() * cfg.top_k_percent).div_ceil(100)).max(1);
        let mut logs = String::new();
        for (id, text) in inputs.slow_logs.iter().take(k) {
            writeln!(
                logs,
                "CASE {id}:\n{}",
                clip_lines_chars(text, log_lines, log_chars / k)
            )
            .unwrap();
        }
        let (clipped, _) = clip_chars(&logs, log_chars);
        sections.push(("logs".to_string(), format!("LOGS:\n{clipped}")));
    }

    // 4. slot-relevant knowledge base, dropped entirely in slim mode
    if !slim && !inputs.kb.is_empty() {
        let (kb, _) = clip_chars(&inputs.kb, cfg.kb_chars);
        sections.push(("kb".to_string(), format!("KB:\n{kb}")));
    }

    let prompt: String = sections
        .iter()
        .map(|(_, body)| body.as_str())
        .collect::<Vec<_>>()
        .join("\n");
    if prompt.len() > cfg.total_chars {
        return Err(PromptOverflow {
            total: prompt.len(),
            budget: cfg.total_chars,
            sections: sections.iter().map(|(n, b)| (n.clone(), b.len())).collect(),
        });
    }
    Ok(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs() -> PromptInputs {
        PromptInputs {
            slot_focus: vec!["push_prop".into()],
            diff: "--- a/x\n+++ b/x\n".into(),
            metrics: "{\"par2\":{\"avg_sec\":1.0}}".into(),
            slow_logs: vec![
                ("slow1".into(), "l1\nl2\nl3".into()),
                ("fast".into(), "quick".into()),
            ],
            code: vec![("push.rs".into(), "fn push() {}".into())],
            kb: "push scheduling notes".into(),
            ..Default::default()
        }
    }

    #[test]
    fn all_sections_present_under_budget() {
        let cfg = PromptConfig::default();
        let p = assemble_prompt(AgentRole::Programmer, &inputs(), &cfg, false).unwrap();
        for needle in ["SLOT_FOCUS:", "DIFF:", "METRICS:", "CODE:", "LOGS:", "KB:"] {
            assert!(p.contains(needle), "missing {needle}");
        }
        // top-10% of 2 logs rounds up to 1 case: only the slowest appears
        assert!(p.contains("CASE slow1"));
        assert!(!p.contains("CASE fast"));
    }

    #[test]
    fn oversized_kb_is_truncated_with_marker() {
        let mut inp = inputs();
        let cfg = PromptConfig {
            kb_chars: 100,
            ..Default::default()
        };
        inp.kb = "x".repeat(1000);
        let p = assemble_prompt(AgentRole::Evaluator, &inp, &cfg, false).unwrap();
        assert!(p.contains("[...truncated]"));
        let kb_section = p.split("KB:\n").nth(1).unwrap();
        assert!(kb_section.len() < 200);
    }

    #[test]
    fn slim_prompt_has_no_kb_section() {
        let cfg = PromptConfig::default();
        let p = assemble_prompt(AgentRole::Programmer, &inputs(), &cfg, true).unwrap();
        assert!(!p.contains("KB:"));
    }

    #[test]
    fn hard_overflow_reports_section_sizes() {
        let mut inp = inputs();
        inp.metrics = "m".repeat(5000);
        let cfg = PromptConfig {
            total_chars: 600,
            ..Default::default()
        };
        let err = assemble_prompt(AgentRole::Evaluator, &inp, &cfg, true).unwrap_err();
        assert!(err.total > err.budget);
        assert!(err.sections.iter().any(|(n, _)| n == "core"));
    }
}
