//! Unified-diff admission and application.
//!
//! A patch is admitted only when every touched file lies inside the round's
//! slot allowlist, respects the extension allowlist and forbidden path
//! prefixes, and stays within the added-line/file caps. Admission happens
//! before any build.

use diffy::Patch;
use std::path::{Component, Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PatchError {
    #[error("empty or unparsable diff: {0}")]
    Unparsable(String),
    #[error("patch touches {got} files, cap is {cap}")]
    TooManyFiles { got: usize, cap: usize },
    #[error("patch adds {got} lines, cap is {cap}")]
    TooManyAddedLines { got: usize, cap: usize },
    #[error("file '{0}' is outside the allowed slot files")]
    OutsideSlots(String),
    #[error("file '{0}' is in a forbidden directory")]
    Forbidden(String),
    #[error("file '{0}' has a disallowed extension")]
    BadExtension(String),
    #[error("file '{0}' escapes the checkout")]
    Escapes(String),
    #[error("cannot apply hunk to '{file}': {msg}")]
    ApplyFailed { file: String, msg: String },
    #[error("io error on '{file}': {msg}")]
    Io { file: String, msg: String },
}

#[derive(Debug, Clone)]
pub struct AdmissionRules {
    pub max_added_lines: usize,
    pub max_files: usize,
    pub allowed_files: Vec<String>,
    pub allowed_extensions: Vec<String>,
    pub forbidden_prefixes: Vec<String>,
}

impl AdmissionRules {
    pub fn caps() -> (usize, usize) {
        (80, 3)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchStats {
    pub files: Vec<String>,
    pub added_lines: usize,
    pub removed_lines: usize,
}

/// One per-file section of a multi-file unified diff.
struct FileDiff {
    path: String,
    body: String,
}

fn strip_prefix(path: &str) -> &str {
    let p = path.trim();
    for pre in ["a/", "b/"] {
        if let Some(rest) = p.strip_prefix(pre) {
            return rest;
        }
    }
    p
}

fn split_files(diff: &str) -> Result<Vec<FileDiff>, PatchError> {
    let mut sections: Vec<FileDiff> = Vec::new();
    let mut current: Option<(String, Vec<&str>)> = None;
    let mut lines = diff.lines().peekable();
    while let Some(line) = lines.next() {
        if line.starts_with("--- ") {
            if let Some((path, body)) = current.take() {
                sections.push(FileDiff {
                    path,
                    body: body.join("\n") + "\n",
                });
            }
            let minus = line;
            let plus = lines
                .next()
                .filter(|l| l.starts_with("+++ "))
                .ok_or_else(|| {
                    PatchError::Unparsable("'---' header without '+++' line".to_string())
                })?;
            let new_name = strip_prefix(&plus[4..]);
            let old_name = strip_prefix(&minus[4..]);
            let path = if new_name == "/dev/null" {
                old_name
            } else {
                new_name
            };
            current = Some((path.to_string(), vec![minus, plus]));
        } else if let Some((_, body)) = current.as_mut() {
            if line.starts_with("diff ") || line.starts_with("index ") {
                continue;
            }
            body.push(line);
        }
        // anything before the first '---' header (git headers, comments) is skipped
    }
    if let Some((path, body)) = current.take() {
        sections.push(FileDiff {
            path,
            body: body.join("\n") + "\n",
        });
    }
    if sections.is_empty() {
        return Err(PatchError::Unparsable("no file headers found".to_string()));
    }
    Ok(sections)
}

/// Count touched files and added/removed lines without applying anything.
pub fn inspect_patch(diff: &str) -> Result<PatchStats, PatchError> {
    let sections = split_files(diff)?;
    let mut files = Vec::new();
    let mut added = 0usize;
    let mut removed = 0usize;
    for s in &sections {
        if !files.contains(&s.path) {
            files.push(s.path.clone());
        }
        for line in s.body.lines() {
            if line.starts_with("+++") || line.starts_with("---") {
                continue;
            }
            if line.starts_with('+') {
                added += 1;
            } else if line.starts_with('-') {
                removed += 1;
            }
        }
    }
    Ok(PatchStats {
        files,
        added_lines: added,
        removed_lines: removed,
    })
}

fn relative_and_safe(file: &str) -> bool {
    let p = Path::new(file);
    !p.is_absolute()
        && p.components()
            .all(|c| matches!(c, Component::Normal(_)))
}

/// Enforce the admission rules on an inspected patch.
pub fn admit(stats: &PatchStats, rules: &AdmissionRules) -> Result<(), PatchError> {
    if stats.files.len() > rules.max_files {
        return Err(PatchError::TooManyFiles {
            got: stats.files.len(),
            cap: rules.max_files,
        });
    }
    if stats.added_lines > rules.max_added_lines {
        return Err(PatchError::TooManyAddedLines {
            got: stats.added_lines,
            cap: rules.max_added_lines,
        });
    }
    for f in &stats.files {
        if !relative_and_safe(f) {
            return Err(PatchError::Escapes(f.clone()));
        }
        for pre in &rules.forbidden_prefixes {
            if f.starts_with(pre) {
                return Err(PatchError::Forbidden(f.clone()));
            }
        }
        if !rules
            .allowed_extensions
            .iter()
            .any(|ext| f.ends_with(ext.as_str()))
        {
            return Err(PatchError::BadExtension(f.clone()));
        }
        let allowed = rules.allowed_files.iter().any(|a| {
            if a.ends_with('/') {
                f.starts_with(a.as_str())
            } else {
                f == a
            }
        });
        if !allowed {
            return Err(PatchError::OutsideSlots(f.clone()));
        }
    }
    Ok(())
}

/// Apply a multi-file unified diff to a checkout. Returns the touched
/// paths. Fails atomically per-file (earlier files may have been written;
/// callers roll back via the champion snapshot on any error).
pub fn apply_patch(checkout: &Path, diff: &str) -> Result<Vec<PathBuf>, PatchError> {
    let sections = split_files(diff)?;
    let mut touched = Vec::new();
    for s in &sections {
        if !relative_and_safe(&s.path) {
            return Err(PatchError::Escapes(s.path.clone()));
        }
        let target = checkout.join(&s.path);
        let patch = Patch::from_str(&s.body).map_err(|e| PatchError::Unparsable(e.to_string()))?;
        let original = if target.exists() {
            std::fs::read_to_string(&target).map_err(|e| PatchError::Io {
                file: s.path.clone(),
                msg: e.to_string(),
            })?
        } else {
            String::new()
        };
        let patched = diffy::apply(&original, &patch).map_err(|e| PatchError::ApplyFailed {
            file: s.path.clone(),
            msg: e.to_string(),
        })?;
        if let Some(parent) = target.parent() {
            std::fs::create_dir_all(parent).map_err(|e| PatchError::Io {
                file: s.path.clone(),
                msg: e.to_string(),
            })?;
        }
        std::fs::write(&target, patched).map_err(|e| PatchError::Io {
            file: s.path.clone(),
            msg: e.to_string(),
        })?;
        touched.push(target);
    }
    Ok(touched)
}

/// Render a unified diff between two texts (provenance and tests).
pub fn make_diff(path: &str, original: &str, modified: &str) -> String {
    let patch = diffy::create_patch(original, modified);
    let text = patch.to_string();
    // diffy emits "--- original"/"+++ modified"; rewrite with the path so
    // the diff can be applied and audited.
    let mut out = String::new();
    for line in text.lines() {
        if line.starts_with("--- original") {
            out.push_str(&format!("--- a/{path}\n"));
        } else if line.starts_with("+++ modified") {
            out.push_str(&format!("+++ b/{path}\n"));
        } else {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}
