//! Champion checkout management: content hashing, snapshots, rollback, and
//! builds. The rollback contract: after any revert, the checkout's content
//! hash equals the champion's recorded hash.

use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::process::Command;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("io error at {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("build command failed with status {status:?}; log at {log}")]
    Build { status: Option<i32>, log: String },
    #[error("rollback mismatch: checkout hash {got} != champion hash {want}")]
    RollbackMismatch { got: String, want: String },
}

fn io_err(p: &Path) -> impl FnOnce(std::io::Error) -> RepoError + '_ {
    move |e| RepoError::Io(p.to_path_buf(), e)
}

/// Tracked files: everything under the checkout except ignored prefixes.
/// Paths are checkout-relative with forward slashes, sorted.
pub fn tracked_files(checkout: &Path, ignore: &[String]) -> Result<Vec<String>, RepoError> {
    let mut out = Vec::new();
    let mut stack = vec![checkout.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let path = entry.path();
            let rel = path
                .strip_prefix(checkout)
                .expect("under checkout")
                .to_string_lossy()
                .replace('\\', "/");
            let is_dir = path.is_dir();
            let rel_key = if is_dir { format!("{rel}/") } else { rel.clone() };
            if ignore.iter().any(|pre| rel_key.starts_with(pre.as_str())) {
                continue;
            }
            if is_dir {
                stack.push(path);
            } else {
                out.push(rel);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Deterministic content hash over tracked files (path, size, bytes).
pub fn content_hash(checkout: &Path, ignore: &[String]) -> Result<String, RepoError> {
    let files = tracked_files(checkout, ignore)?;
    let mut hasher = Sha256::new();
    for rel in &files {
        let full = checkout.join(rel);
        let bytes = std::fs::read(&full).map_err(io_err(&full))?;
        hasher.update(rel.as_bytes());
        hasher.update([0]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Copy tracked files into `dest` (created fresh).
pub fn snapshot(checkout: &Path, ignore: &[String], dest: &Path) -> Result<(), RepoError> {
    if dest.exists() {
        std::fs::remove_dir_all(dest).map_err(io_err(dest))?;
    }
    std::fs::create_dir_all(dest).map_err(io_err(dest))?;
    for rel in tracked_files(checkout, ignore)? {
        let from = checkout.join(&rel);
        let to = dest.join(&rel);
        if let Some(parent) = to.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::copy(&from, &to).map_err(io_err(&from))?;
        // preserve the executable bit for solver scripts
        #[cfg(unix)]
        {
            let perm = std::fs::metadata(&from).map_err(io_err(&from))?.permissions();
            std::fs::set_permissions(&to, perm).map_err(io_err(&to))?;
        }
    }
    Ok(())
}

/// Restore the checkout's tracked content from a snapshot: files missing
/// from the snapshot are deleted, everything else is overwritten.
pub fn restore(snapshot_dir: &Path, checkout: &Path, ignore: &[String]) -> Result<(), RepoError> {
    let snapped = tracked_files(snapshot_dir, ignore)?;
    for rel in tracked_files(checkout, ignore)? {
        if !snapped.contains(&rel) {
            let p = checkout.join(&rel);
            std::fs::remove_file(&p).map_err(io_err(&p))?;
        }
    }
    for rel in &snapped {
        let from = snapshot_dir.join(rel);
        let to = checkout.join(rel);
        if let Some(parent) = to.parent() {
            std::fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        std::fs::copy(&from, &to).map_err(io_err(&from))?;
        #[cfg(unix)]
        {
            let perm = std::fs::metadata(&from).map_err(io_err(&from))?.permissions();
            std::fs::set_permissions(&to, perm).map_err(io_err(&to))?;
        }
    }
    Ok(())
}

/// Run the build command with the checkout as working directory, teeing
/// output to `log_path`. An empty command is a no-op build.
pub fn build(checkout: &Path, build_cmd: &[String], log_path: &Path) -> Result<(), RepoError> {
    if build_cmd.is_empty() {
        std::fs::write(log_path, "no build step configured\n").map_err(io_err(log_path))?;
        return Ok(());
    }
    let output = Command::new(&build_cmd[0])
        .args(&build_cmd[1..])
        .current_dir(checkout)
        .output()
        .map_err(io_err(Path::new(&build_cmd[0])))?;
    let mut log = Vec::new();
    log.extend_from_slice(&output.stdout);
    log.extend_from_slice(b"\n--- stderr ---\n");
    log.extend_from_slice(&output.stderr);
    std::fs::write(log_path, &log).map_err(io_err(log_path))?;
    if !output.status.success() {
        return Err(RepoError::Build {
            status: output.status.code(),
            log: log_path.display().to_string(),
        });
    }
    Ok(())
}
