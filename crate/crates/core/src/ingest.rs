//! Repository snapshots: the Java-only view of a working tree plus the
//! commit identifier used to decide whether a stored index is stale.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

/// Directory names that hold version-control metadata and are never indexed.
const METADATA_DIRS: &[&str] = &[".git", ".hg", ".svn"];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read repository at {path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not a directory")]
    NotADirectory { path: PathBuf },
    #[error("no Java source files under {path}")]
    EmptyCorpus { path: PathBuf },
}

/// One retained source file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFileRecord {
    /// Repository-relative, `/`-separated.
    pub relative_path: String,
    pub raw_text: String,
}

/// Immutable Java-only view of a repository at one point in time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepoSnapshot {
    pub root_path: PathBuf,
    pub commit_id: String,
    /// Sorted by `relative_path` in byte order.
    pub files: Vec<SourceFileRecord>,
}

impl RepoSnapshot {
    pub fn file_count(&self) -> usize {
        self.files.len()
    }
}

/// Walks `root` and keeps every regular `.java` file, skipping version-control
/// metadata directories and symbolic links.
///
/// The commit identifier is the head commit when the tree is a git checkout
/// with at least one commit, otherwise `sha256:<hex>` over the sorted
/// `(path, content)` pairs.
pub fn snapshot_repository(root: &Path) -> Result<RepoSnapshot, IngestError> {
    let meta = fs::metadata(root).map_err(|source| IngestError::Path {
        path: root.to_path_buf(),
        source,
    })?;
    if !meta.is_dir() {
        return Err(IngestError::NotADirectory {
            path: root.to_path_buf(),
        });
    }

    let mut paths = BTreeMap::new();
    let walker = WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_entry(|e| {
            !(e.file_type().is_dir()
                && e.depth() > 0
                && METADATA_DIRS.iter().any(|m| e.file_name() == *m))
        });
    for entry in walker {
        let entry = entry.map_err(|err| {
            let path = err.path().unwrap_or(root).to_path_buf();
            IngestError::Path {
                path,
                source: err.into(),
            }
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let is_java = entry
            .path()
            .extension()
            .is_some_and(|ext| ext == "java");
        if !is_java {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .expect("walkdir yields paths under its root");
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        paths.insert(rel, entry.path().to_path_buf());
    }

    if paths.is_empty() {
        return Err(IngestError::EmptyCorpus {
            path: root.to_path_buf(),
        });
    }

    let entries: Vec<(String, PathBuf)> = paths.into_iter().collect();
    let contents: Vec<(String, Vec<u8>)> = entries
        .into_par_iter()
        .map(|(rel, abs)| {
            fs::read(&abs)
                .map(|bytes| (rel, bytes))
                .map_err(|source| IngestError::Path { path: abs, source })
        })
        .collect::<Result<_, _>>()?;

    let commit_id = git_head(root).unwrap_or_else(|| content_digest(&contents));
    let files = contents
        .into_iter()
        .map(|(relative_path, bytes)| SourceFileRecord {
            relative_path,
            raw_text: String::from_utf8_lossy(&bytes).into_owned(),
        })
        .collect();

    Ok(RepoSnapshot {
        root_path: root.to_path_buf(),
        commit_id,
        files,
    })
}

/// True iff the two identifiers differ byte for byte.
pub fn is_stale(snapshot_commit_id: &str, stored_commit_id: &str) -> bool {
    snapshot_commit_id != stored_commit_id
}

fn content_digest(files: &[(String, Vec<u8>)]) -> String {
    let mut hasher = Sha256::new();
    for (path, bytes) in files {
        hasher.update((path.len() as u64).to_le_bytes());
        hasher.update(path.as_bytes());
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    format!("sha256:{}", to_hex(&hasher.finalize()))
}

pub(crate) fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolves `HEAD` of a git checkout rooted at `root`, if any.
fn git_head(root: &Path) -> Option<String> {
    let dot_git = root.join(".git");
    let git_dir = if dot_git.is_file() {
        // worktrees and submodules: `gitdir: <path>`
        let text = fs::read_to_string(&dot_git).ok()?;
        let target = text.trim().strip_prefix("gitdir:")?.trim();
        let target = PathBuf::from(target);
        if target.is_absolute() {
            target
        } else {
            root.join(target)
        }
    } else if dot_git.is_dir() {
        dot_git
    } else {
        return None;
    };

    let head = fs::read_to_string(git_dir.join("HEAD")).ok()?;
    let head = head.trim();
    match head.strip_prefix("ref:") {
        Some(reference) => resolve_ref(&git_dir, reference.trim()),
        None if is_object_id(head) => Some(head.to_string()),
        None => None,
    }
}

fn resolve_ref(git_dir: &Path, reference: &str) -> Option<String> {
    let mut dirs = vec![git_dir.to_path_buf()];
    // linked worktrees keep shared refs in the common dir
    if let Ok(common) = fs::read_to_string(git_dir.join("commondir")) {
        dirs.push(git_dir.join(common.trim()));
    }
    for dir in &dirs {
        if let Ok(text) = fs::read_to_string(dir.join(reference)) {
            let id = text.trim();
            if is_object_id(id) {
                return Some(id.to_string());
            }
        }
    }
    for dir in &dirs {
        let Ok(packed) = fs::read_to_string(dir.join("packed-refs")) else {
            continue;
        };
        for line in packed.lines() {
            if line.starts_with('#') || line.starts_with('^') {
                continue;
            }
            if let Some((id, name)) = line.split_once(' ') {
                if name.trim() == reference && is_object_id(id) {
                    return Some(id.to_string());
                }
            }
        }
    }
    None
}

fn is_object_id(s: &str) -> bool {
    matches!(s.len(), 40 | 64) && s.bytes().all(|b| b.is_ascii_hexdigit())
}
