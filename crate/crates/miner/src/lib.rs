//! Walks the first-parent history of a git repository and runs feature
//! detection on every Kotlin file of every commit.

mod git;

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use featrend_core::detect::{detect, DetectConfig};
use featrend_core::history::{CommitRecord, FileRecord, FileWarning, RepositoryHistory};
use featrend_core::syntax::{parse_source, SyntaxError};
use rayon::prelude::*;
use thiserror::Error;

pub use git::{is_kotlin, CommitInfo, Repo, TreeEntry};

#[derive(Debug, Error)]
pub enum MineError {
    #[error("{0}: not a git repository")]
    RepoNotFound(PathBuf),
    #[error("branch {0:?} not found")]
    BranchNotFound(String),
    #[error("repository has no commits")]
    EmptyRepository,
    #[error("git {command} failed: {stderr}")]
    Git { command: String, stderr: String },
    #[error("unexpected git output: {0:?}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct MineOptions {
    pub detect: DetectConfig,
    /// Reuse detection results for blobs already seen at an earlier commit.
    pub use_cache: bool,
    /// Defaults to the repository directory name.
    pub repo_id: Option<String>,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions { detect: DetectConfig::default(), use_cache: true, repo_id: None }
    }
}

type Analyzed = Result<FileRecord, SyntaxError>;

/// Detection results keyed by blob id. Safe to share across worker threads.
#[derive(Debug, Default)]
pub struct BlobCache {
    entries: RwLock<HashMap<String, Arc<Analyzed>>>,
}

impl BlobCache {
    pub fn get(&self, oid: &str) -> Option<Arc<Analyzed>> {
        self.entries.read().expect("cache lock").get(oid).cloned()
    }

    pub fn insert(&self, oid: String, value: Arc<Analyzed>) {
        self.entries.write().expect("cache lock").insert(oid, value);
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn analyze_bytes(path: &str, bytes: &[u8], config: &DetectConfig) -> Result<FileRecord, SyntaxError> {
    let tree = parse_source(path, bytes)?;
    Ok(FileRecord::from(&detect(&tree, config)))
}

pub fn linearize(repo: impl AsRef<Path>, branch: Option<&str>) -> Result<Vec<CommitInfo>, MineError> {
    let repo = Repo::open(repo)?;
    let branch = match branch {
        Some(b) => b.to_string(),
        None => repo.head_branch()?,
    };
    repo.linearize(&branch)
}

pub fn mine(path: impl AsRef<Path>, branch: Option<&str>, options: &MineOptions) -> Result<RepositoryHistory, MineError> {
    let repo = Repo::open(path)?;
    let branch = match branch {
        Some(b) => b.to_string(),
        None => repo.head_branch()?,
    };
    let commits = repo.linearize(&branch)?;
    let repo_id = options.repo_id.clone().unwrap_or_else(|| {
        repo.path().file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    });
    let cache = BlobCache::default();
    let mut blobs = repo.blob_reader()?;
    let mut records = Vec::with_capacity(commits.len());

    for commit in &commits {
        let entries = repo.kotlin_files(&commit.id)?;
        // Fetch what the cache cannot answer; the reader is sequential, detection is not.
        let mut pending = Vec::new();
        for entry in &entries {
            if options.use_cache && cache.get(&entry.oid).is_some() {
                continue;
            }
            pending.push((entry, blobs.read(&entry.oid)?));
        }
        let fresh: Vec<(&TreeEntry, Arc<Analyzed>)> = pending
            .par_iter()
            .map(|(entry, bytes)| (*entry, Arc::new(analyze_bytes(&entry.path, bytes, &options.detect))))
            .collect();
        let mut results: HashMap<&str, Arc<Analyzed>> = HashMap::new();
        for (entry, analyzed) in fresh {
            if options.use_cache {
                cache.insert(entry.oid.clone(), analyzed.clone());
            }
            results.insert(entry.path.as_str(), analyzed);
        }

        let mut files = BTreeMap::new();
        let mut warnings = Vec::new();
        for entry in &entries {
            let analyzed = match results.get(entry.path.as_str()) {
                Some(a) => a.clone(),
                None => cache.get(&entry.oid).expect("cached above"),
            };
            match analyzed.as_ref() {
                Ok(record) => {
                    files.insert(entry.path.clone(), record.clone());
                }
                Err(SyntaxError::Decode { offset, .. }) => {
                    // the cached error names whichever path the blob was first seen under
                    let err = SyntaxError::Decode { path: entry.path.clone(), offset: *offset };
                    warnings.push(FileWarning { path: entry.path.clone(), message: err.to_string() });
                }
            }
        }
        records.push(CommitRecord { id: commit.id.clone(), timestamp: commit.timestamp, files, warnings });
    }
    Ok(RepositoryHistory { repo_id, branch, commits: records })
}
