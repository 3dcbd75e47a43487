//! Per-commit feature history and its `featrend-history/1` JSON form.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{DenominatorCounts, FeatureInstance, FeatureKind, FileFeatureReport};

pub const SCHEMA: &str = "featrend-history/1";

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("unsupported history schema {found:?}, expected {SCHEMA:?}")]
    SchemaVersionMismatch { found: Option<String> },
    #[error("malformed history: {0}")]
    MalformedInput(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileRecord {
    pub features: BTreeMap<FeatureKind, u64>,
    pub denominators: DenominatorCounts,
    #[serde(default)]
    pub instances: Vec<FeatureInstance>,
}

impl From<&FileFeatureReport> for FileRecord {
    fn from(report: &FileFeatureReport) -> Self {
        FileRecord {
            features: report.counts(),
            denominators: report.denominators,
            instances: report.instances.clone(),
        }
    }
}

/// A file the miner could not analyze at one commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileWarning {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommitRecord {
    pub id: String,
    /// Author time, seconds since the epoch.
    pub timestamp: i64,
    pub files: BTreeMap<String, FileRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<FileWarning>,
}

impl CommitRecord {
    pub fn has_kotlin(&self) -> bool {
        !self.files.is_empty() || !self.warnings.is_empty()
    }

    pub fn total(&self, kind: FeatureKind) -> u64 {
        self.files.values().map(|f| f.features.get(&kind).copied().unwrap_or(0)).sum()
    }

    pub fn totals(&self) -> BTreeMap<FeatureKind, u64> {
        let mut totals = BTreeMap::new();
        for file in self.files.values() {
            for (kind, n) in &file.features {
                *totals.entry(*kind).or_insert(0) += n;
            }
        }
        totals
    }

    pub fn denominators(&self) -> DenominatorCounts {
        let mut sum = DenominatorCounts::default();
        for file in self.files.values() {
            sum.add(&file.denominators);
        }
        sum
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepositoryHistory {
    pub repo_id: String,
    pub branch: String,
    /// Oldest first.
    pub commits: Vec<CommitRecord>,
}

#[derive(Serialize)]
struct Document<'a> {
    schema: &'static str,
    repo_id: &'a str,
    branch: &'a str,
    commits: &'a [CommitRecord],
}

impl RepositoryHistory {
    /// Evolution series of `kind`: per-commit totals from the first commit
    /// that uses it to the last commit. `None` when it is never used.
    pub fn series(&self, kind: FeatureKind) -> Option<Vec<u64>> {
        let totals: Vec<u64> = self.commits.iter().map(|c| c.total(kind)).collect();
        let first = totals.iter().position(|&n| n > 0)?;
        Some(totals[first..].to_vec())
    }
}

pub fn write_history(history: &RepositoryHistory, mut sink: impl Write) -> Result<(), HistoryError> {
    let doc = Document {
        schema: SCHEMA,
        repo_id: &history.repo_id,
        branch: &history.branch,
        commits: &history.commits,
    };
    serde_json::to_writer_pretty(&mut sink, &doc).map_err(|e| HistoryError::Io(e.into()))?;
    sink.write_all(b"\n")?;
    Ok(())
}

pub fn history_to_string(history: &RepositoryHistory) -> String {
    let mut buf = Vec::new();
    write_history(history, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn read_history(mut source: impl Read) -> Result<RepositoryHistory, HistoryError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    parse_history(&text)
}

pub fn parse_history(text: &str) -> Result<RepositoryHistory, HistoryError> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| HistoryError::MalformedInput(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| HistoryError::MalformedInput("top level is not an object".into()))?;
    match obj.remove("schema") {
        Some(serde_json::Value::String(s)) if s == SCHEMA => {}
        Some(serde_json::Value::String(s)) => return Err(HistoryError::SchemaVersionMismatch { found: Some(s) }),
        Some(other) => return Err(HistoryError::SchemaVersionMismatch { found: Some(other.to_string()) }),
        None => return Err(HistoryError::SchemaVersionMismatch { found: None }),
    }
    let history: RepositoryHistory =
        serde_json::from_value(value).map_err(|e| HistoryError::MalformedInput(e.to_string()))?;
    let mut seen = BTreeSet::new();
    for commit in &history.commits {
        if !seen.insert(commit.id.as_str()) {
            return Err(HistoryError::MalformedInput(format!("duplicate commit id {}", commit.id)));
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema": "featrend-history/1",
  "repo_id": "demo",
  "branch": "main",
  "commits": [
    {
      "id": "0123456789abcdef0123456789abcdef01234567",
      "timestamp": 1600000000,
      "files": {
        "src/A.kt": {
          "features": { "Lambda": 2 },
          "denominators": {
            "variable_declarations": 1, "named_functions": 0, "constructors": 0, "classes": 0,
            "function_calls": 2, "strings": 0, "properties": 1, "inheritances": 0,
            "object_declarations": 0, "lloc": 3
          }
        }
      }
    }
  ]
}"#;

    #[test]
    fn minimal_document_parses() {
        let h = parse_history(MINIMAL).unwrap();
        assert_eq!(h.repo_id, "demo");
        let c = &h.commits[0];
        assert_eq!(c.timestamp, 1_600_000_000);
        assert_eq!(c.total(FeatureKind::Lambda), 2);
        assert_eq!(c.files["src/A.kt"].denominators.lloc, 3);
        assert!(c.files["src/A.kt"].instances.is_empty());
    }

    #[test]
    fn round_trip() {
        let h = parse_history(MINIMAL).unwrap();
        let text = history_to_string(&h);
        assert_eq!(parse_history(&text).unwrap(), h);
        assert_eq!(history_to_string(&parse_history(&text).unwrap()), text);
    }

    #[test]
    fn missing_commits_is_malformed() {
        let err = parse_history(r#"{"schema":"featrend-history/1","repo_id":"r","branch":"b"}"#).unwrap_err();
        assert!(matches!(err, HistoryError::MalformedInput(m) if m.contains("commits")));
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let err = parse_history(r#"{"schema":"featrend-history/2","repo_id":"r","branch":"b","commits":[]}"#)
            .unwrap_err();
        assert!(matches!(err, HistoryError::SchemaVersionMismatch { found: Some(s) } if s.ends_with("/2")));
        let err = parse_history(r#"{"repo_id":"r","branch":"b","commits":[]}"#).unwrap_err();
        assert!(matches!(err, HistoryError::SchemaVersionMismatch { found: None }));
    }

    #[test]
    fn unknown_feature_kind_is_malformed() {
        let doc = MINIMAL.replace("\"Lambda\"", "\"Generics\"");
        assert!(matches!(parse_history(&doc), Err(HistoryError::MalformedInput(_))));
    }

    #[test]
    fn series_starts_at_introduction() {
        let mut h = parse_history(MINIMAL).unwrap();
        let mut empty = h.commits[0].clone();
        empty.id = "a".repeat(40);
        empty.files.clear();
        h.commits.insert(0, empty.clone());
        let mut gone = empty;
        gone.id = "b".repeat(40);
        h.commits.push(gone);
        assert_eq!(h.series(FeatureKind::Lambda), Some(vec![2, 0]));
        assert_eq!(h.series(FeatureKind::Contract), None);
    }
}
