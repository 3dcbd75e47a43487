//! Reader for the `// expect:` markers of the labelled corpus.
//!
//! `// expect: A B*2` labels the line it sits on, `// expect-next: ...` the
//! following line. `| miss: K` lists instances the detectors are known not to find.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use featrend_core::detect::FeatureKind;

#[derive(Debug, Default)]
pub struct Labels {
    /// (kind, line) -> expected count
    pub expected: BTreeMap<(FeatureKind, u32), u64>,
    pub known_misses: BTreeMap<(FeatureKind, u32), u64>,
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "kt"))
        .collect();
    files.sort();
    files
}

fn add_items(into: &mut BTreeMap<(FeatureKind, u32), u64>, items: &str, line: u32) {
    for item in items.split_whitespace() {
        let (name, times) = match item.split_once('*') {
            Some((n, t)) => (n, t.parse::<u64>().expect("repeat count")),
            None => (item, 1),
        };
        let kind: FeatureKind = name.parse().unwrap_or_else(|e| panic!("line {line}: {e}"));
        *into.entry((kind, line)).or_insert(0) += times;
    }
}

pub fn read_labels(source: &str) -> Labels {
    let mut labels = Labels::default();
    for (idx, text) in source.lines().enumerate() {
        let line = idx as u32 + 1;
        let (marker, target) = if let Some(pos) = text.find("// expect-next:") {
            (&text[pos + "// expect-next:".len()..], line + 1)
        } else if let Some(pos) = text.find("// expect:") {
            (&text[pos + "// expect:".len()..], line)
        } else {
            continue;
        };
        let (found, missed) = match marker.split_once("| miss:") {
            Some((f, m)) => (f, Some(m)),
            None => (marker, None),
        };
        add_items(&mut labels.expected, found, target);
        if let Some(m) = missed {
            add_items(&mut labels.known_misses, m, target);
        }
    }
    labels
}

/// Per-kind true positives, false positives and false negatives.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Tally {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

pub fn compare(
    expected: &BTreeMap<(FeatureKind, u32), u64>,
    found: &BTreeMap<(FeatureKind, u32), u64>,
    tallies: &mut BTreeMap<FeatureKind, Tally>,
    mismatches: &mut Vec<String>,
    file: &str,
) {
    let mut keys: Vec<&(FeatureKind, u32)> = expected.keys().chain(found.keys()).collect();
    keys.sort();
    keys.dedup();
    for key in keys {
        let e = expected.get(key).copied().unwrap_or(0);
        let f = found.get(key).copied().unwrap_or(0);
        let t = tallies.entry(key.0).or_default();
        t.tp += e.min(f);
        if f > e {
            t.fp += f - e;
            mismatches.push(format!("{file}:{} spurious {} x{}", key.1, key.0, f - e));
        }
        if e > f {
            t.fn_ += e - f;
            mismatches.push(format!("{file}:{} missed {} x{}", key.1, key.0, e - f));
        }
    }
}
