mod common;

use std::collections::BTreeMap;

use common::labels::{compare, corpus_files, read_labels, Tally};
use featrend_core::detect::{detect, DetectConfig, FeatureKind};
use featrend_core::syntax::parse_source;

#[test]
fn corpus_precision_and_recall_are_exact() {
    let mut tallies: BTreeMap<FeatureKind, Tally> = BTreeMap::new();
    let mut mismatches = Vec::new();
    let mut misses_confirmed = 0;
    for path in corpus_files() {
        let source = std::fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let labels = read_labels(&source);
        let tree = parse_source(&name, source.as_bytes()).unwrap();
        assert_eq!(tree.degraded, 0, "{name}: parser skipped tokens");
        let report = detect(&tree, &DetectConfig::default());
        let mut found = BTreeMap::new();
        for inst in &report.instances {
            *found.entry((inst.kind, inst.line)).or_insert(0u64) += 1;
        }
        compare(&labels.expected, &found, &mut tallies, &mut mismatches, &name);
        for (key, n) in &labels.known_misses {
            let reported = found.get(key).copied().unwrap_or(0);
            let labelled = labels.expected.get(key).copied().unwrap_or(0);
            assert_eq!(reported, labelled, "{name}:{} known miss {} was detected", key.1, key.0);
            misses_confirmed += n;
        }
    }
    assert!(mismatches.is_empty(), "corpus mismatches:\n{}", mismatches.join("\n"));
    assert!(misses_confirmed >= 1, "corpus must contain a documented coroutine miss");
    for kind in FeatureKind::ALL {
        let t = tallies.get(&kind).copied().unwrap_or_default();
        assert!(t.tp >= 5, "{kind}: only {} labelled instances", t.tp);
    }
}

#[test]
fn corpus_round_trips_through_the_lexer() {
    for path in corpus_files() {
        let bytes = std::fs::read(&path).unwrap();
        let tokens = featrend_core::syntax::tokenize(&bytes).unwrap();
        let joined: String = tokens.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(joined.as_bytes(), &bytes[..]);
    }
}

#[test]
fn detection_is_local_to_each_file() {
    // Concatenating two files yields the union of their instances, shifted by
    // the first file's line count.
    let files = corpus_files();
    let config = DetectConfig::default();
    for pair in files.windows(2) {
        let a = std::fs::read_to_string(&pair[0]).unwrap();
        let b = std::fs::read_to_string(&pair[1]).unwrap();
        let b = b.replacen("package ", "// package ", 1);
        let ra = detect(&parse_source("a.kt", a.as_bytes()).unwrap(), &config);
        let rb = detect(&parse_source("b.kt", b.as_bytes()).unwrap(), &config);
        let joined = format!("{a}{b}");
        let rj = detect(&parse_source("ab.kt", joined.as_bytes()).unwrap(), &config);
        let shift = a.lines().count() as u32;
        let mut expected: Vec<_> = ra.instances.clone();
        expected.extend(rb.instances.iter().map(|i| featrend_core::detect::FeatureInstance {
            kind: i.kind,
            line: i.line + shift,
        }));
        expected.sort();
        assert_eq!(rj.instances, expected, "{:?} + {:?}", pair[0], pair[1]);
    }
}
