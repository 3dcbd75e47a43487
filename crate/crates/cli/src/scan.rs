use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use featrend_core::detect::{DenominatorCounts, FeatureKind, FileFeatureReport};
use featrend_core::metrics::{normalize, NormalizedUsage};
use featrend_core::syntax::parse_source;
use rayon::prelude::*;
use walkdir::WalkDir;

use crate::{fmt_real, io_err, CliError, RunConfig, Warning};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub files: Vec<FileFeatureReport>,
    pub usage: Vec<NormalizedUsage>,
    pub warnings: Vec<Warning>,
}

/// Kotlin files under `root` (or `root` itself), as (display path, full path), sorted.
fn kotlin_files(root: &Path) -> Result<Vec<(String, std::path::PathBuf)>, CliError> {
    if root.is_file() {
        let name = root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(vec![(name, root.to_path_buf())]);
    }
    let mut out = Vec::new();
    let walker = WalkDir::new(root).sort_by_file_name().into_iter().filter_entry(|e| e.file_name() != ".git");
    for entry in walker {
        let entry = entry.map_err(|e| CliError::Io { path: root.to_path_buf(), source: e.into() })?;
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let display = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        if entry.file_type().is_file() && featrend_miner::is_kotlin(&display) {
            out.push((display, entry.path().to_path_buf()));
        }
    }
    Ok(out)
}

pub fn scan(root: &Path, config: &RunConfig) -> Result<ScanReport, CliError> {
    if !root.exists() {
        return Err(CliError::PathNotFound(root.to_path_buf()));
    }
    let detect_config = config.detect_config();
    let analyzed: Vec<Result<Result<FileFeatureReport, Warning>, CliError>> = kotlin_files(root)?
        .par_iter()
        .map(|(display, full)| {
            let bytes = std::fs::read(full).map_err(io_err(full))?;
            Ok(match parse_source(display, &bytes) {
                Ok(tree) => Ok(featrend_core::detect::detect(&tree, &detect_config)),
                Err(e) => Err(Warning { source: display.clone(), message: e.to_string() }),
            })
        })
        .collect();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for item in analyzed {
        match item? {
            Ok(report) => files.push(report),
            Err(w) => warnings.push(w),
        }
    }
    let mut totals: BTreeMap<FeatureKind, u64> = BTreeMap::new();
    let mut denominators = DenominatorCounts::default();
    for f in &files {
        for (kind, n) in f.counts() {
            *totals.entry(kind).or_default() += n;
        }
        denominators.add(&f.denominators);
    }
    let usage = normalize(&totals, &denominators, &config.features);
    Ok(ScanReport { files, usage, warnings })
}

pub fn write_usage(usage: &[NormalizedUsage], sink: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["kind", "instances", "denominator", "denominator_count", "ratio"])?;
    for u in usage {
        w.write_record([
            u.kind.name().to_string(),
            u.numerator.to_string(),
            u.kind.denominator().name().to_string(),
            u.denominator.to_string(),
            u.ratio_f64().map(fmt_real).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))
}

/// One row per (file, kind) with a non-zero count.
pub fn write_per_file(files: &[FileFeatureReport], sink: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["path", "kind", "instances", "lines"])?;
    for f in files {
        for (kind, n) in f.counts() {
            let lines: Vec<String> =
                f.instances.iter().filter(|i| i.kind == kind).map(|i| i.line.to_string()).collect();
            w.write_record([f.path.clone(), kind.name().to_string(), n.to_string(), lines.join(";")])?;
        }
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))
}
