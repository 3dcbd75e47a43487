use std::io::{Read, Write};
use std::path::Path;

use featrend_core::detect::FeatureKind;
use featrend_core::history::RepositoryHistory;
use featrend_core::trendfit::{analyze_counts, predict, ModelFamily, TrendLabel};
use rayon::prelude::*;

use crate::{write_file, CliError, RunConfig};

pub const HEADER: [&str; 8] = ["repo", "kind", "n_commits", "family", "coefficients", "r2", "label", "bucket"];

#[derive(Debug, Clone, PartialEq)]
pub struct TrendRecord {
    pub repo: String,
    pub kind: FeatureKind,
    pub series: Vec<u64>,
    /// `None` when the series was too short or constant to fit.
    pub family: Option<ModelFamily>,
    pub coefficients: Vec<f64>,
    pub r2: Option<f64>,
    pub label: TrendLabel,
}

/// One record per (repository, enabled kind) whose feature appears at least once.
pub fn compute(histories: &[RepositoryHistory], config: &RunConfig) -> Vec<TrendRecord> {
    let fit = config.fit_config();
    let jobs: Vec<(&RepositoryHistory, FeatureKind, Vec<u64>)> = histories
        .iter()
        .flat_map(|h| config.features.iter().filter_map(move |&k| h.series(k).map(|s| (h, k, s))))
        .collect();
    jobs.into_par_iter()
        .map(|(h, kind, series)| {
            let analysis = analyze_counts(&series, &fit).expect("series is non-empty and finite");
            let selected = analysis.selected;
            TrendRecord {
                repo: h.repo_id.clone(),
                kind,
                family: selected.as_ref().map(|f| f.family),
                coefficients: selected.as_ref().map(|f| f.coefficients.clone()).unwrap_or_default(),
                r2: selected.as_ref().map(|f| f.r2),
                label: analysis.label,
                series,
            }
        })
        .collect()
}

pub fn write_trends(records: &[TrendRecord], sink: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for r in records {
        let coefficients: Vec<String> = r.coefficients.iter().map(|c| format!("{c:.9e}")).collect();
        w.write_record([
            r.repo.clone(),
            r.kind.name().to_string(),
            r.series.len().to_string(),
            r.family.map(|f| f.to_string()).unwrap_or_else(|| "none".into()),
            coefficients.join(";"),
            r.r2.map(|v| format!("{v:.6}")).unwrap_or_default(),
            r.label.to_string(),
            r.label.bucket().to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::Csv(e.into()))
}

/// (repo, kind, label) triples from a trends.csv.
pub fn read_trends(source: impl Read) -> Result<Vec<(String, FeatureKind, TrendLabel)>, CliError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| CliError::InputMismatch(format!("trends.csv lacks a {name} column")))
    };
    let (repo, kind, label) = (column("repo")?, column("kind")?, column("label")?);
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let bad = |what: &str| CliError::InputMismatch(format!("trends.csv row {}: {what}", i + 2));
        let k: FeatureKind = record[kind].parse().map_err(|_| bad("unknown kind"))?;
        let l: TrendLabel = record[label].parse().map_err(|_| bad("unknown label"))?;
        out.push((record[repo].to_string(), k, l));
    }
    Ok(out)
}

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// One `<repo>__<kind>.svg` per record.
pub fn write_plots(records: &[TrendRecord], dir: &Path) -> Result<(), CliError> {
    for r in records {
        let values: Vec<f64> = r.series.iter().map(|&v| v as f64).collect();
        let title = format!("{} {}: {} ({})", r.repo, r.kind, r.label, r.family.map(|f| f.to_string()).unwrap_or("none".into()));
        let svg = match r.family {
            Some(family) => {
                let curve = |x: f64| predict(family, &r.coefficients, x);
                crate::svg::series_plot(&title, &values, Some(&curve))
            }
            None => crate::svg::series_plot(&title, &values, None),
        };
        write_file(&dir.join(format!("{}__{}.svg", file_stem(&r.repo), r.kind)), &svg)?;
    }
    Ok(())
}
