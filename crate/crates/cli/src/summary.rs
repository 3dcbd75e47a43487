use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use featrend_core::detect::FeatureKind;
use featrend_core::history::RepositoryHistory;
use featrend_core::metrics::{introduction_moment, normalize_last, quartiles, summarize as adoption, Quartiles};
use featrend_core::trendfit::{tabulate, TrendLabel};

use crate::{create, fmt_pct, fmt_real, io_err, svg, write_file, CliError, RunConfig, Warning};

pub const OUTPUTS: [&str; 8] = [
    "adoption.csv",
    "normalized.csv",
    "introduction.csv",
    "distributions.csv",
    "trend_table.csv",
    "adoption.svg",
    "normalized.svg",
    "introduction.svg",
];

fn csv_file(dir: &Path, name: &str) -> Result<csv::Writer<std::io::BufWriter<std::fs::File>>, CliError> {
    Ok(csv::Writer::from_writer(create(&dir.join(name))?))
}

fn finish(mut w: csv::Writer<impl Write>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

fn quartile_cells(q: &Option<Quartiles>) -> Vec<String> {
    match q {
        Some(q) => [q.min, q.q1, q.median, q.q3, q.max].into_iter().map(fmt_real).collect(),
        None => vec![String::new(); 5],
    }
}

/// Writes the report bundle into `dir` and returns the non-fatal problems.
pub fn summarize(
    histories: &[RepositoryHistory],
    trends: &[(String, FeatureKind, TrendLabel)],
    config: &RunConfig,
    dir: &Path,
) -> Result<Vec<Warning>, CliError> {
    let mut repos = BTreeSet::new();
    for h in histories {
        if !repos.insert(h.repo_id.as_str()) {
            return Err(CliError::InputMismatch(format!("repository {:?} given twice", h.repo_id)));
        }
    }
    if let Some((repo, _, _)) = trends.iter().find(|(r, _, _)| !repos.contains(r.as_str())) {
        return Err(CliError::InputMismatch(format!("trends.csv names repository {repo:?} with no history")));
    }
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let kinds = &config.features;
    let mut warnings = Vec::new();

    let summary = adoption(histories, kinds);
    let mut w = csv_file(dir, "adoption.csv")?;
    w.write_record(["kind", "apps_using", "total_apps", "pct_apps", "instances_last_commit"])?;
    let mut bars = Vec::new();
    for k in &summary.kinds {
        let pct = if summary.total_apps == 0 { 0.0 } else { 100.0 * k.apps_using as f64 / summary.total_apps as f64 };
        w.write_record([
            k.kind.name().to_string(),
            k.apps_using.to_string(),
            summary.total_apps.to_string(),
            fmt_pct(pct),
            k.instances_last_commit.to_string(),
        ])?;
        bars.push((k.kind.name().to_string(), pct, k.apps_using.to_string()));
    }
    finish(w, &dir.join("adoption.csv"))?;
    bars.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    write_file(&dir.join("adoption.svg"), &svg::bar_chart("Applications using each feature", "% of applications", 100.0, &bars))?;

    let mut w = csv_file(dir, "normalized.csv")?;
    w.write_record(["repo", "kind", "instances", "denominator", "denominator_count", "ratio"])?;
    for h in histories {
        for u in normalize_last(h, kinds) {
            w.write_record([
                h.repo_id.clone(),
                u.kind.name().to_string(),
                u.numerator.to_string(),
                u.kind.denominator().name().to_string(),
                u.denominator.to_string(),
                u.ratio_f64().map(fmt_real).unwrap_or_default(),
            ])?;
        }
    }
    finish(w, &dir.join("normalized.csv"))?;

    let mut moments: Vec<Vec<f64>> = vec![Vec::new(); kinds.len()];
    let mut w = csv_file(dir, "introduction.csv")?;
    w.write_record(["repo", "kind", "days", "commit"])?;
    for h in histories {
        match introduction_moment(h, kinds) {
            Ok(ms) => {
                for (i, m) in ms.iter().enumerate() {
                    let Some(days) = m.days else { continue };
                    moments[i].push(days as f64);
                    w.write_record([
                        h.repo_id.clone(),
                        m.kind.name().to_string(),
                        days.to_string(),
                        m.first_commit_id.clone().unwrap_or_default(),
                    ])?;
                }
            }
            Err(e) => warnings.push(Warning { source: h.repo_id.clone(), message: e.to_string() }),
        }
    }
    finish(w, &dir.join("introduction.csv"))?;

    let mut w = csv_file(dir, "distributions.csv")?;
    w.write_record(["metric", "kind", "n", "min", "q1", "median", "q3", "max"])?;
    let mut normalized_boxes = Vec::new();
    for k in &summary.kinds {
        let mut row = vec!["normalized".to_string(), k.kind.name().to_string(), k.normalized.len().to_string()];
        row.extend(quartile_cells(&k.distribution));
        w.write_record(&row)?;
        normalized_boxes.push((k.kind.name().to_string(), k.distribution));
    }
    let mut intro_boxes = Vec::new();
    for (kind, values) in kinds.iter().zip(&moments) {
        let q = quartiles(values);
        let mut row = vec!["introduction_days".to_string(), kind.name().to_string(), values.len().to_string()];
        row.extend(quartile_cells(&q));
        w.write_record(&row)?;
        intro_boxes.push((kind.name().to_string(), q));
    }
    finish(w, &dir.join("distributions.csv"))?;
    write_file(&dir.join("normalized.svg"), &svg::box_plot("Normalized usage at the last commit", "instances per denominator unit (log)", true, &normalized_boxes))?;
    write_file(&dir.join("introduction.svg"), &svg::box_plot("Days from the first Kotlin commit to a feature's first use", "days", false, &intro_boxes))?;

    let table = tabulate(trends.iter().filter(|(_, k, _)| kinds.contains(k)).map(|(_, k, l)| (*k, *l)));
    let mut w = csv_file(dir, "trend_table.csv")?;
    let mut header = vec!["kind".to_string(), "total".to_string()];
    for name in TrendLabel::ALL.iter().map(|l| l.name()).chain(["Inc", "Dec", "Unstable", "Stable"]) {
        header.push(name.to_string());
        header.push(format!("{name}_pct"));
    }
    w.write_record(&header)?;
    for (kind, row) in &table {
        let mut cells = vec![kind.name().to_string(), row.total.to_string()];
        let counts = TrendLabel::ALL.iter().map(|&l| row.count(l)).chain([row.inc, row.dec, row.unstable, row.stable]);
        for c in counts {
            cells.push(c.to_string());
            cells.push(fmt_pct(row.percent(c)));
        }
        w.write_record(&cells)?;
    }
    finish(w, &dir.join("trend_table.csv"))?;
    Ok(warnings)
}
