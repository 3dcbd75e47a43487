//! Normalized usage, introduction moments and cross-repository adoption summaries.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::detect::{DenominatorCounts, FeatureKind};
use crate::history::RepositoryHistory;

pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no commit of {repo} contains a Kotlin file")]
    NoKotlinCommit { repo: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizedUsage {
    pub kind: FeatureKind,
    pub numerator: u64,
    pub denominator: u64,
    /// `None` when the denominator is zero.
    #[serde(skip)]
    pub ratio: Option<Ratio<u64>>,
}

impl NormalizedUsage {
    pub fn ratio_f64(&self) -> Option<f64> {
        self.ratio.and_then(|r| r.to_f64())
    }
}

pub fn normalize(
    totals: &BTreeMap<FeatureKind, u64>,
    denominators: &DenominatorCounts,
    kinds: &[FeatureKind],
) -> Vec<NormalizedUsage> {
    kinds
        .iter()
        .map(|&kind| {
            let numerator = totals.get(&kind).copied().unwrap_or(0);
            let denominator = denominators.get(kind.denominator());
            let ratio = (denominator > 0).then(|| Ratio::new(numerator, denominator));
            NormalizedUsage { kind, numerator, denominator, ratio }
        })
        .collect()
}

/// Normalized usage at the last commit of a history.
pub fn normalize_last(history: &RepositoryHistory, kinds: &[FeatureKind]) -> Vec<NormalizedUsage> {
    match history.commits.last() {
        Some(last) => normalize(&last.totals(), &last.denominators(), kinds),
        None => normalize(&BTreeMap::new(), &DenominatorCounts::default(), kinds),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntroductionMoment {
    pub kind: FeatureKind,
    pub days: Option<u64>,
    pub first_commit_id: Option<String>,
}

/// Whole days between `from` and `to`, floored; negative spans count as zero.
pub fn whole_days(from: i64, to: i64) -> u64 {
    (to - from).div_euclid(SECONDS_PER_DAY).max(0) as u64
}

/// Days between the first Kotlin commit and the last commit.
pub fn kotlin_span_days(history: &RepositoryHistory) -> Result<u64, MetricsError> {
    let first = first_kotlin_commit(history)?;
    let last = history.commits.last().expect("a Kotlin commit exists");
    Ok(whole_days(history.commits[first].timestamp, last.timestamp))
}

fn first_kotlin_commit(history: &RepositoryHistory) -> Result<usize, MetricsError> {
    history
        .commits
        .iter()
        .position(|c| c.has_kotlin())
        .ok_or_else(|| MetricsError::NoKotlinCommit { repo: history.repo_id.clone() })
}

/// Introduction moment of each kind. Days are clamped to `[0, n]`, which
/// only matters when author dates run backwards along the history.
pub fn introduction_moment(
    history: &RepositoryHistory,
    kinds: &[FeatureKind],
) -> Result<Vec<IntroductionMoment>, MetricsError> {
    let start = first_kotlin_commit(history)?;
    let origin = history.commits[start].timestamp;
    let n = kotlin_span_days(history)?;
    Ok(kinds
        .iter()
        .map(|&kind| {
            let first = history.commits[start..].iter().find(|c| c.total(kind) > 0);
            IntroductionMoment {
                kind,
                days: first.map(|c| whole_days(origin, c.timestamp).min(n)),
                first_commit_id: first.map(|c| c.id.clone()),
            }
        })
        .collect())
}

/// Five-number summary; quartiles interpolate linearly between order
/// statistics (the `QUARTILE.INC` convention of spreadsheets).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(Quartiles {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindAdoption {
    pub kind: FeatureKind,
    /// Repositories with at least one instance in any commit.
    pub apps_using: usize,
    pub instances_last_commit: u64,
    /// (repo, ratio) at the last commit, for repositories with a non-zero denominator.
    pub normalized: Vec<(String, f64)>,
    /// Repositories left out of `normalized` because the denominator was zero.
    pub excluded: usize,
    pub distribution: Option<Quartiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdoptionSummary {
    pub total_apps: usize,
    pub kinds: Vec<KindAdoption>,
}

pub fn summarize(histories: &[RepositoryHistory], kinds: &[FeatureKind]) -> AdoptionSummary {
    let per_repo: Vec<Vec<NormalizedUsage>> = histories.iter().map(|h| normalize_last(h, kinds)).collect();
    let kinds = kinds
        .iter()
        .enumerate()
        .map(|(idx, &kind)| {
            let apps_using = histories
                .iter()
                .filter(|h| h.commits.iter().any(|c| c.total(kind) > 0))
                .count();
            let mut normalized = Vec::new();
            let mut excluded = 0;
            let mut last_total = 0;
            for (h, usage) in histories.iter().zip(&per_repo) {
                let u = &usage[idx];
                last_total += u.numerator;
                match u.ratio_f64() {
                    Some(r) => normalized.push((h.repo_id.clone(), r)),
                    None => excluded += 1,
                }
            }
            let values: Vec<f64> = normalized.iter().map(|(_, r)| *r).collect();
            KindAdoption {
                kind,
                apps_using,
                instances_last_commit: last_total,
                distribution: quartiles(&values),
                normalized,
                excluded,
            }
        })
        .collect();
    AdoptionSummary { total_apps: histories.len(), kinds }
}
