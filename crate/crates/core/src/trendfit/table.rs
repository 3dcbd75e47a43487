use std::collections::BTreeMap;

use super::{Bucket, TrendLabel};
use crate::detect::FeatureKind;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrendRow {
    /// Indexed like `TrendLabel::ALL`.
    pub counts: [u64; 11],
    pub total: u64,
    pub inc: u64,
    pub dec: u64,
    pub unstable: u64,
    pub stable: u64,
}

impl TrendRow {
    pub fn count(&self, label: TrendLabel) -> u64 {
        self.counts[label as usize]
    }

    /// Share of the row's apps, in percent.
    pub fn percent(&self, count: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    fn add(&mut self, label: TrendLabel) {
        self.counts[label as usize] += 1;
        self.total += 1;
        match label.bucket() {
            Bucket::Inc => self.inc += 1,
            Bucket::Dec => self.dec += 1,
            Bucket::Unstable => self.unstable += 1,
            Bucket::Stable => self.stable += 1,
        }
    }
}

pub type TrendTable = BTreeMap<FeatureKind, TrendRow>;

/// Counts labels per feature kind; each item is one (repository, kind) series.
pub fn tabulate(labels: impl IntoIterator<Item = (FeatureKind, TrendLabel)>) -> TrendTable {
    let mut table = TrendTable::new();
    for (kind, label) in labels {
        table.entry(kind).or_default().add(label);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_label() {
        let t = tabulate([(FeatureKind::DataClass, TrendLabel::CR)]);
        let row = &t[&FeatureKind::DataClass];
        assert_eq!(row.count(TrendLabel::CR), 1);
        assert_eq!(row.percent(row.count(TrendLabel::CR)), 100.0);
        assert_eq!((row.inc, row.dec, row.total), (1, 0, 1));
    }

    #[test]
    fn rollups() {
        let t = tabulate([(FeatureKind::Lambda, TrendLabel::CR), (FeatureKind::Lambda, TrendLabel::SD)]);
        let row = &t[&FeatureKind::Lambda];
        assert_eq!((row.inc, row.dec, row.unstable, row.stable), (1, 1, 0, 0));
    }

    #[test]
    fn label_index_matches_all() {
        for (i, l) in TrendLabel::ALL.iter().enumerate() {
            assert_eq!(*l as usize, i);
        }
    }
}
