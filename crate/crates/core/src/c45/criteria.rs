use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Example, TrainingSet, TreeError};
use crate::dataset::Label;

/// Per-label row counts, indexed by [`Label::index`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassCounts(pub [u32; 2]);

impl ClassCounts {
    pub fn of<'a>(rows: impl IntoIterator<Item = &'a Example>) -> Self {
        let mut counts = ClassCounts::default();
        for r in rows {
            counts.add(r.label);
        }
        counts
    }

    pub fn add(&mut self, label: Label) {
        self.0[label.index()] += 1;
    }

    pub fn get(&self, label: Label) -> u32 {
        self.0[label.index()]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_pure(&self) -> bool {
        self.0.iter().filter(|&&c| c > 0).count() <= 1
    }

    /// Rows that a leaf predicting `label` would misclassify.
    pub fn errors(&self, label: Label) -> u32 {
        self.total() - self.get(label)
    }

    /// Most frequent label; ties go to `parent`, then to NO.
    pub fn majority(&self, parent: Option<Label>) -> Label {
        let (no, yes) = (self.get(Label::No), self.get(Label::Yes));
        match no.cmp(&yes) {
            std::cmp::Ordering::Greater => Label::No,
            std::cmp::Ordering::Less => Label::Yes,
            std::cmp::Ordering::Equal => parent.unwrap_or(Label::No),
        }
    }

    fn merged(self, other: ClassCounts) -> ClassCounts {
        ClassCounts([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }
}

impl std::ops::Add for ClassCounts {
    type Output = ClassCounts;

    fn add(self, rhs: ClassCounts) -> ClassCounts {
        self.merged(rhs)
    }
}

/// Shannon entropy in bits, with 0 log 0 = 0.
pub fn entropy(counts: &[u32]) -> Result<f64, TreeError> {
    let total: u32 = counts.iter().sum();
    if total == 0 {
        return Err(TreeError::EmptySet);
    }
    let total = f64::from(total);
    Ok(counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = f64::from(c) / total;
            -p * p.log2()
        })
        .sum())
}

/// Midpoints between consecutive distinct values of one feature.
pub fn candidate_thresholds(set: &TrainingSet, feature: usize) -> Vec<f64> {
    thresholds_of(set.rows.iter(), feature)
}

pub(crate) fn thresholds_of<'a>(rows: impl Iterator<Item = &'a Example>, feature: usize) -> Vec<f64> {
    let distinct: BTreeSet<u32> = rows.map(|r| r.features[feature]).collect();
    let values: Vec<u32> = distinct.into_iter().collect();
    values
        .windows(2)
        .map(|w| (f64::from(w[0]) + f64::from(w[1])) / 2.0)
        .collect()
}

/// Everything known about one binary threshold split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub feature: usize,
    pub threshold: f64,
    /// Rows with `feature <= threshold`.
    pub left: ClassCounts,
    pub right: ClassCounts,
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
}

impl SplitStats {
    pub(crate) fn compute<'a>(
        rows: impl Iterator<Item = &'a Example>,
        feature: usize,
        threshold: f64,
    ) -> Result<Self, TreeError> {
        let mut left = ClassCounts::default();
        let mut right = ClassCounts::default();
        for r in rows {
            if f64::from(r.features[feature]) <= threshold {
                left.add(r.label);
            } else {
                right.add(r.label);
            }
        }
        let (nl, nr) = (left.total(), right.total());
        if nl == 0 || nr == 0 {
            return Err(TreeError::DegenerateSplit { feature, threshold });
        }
        let n = f64::from(nl + nr);
        let parent = entropy(&(left + right).0)?;
        let children = f64::from(nl) / n * entropy(&left.0)? + f64::from(nr) / n * entropy(&right.0)?;
        // Clamp float noise on zero-gain splits.
        let gain = (parent - children).max(0.0);
        let split_info = entropy(&[nl, nr])?;
        Ok(SplitStats {
            feature,
            threshold,
            left,
            right,
            gain,
            split_info,
            gain_ratio: gain / split_info,
        })
    }
}

fn stats(set: &TrainingSet, feature: usize, threshold: f64) -> Result<SplitStats, TreeError> {
    if feature >= set.arity() {
        return Err(TreeError::ArityMismatch {
            expected: set.arity(),
            actual: feature + 1,
        });
    }
    SplitStats::compute(set.rows.iter(), feature, threshold)
}

pub fn info_gain(set: &TrainingSet, feature: usize, threshold: f64) -> Result<f64, TreeError> {
    stats(set, feature, threshold).map(|s| s.gain)
}

pub fn split_info(set: &TrainingSet, feature: usize, threshold: f64) -> Result<f64, TreeError> {
    stats(set, feature, threshold).map(|s| s.split_info)
}

pub fn gain_ratio(set: &TrainingSet, feature: usize, threshold: f64) -> Result<f64, TreeError> {
    stats(set, feature, threshold).map(|s| s.gain_ratio)
}
