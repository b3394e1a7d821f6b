//! C4.5 decision trees over integer count features.
//!
//! Induction uses binary threshold splits chosen by gain ratio, restricted to
//! splits whose information gain is at least the average over admissible
//! candidates. Post-pruning is pessimistic subtree replacement. Defaults
//! follow the usual J48 settings: `min_leaf = 2`, `confidence_factor = 0.25`,
//! pruning on.

mod criteria;
mod eval;
mod prune;
mod text;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetRow, Label, FEATURE_NAMES};

pub use criteria::{candidate_thresholds, entropy, gain_ratio, info_gain, split_info, ClassCounts, SplitStats};
pub use eval::{cross_validate, evaluate, Metrics};
pub use prune::{estimated_errors, prune};
pub use text::{parse_tree, write_tree};
pub use tree::{build_tree, choose_split, DecisionTree, Prediction, SplitChoice, TreeNode};

/// Ties in gain ratio (and the mean-gain cut) are resolved within this margin.
pub const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TreeError {
    #[error("class distribution is empty")]
    EmptySet,
    #[error("threshold {threshold} on feature {feature} leaves one side empty")]
    DegenerateSplit { feature: usize, threshold: f64 },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("expected {expected} features, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("fold count {k} must be between 2 and {rows}")]
    BadFoldCount { k: usize, rows: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("model line {line}: {message}")]
    ModelFormat { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<u32>,
    pub label: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub feature_names: Vec<String>,
    pub rows: Vec<Example>,
}

impl TrainingSet {
    pub fn new(feature_names: Vec<String>, rows: Vec<Example>) -> Result<Self, TreeError> {
        let expected = feature_names.len();
        if let Some(bad) = rows.iter().find(|r| r.features.len() != expected) {
            return Err(TreeError::ArityMismatch {
                expected,
                actual: bad.features.len(),
            });
        }
        Ok(TrainingSet { feature_names, rows })
    }

    /// Drops the student id; features follow the dataset column order.
    pub fn from_dataset(rows: &[DatasetRow]) -> Self {
        TrainingSet {
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .map(|r| Example {
                    features: r.features().to_vec(),
                    label: r.success,
                })
                .collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn class_counts(&self) -> ClassCounts {
        ClassCounts::of(self.rows.iter())
    }

    fn subset(&self, indices: &[usize]) -> TrainingSet {
        TrainingSet {
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub min_leaf: usize,
    pub confidence_factor: f64,
    pub pruning: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            min_leaf: 2,
            confidence_factor: 0.25,
            pruning: true,
        }
    }
}

impl TrainConfig {
    pub fn unpruned(min_leaf: usize) -> Self {
        TrainConfig {
            min_leaf,
            pruning: false,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<(), TreeError> {
        if self.min_leaf < 1 {
            return Err(TreeError::BadConfig("min_leaf must be at least 1".into()));
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor < 1.0) {
            return Err(TreeError::BadConfig("confidence_factor must be in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Builds a tree and, when enabled, prunes it.
pub fn train(set: &TrainingSet, config: &TrainConfig) -> Result<DecisionTree, TreeError> {
    config.check()?;
    let tree = build_tree(set, config)?;
    Ok(if config.pruning {
        prune(&tree, config.confidence_factor)
    } else {
        tree
    })
}
