use serde::{Deserialize, Serialize};

use super::criteria::{thresholds_of, ClassCounts, SplitStats};
use super::{Example, TrainConfig, TrainingSet, TreeError, TIE_EPSILON};
use crate::dataset::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf {
        counts: ClassCounts,
        label: Label,
    },
    /// Rows with `feature <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        counts: ClassCounts,
        label: Label,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn counts(&self) -> ClassCounts {
        match self {
            TreeNode::Leaf { counts, .. } | TreeNode::Split { counts, .. } => *counts,
        }
    }

    /// Majority label of the training rows that reached this node.
    pub fn label(&self) -> Label {
        match self {
            TreeNode::Leaf { label, .. } | TreeNode::Split { label, .. } => *label,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaf_for(&self, features: &[u32]) -> &TreeNode {
        let mut node = self;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = node
        {
            node = if f64::from(features[*feature]) <= *threshold {
                left
            } else {
                right
            };
        }
        node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Share of the leaf's training rows carrying the predicted label.
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub feature_names: Vec<String>,
    pub root: TreeNode,
}

impl DecisionTree {
    pub fn arity(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict(&self, features: &[u32]) -> Result<Prediction, TreeError> {
        if features.len() != self.arity() {
            return Err(TreeError::ArityMismatch {
                expected: self.arity(),
                actual: features.len(),
            });
        }
        let leaf = self.root.leaf_for(features);
        let counts = leaf.counts();
        let label = leaf.label();
        let confidence = match counts.total() {
            0 => 0.0,
            total => f64::from(counts.get(label)) / f64::from(total),
        };
        Ok(Prediction { label, confidence })
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.leaf_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }
}

/// The split picked at a node together with the pool it was picked from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitChoice {
    pub best: SplitStats,
    /// Mean gain over all admissible candidates.
    pub mean_gain: f64,
    /// Admissible candidates in (feature, threshold) order.
    pub admissible: Vec<SplitStats>,
}

fn admissible_splits(rows: &[&Example], arity: usize, min_leaf: usize) -> Vec<SplitStats> {
    let mut out = Vec::new();
    for feature in 0..arity {
        for threshold in thresholds_of(rows.iter().copied(), feature) {
            let Ok(stats) = SplitStats::compute(rows.iter().copied(), feature, threshold) else {
                continue;
            };
            let big_enough = stats.left.total() as usize >= min_leaf && stats.right.total() as usize >= min_leaf;
            if big_enough && stats.gain > TIE_EPSILON {
                out.push(stats);
            }
        }
    }
    out
}

fn select(rows: &[&Example], arity: usize, min_leaf: usize) -> Option<SplitChoice> {
    let admissible = admissible_splits(rows, arity, min_leaf);
    if admissible.is_empty() {
        return None;
    }
    let mean_gain = admissible.iter().map(|s| s.gain).sum::<f64>() / admissible.len() as f64;
    let mut best: Option<SplitStats> = None;
    // Candidates arrive in (feature, threshold) order, so keeping the first of
    // any tie gives the lowest feature index, then the lowest threshold.
    for s in admissible.iter().filter(|s| s.gain >= mean_gain - TIE_EPSILON) {
        match best {
            Some(b) if s.gain_ratio <= b.gain_ratio + TIE_EPSILON => {}
            _ => best = Some(*s),
        }
    }
    best.map(|best| SplitChoice {
        best,
        mean_gain,
        admissible,
    })
}

/// The split C4.5 would place at the root of `set`, if any.
pub fn choose_split(set: &TrainingSet, min_leaf: usize) -> Option<SplitChoice> {
    let rows: Vec<&Example> = set.rows.iter().collect();
    select(&rows, set.arity(), min_leaf.max(1))
}

pub fn build_tree(set: &TrainingSet, config: &TrainConfig) -> Result<DecisionTree, TreeError> {
    if set.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    let rows: Vec<&Example> = set.rows.iter().collect();
    Ok(DecisionTree {
        feature_names: set.feature_names.clone(),
        root: grow(&rows, set.arity(), config.min_leaf.max(1), None),
    })
}

fn grow(rows: &[&Example], arity: usize, min_leaf: usize, parent: Option<Label>) -> TreeNode {
    let counts = ClassCounts::of(rows.iter().copied());
    let label = counts.majority(parent);
    let leaf = TreeNode::Leaf { counts, label };
    if counts.is_pure() || rows.len() < 2 * min_leaf {
        return leaf;
    }
    let Some(choice) = select(rows, arity, min_leaf) else {
        return leaf;
    };
    let SplitStats { feature, threshold, .. } = choice.best;
    let (left, right): (Vec<&Example>, Vec<&Example>) = rows
        .iter()
        .copied()
        .partition(|r| f64::from(r.features[feature]) <= threshold);
    TreeNode::Split {
        feature,
        threshold,
        counts,
        label,
        left: Box::new(grow(&left, arity, min_leaf, Some(label))),
        right: Box::new(grow(&right, arity, min_leaf, Some(label))),
    }
}
