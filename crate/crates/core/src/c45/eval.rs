use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::DecisionTree;
use super::{train, TrainConfig, TrainingSet, TreeError};
use crate::dataset::Label;

/// Classification quality over a labelled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub rows: usize,
    pub accuracy: f64,
    /// `confusion[actual][predicted]`, indexed by [`Label::index`].
    pub confusion: [[u32; 2]; 2],
    /// Per label; 0 when the label was never predicted.
    pub precision: [f64; 2],
    /// Per label; 0 when the label never occurs.
    pub recall: [f64; 2],
}

impl Metrics {
    fn from_confusion(confusion: [[u32; 2]; 2]) -> Self {
        let rows: u32 = confusion.iter().flatten().sum();
        let correct = confusion[0][0] + confusion[1][1];
        let ratio = |num: u32, den: u32| if den == 0 { 0.0 } else { f64::from(num) / f64::from(den) };
        let mut precision = [0.0; 2];
        let mut recall = [0.0; 2];
        for c in 0..2 {
            precision[c] = ratio(confusion[c][c], confusion[0][c] + confusion[1][c]);
            recall[c] = ratio(confusion[c][c], confusion[c][0] + confusion[c][1]);
        }
        Metrics {
            rows: rows as usize,
            accuracy: ratio(correct, rows),
            confusion,
            precision,
            recall,
        }
    }

    pub fn precision_of(&self, label: Label) -> f64 {
        self.precision[label.index()]
    }

    pub fn recall_of(&self, label: Label) -> f64 {
        self.recall[label.index()]
    }

    pub fn correct(&self) -> u32 {
        self.confusion[0][0] + self.confusion[1][1]
    }
}

fn tally(tree: &DecisionTree, set: &TrainingSet, confusion: &mut [[u32; 2]; 2]) -> Result<(), TreeError> {
    for row in &set.rows {
        let predicted = tree.predict(&row.features)?.label;
        confusion[row.label.index()][predicted.index()] += 1;
    }
    Ok(())
}

pub fn evaluate(tree: &DecisionTree, set: &TrainingSet) -> Result<Metrics, TreeError> {
    let mut confusion = [[0; 2]; 2];
    tally(tree, set, &mut confusion)?;
    Ok(Metrics::from_confusion(confusion))
}

/// Stratified k-fold cross-validation; the confusion matrix is pooled over
/// all held-out folds.
///
/// Row indices of each class are shuffled with a ChaCha8 generator seeded
/// from `seed`, the class lists are concatenated (NO first) and dealt to
/// folds round-robin, so every fold gets a near-equal share of each class.
pub fn cross_validate(set: &TrainingSet, config: &TrainConfig, k: usize, seed: u64) -> Result<Metrics, TreeError> {
    if k < 2 || k > set.len() {
        return Err(TreeError::BadFoldCount { k, rows: set.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::with_capacity(set.len());
    for label in Label::ALL {
        let mut idx: Vec<usize> = (0..set.len()).filter(|&i| set.rows[i].label == label).collect();
        idx.shuffle(&mut rng);
        order.extend(idx);
    }
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }

    let mut confusion = [[0; 2]; 2];
    for held_out in 0..k {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != held_out)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let tree = train(&set.subset(&train_idx), config)?;
        tally(&tree, &set.subset(&folds[held_out]), &mut confusion)?;
    }
    Ok(Metrics::from_confusion(confusion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c45::test_data::sample_set;
    use crate::c45::{build_tree, ClassCounts, TreeNode};

    #[test]
    fn unpruned_fit_is_perfect() {
        let set = sample_set();
        let tree = build_tree(&set, &TrainConfig::unpruned(1)).unwrap();
        let m = evaluate(&tree, &set).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.confusion, [[3, 0], [0, 2]]);
        assert_eq!(m.precision, [1.0, 1.0]);
    }

    #[test]
    fn majority_leaf_scores_point_six() {
        let set = sample_set();
        let tree = DecisionTree {
            feature_names: set.feature_names.clone(),
            root: TreeNode::Leaf {
                counts: ClassCounts([3, 2]),
                label: Label::No,
            },
        };
        let m = evaluate(&tree, &set).unwrap();
        assert!((m.accuracy - 0.6).abs() < 1e-12);
        assert_eq!(m.confusion, [[3, 0], [2, 0]]);
        assert_eq!(m.recall_of(Label::Yes), 0.0);
        assert_eq!(m.precision_of(Label::Yes), 0.0);
        assert!((m.precision_of(Label::No) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn cross_validation_is_seeded() {
        let set = sample_set();
        let cfg = TrainConfig::unpruned(1);
        let a = cross_validate(&set, &cfg, 2, 42).unwrap();
        let b = cross_validate(&set, &cfg, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows, 5);
        assert_eq!(
            cross_validate(&set, &cfg, 1, 0),
            Err(TreeError::BadFoldCount { k: 1, rows: 5 })
        );
        assert_eq!(
            cross_validate(&set, &cfg, 6, 0),
            Err(TreeError::BadFoldCount { k: 6, rows: 5 })
        );
        assert_eq!(cross_validate(&set, &cfg, 5, 3).unwrap().rows, 5);
    }
}
