//! Pessimistic subtree replacement.
//!
//! A node's training errors are inflated to the upper limit of a binomial
//! confidence interval at `confidence_factor`. Bottom-up, a split is replaced
//! by a leaf whenever the leaf's estimate does not exceed the summed
//! estimates of the (already pruned) subtree's leaves.

use statrs::distribution::{ContinuousCDF, Normal};

use super::tree::{DecisionTree, TreeNode};

/// Extra errors to add to `errors` observed over `n` rows.
///
/// Zero observed errors use the exact binomial bound `n (1 - cf^(1/n))`;
/// fewer than one error interpolates linearly between the zero and one-error
/// bounds; near-total error returns the remaining headroom `n - e`; otherwise
/// the one-sided normal approximation with continuity correction 0.5 and
/// `z = Φ⁻¹(1 - cf)`. A confidence factor above 0.5 disables the correction.
fn added_errors(n: f64, errors: f64, confidence_factor: f64) -> f64 {
    if confidence_factor > 0.5 {
        return 0.0;
    }
    if errors < 1.0 {
        let base = n * (1.0 - confidence_factor.powf(1.0 / n));
        if errors == 0.0 {
            return base;
        }
        return base + errors * (added_errors(n, 1.0, confidence_factor) - base);
    }
    if errors + 0.5 >= n {
        return (n - errors).max(0.0);
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(1.0 - confidence_factor);
    let f = (errors + 0.5) / n;
    let upper = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt()) / (1.0 + z * z / n);
    upper * n - errors
}

/// Pessimistic error count for a leaf with `errors` misclassified of `n`.
pub fn estimated_errors(n: u32, errors: u32, confidence_factor: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (n, e) = (f64::from(n), f64::from(errors));
    e + added_errors(n, e, confidence_factor)
}

fn leaf_estimate(node: &TreeNode, confidence_factor: f64) -> f64 {
    let counts = node.counts();
    estimated_errors(counts.total(), counts.errors(node.label()), confidence_factor)
}

fn prune_node(node: &TreeNode, confidence_factor: f64) -> (TreeNode, f64) {
    match node {
        TreeNode::Leaf { .. } => (node.clone(), leaf_estimate(node, confidence_factor)),
        TreeNode::Split {
            feature,
            threshold,
            counts,
            label,
            left,
            right,
        } => {
            let (left, left_err) = prune_node(left, confidence_factor);
            let (right, right_err) = prune_node(right, confidence_factor);
            let subtree_err = left_err + right_err;
            let as_leaf = leaf_estimate(node, confidence_factor);
            if as_leaf <= subtree_err + 1e-9 {
                (
                    TreeNode::Leaf {
                        counts: *counts,
                        label: *label,
                    },
                    as_leaf,
                )
            } else {
                (
                    TreeNode::Split {
                        feature: *feature,
                        threshold: *threshold,
                        counts: *counts,
                        label: *label,
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    subtree_err,
                )
            }
        }
    }
}

pub fn prune(tree: &DecisionTree, confidence_factor: f64) -> DecisionTree {
    DecisionTree {
        feature_names: tree.feature_names.clone(),
        root: prune_node(&tree.root, confidence_factor).0,
    }
}
