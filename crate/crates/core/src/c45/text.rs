//! Plain-text model files.
//!
//! ```text
//! # features: SUBJECT_FAILED,DISMISSAL_PUNISH,REWARDS
//! SUBJECT_FAILED <= 1.5
//!   DISMISSAL_PUNISH <= 0.5
//!     YES (2/0)
//!     NO (1/0)
//!   NO (2/0)
//! ```
//!
//! One node per line, two spaces of indentation per level. A split line is
//! followed by its `<=` subtree, then its `>` subtree. Leaves read
//! `LABEL (rows/errors)`. Thresholds use the shortest exact decimal form, so
//! writing and re-reading a tree is lossless.

use std::fmt::Write as _;

use super::criteria::ClassCounts;
use super::tree::{DecisionTree, TreeNode};
use super::TreeError;
use crate::dataset::Label;

const FEATURES_PREFIX: &str = "# features: ";
const INDENT: &str = "  ";

pub fn write_tree(tree: &DecisionTree) -> String {
    let mut out = format!("{FEATURES_PREFIX}{}\n", tree.feature_names.join(","));
    write_node(&mut out, &tree.root, &tree.feature_names, 0);
    out
}

fn write_node(out: &mut String, node: &TreeNode, names: &[String], depth: usize) {
    let pad = INDENT.repeat(depth);
    match node {
        TreeNode::Leaf { counts, label } => {
            let _ = writeln!(out, "{pad}{label} ({}/{})", counts.total(), counts.errors(*label));
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            let _ = writeln!(out, "{pad}{} <= {threshold}", names[*feature]);
            write_node(out, left, names, depth + 1);
            write_node(out, right, names, depth + 1);
        }
    }
}

struct Parser<'a> {
    lines: Vec<(usize, usize, &'a str)>,
    pos: usize,
    names: Vec<String>,
}

fn format_error(line: usize, message: impl Into<String>) -> TreeError {
    TreeError::ModelFormat {
        line,
        message: message.into(),
    }
}

impl Parser<'_> {
    fn node(&mut self, depth: usize) -> Result<TreeNode, TreeError> {
        let last_line = self.lines.last().map_or(1, |l| l.0);
        let &(line_no, indent, body) = self
            .lines
            .get(self.pos)
            .ok_or_else(|| format_error(last_line, "unexpected end of model"))?;
        if indent != depth {
            return Err(format_error(line_no, format!("expected depth {depth}, found {indent}")));
        }
        self.pos += 1;

        if let Some((name, threshold)) = body.split_once(" <= ") {
            let feature = self
                .names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| format_error(line_no, format!("unknown feature `{name}`")))?;
            let threshold: f64 = threshold
                .parse()
                .map_err(|_| format_error(line_no, format!("bad threshold `{threshold}`")))?;
            let left = self.node(depth + 1)?;
            let right = self.node(depth + 1)?;
            let counts = left.counts() + right.counts();
            // Provisional; fixed top-down by `relabel` once parents are known.
            let label = counts.majority(None);
            return Ok(TreeNode::Split {
                feature,
                threshold,
                counts,
                label,
                left: Box::new(left),
                right: Box::new(right),
            });
        }

        let (label, rest) = body
            .split_once(' ')
            .ok_or_else(|| format_error(line_no, "expected `LABEL (rows/errors)`"))?;
        let label: Label = label.parse().map_err(|m: String| format_error(line_no, m))?;
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| format_error(line_no, "expected `(rows/errors)`"))?;
        let (total, errors) = inner
            .split_once('/')
            .ok_or_else(|| format_error(line_no, "expected `rows/errors`"))?;
        let total: u32 = total.parse().map_err(|_| format_error(line_no, "bad row count"))?;
        let errors: u32 = errors.parse().map_err(|_| format_error(line_no, "bad error count"))?;
        if errors > total {
            return Err(format_error(line_no, "errors exceed rows"));
        }
        let mut counts = ClassCounts::default();
        counts.0[label.index()] = total - errors;
        let other = Label::ALL.into_iter().find(|&l| l != label).expect("binary labels");
        counts.0[other.index()] = errors;
        Ok(TreeNode::Leaf { counts, label })
    }
}

/// Split labels follow the same tie-break as induction: the parent's label.
fn relabel(node: &mut TreeNode, parent: Option<Label>) {
    if let TreeNode::Split {
        counts,
        label,
        left,
        right,
        ..
    } = node
    {
        *label = counts.majority(parent);
        relabel(left, Some(*label));
        relabel(right, Some(*label));
    }
}

pub fn parse_tree(text: &str) -> Result<DecisionTree, TreeError> {
    let mut raw = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = raw.next().ok_or_else(|| format_error(1, "empty model"))?;
    let names: Vec<String> = header
        .strip_prefix(FEATURES_PREFIX)
        .ok_or_else(|| format_error(1, format!("expected `{FEATURES_PREFIX}...`")))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    if names.iter().any(String::is_empty) {
        return Err(format_error(1, "empty feature name"));
    }

    let mut lines = Vec::new();
    for (no, line) in raw {
        if line.trim().is_empty() {
            continue;
        }
        let body = line.trim_start_matches(' ');
        let spaces = line.len() - body.len();
        if spaces % INDENT.len() != 0 {
            return Err(format_error(no, "indentation must be a multiple of two spaces"));
        }
        lines.push((no, spaces / INDENT.len(), body.trim_end()));
    }
    let mut parser = Parser { lines, pos: 0, names };
    let mut root = parser.node(0)?;
    relabel(&mut root, None);
    if let Some(&(no, ..)) = parser.lines.get(parser.pos) {
        return Err(format_error(no, "trailing lines after the tree"));
    }
    Ok(DecisionTree {
        feature_names: parser.names,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c45::test_data::sample_set;
    use crate::c45::{build_tree, Example, TrainConfig, TrainingSet};
    use proptest::prelude::*;

    #[test]
    fn round_trip_published_tree() {
        let tree = build_tree(&sample_set(), &TrainConfig::unpruned(1)).unwrap();
        let text = write_tree(&tree);
        assert_eq!(parse_tree(&text).unwrap(), tree);
    }

    #[test]
    fn rejects_malformed_models() {
        assert!(parse_tree("").is_err());
        assert!(parse_tree("SUBJECT_FAILED <= 1\n").is_err());
        let head = "# features: A,B\n";
        assert!(matches!(
            parse_tree(&format!("{head}C <= 1\n  YES (1/0)\n  NO (1/0)\n")),
            Err(TreeError::ModelFormat { line: 2, .. })
        ));
        assert!(parse_tree(&format!("{head}A <= 1\n  YES (1/0)\n")).is_err());
        assert!(parse_tree(&format!("{head}YES (1/0)\nNO (1/0)\n")).is_err());
        assert!(parse_tree(&format!("{head}YES (1/3)\n")).is_err());
        assert!(parse_tree(&format!("{head}MAYBE (1/0)\n")).is_err());
        assert!(parse_tree(&format!("{head} YES (1/0)\n")).is_err());
        assert!(parse_tree(&format!("{head}YES (3/1)\n")).is_ok());
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(
            rows in prop::collection::vec((prop::collection::vec(0u32..6, 2), any::<bool>()), 1..25),
        ) {
            let set = TrainingSet {
                feature_names: vec!["X".into(), "Y".into()],
                rows: rows.into_iter().map(|(features, y)| Example {
                    features,
                    label: if y { Label::Yes } else { Label::No },
                }).collect(),
            };
            let tree = build_tree(&set, &TrainConfig::unpruned(1)).unwrap();
            let text = write_tree(&tree);
            let back = parse_tree(&text).unwrap();
            prop_assert_eq!(&back, &tree);
            prop_assert_eq!(write_tree(&back), text);
        }
    }
}
