//! Independent reference computations for the tree tests.
//!
//! Nothing here calls into the learner: thresholds, partitions, entropies and
//! the selection rule are recomputed from scratch on plain tuples.
#![allow(dead_code)]

pub mod sim;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saris_core::c45::{Example, TrainingSet};
use saris_core::dataset::Label;

pub type Row = (Vec<u32>, bool);

pub fn entropy_of(labels: &[bool]) -> f64 {
    let mut counts: HashMap<bool, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let n = labels.len() as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
    pub ratio: f64,
}

/// Every (feature, midpoint) pair with both sides nonempty.
pub fn all_candidates(rows: &[Row], arity: usize) -> Vec<(Candidate, usize, usize)> {
    let labels: Vec<bool> = rows.iter().map(|r| r.1).collect();
    let h = entropy_of(&labels);
    let n = rows.len() as f64;
    let mut out = Vec::new();
    for feature in 0..arity {
        let mut values: Vec<u32> = rows.iter().map(|r| r.0[feature]).collect();
        values.sort_unstable();
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] as f64 + pair[1] as f64) / 2.0;
            let left: Vec<bool> = rows
                .iter()
                .filter(|r| (r.0[feature] as f64) <= threshold)
                .map(|r| r.1)
                .collect();
            let right: Vec<bool> = rows
                .iter()
                .filter(|r| (r.0[feature] as f64) > threshold)
                .map(|r| r.1)
                .collect();
            let (nl, nr) = (left.len() as f64, right.len() as f64);
            let gain = h - nl / n * entropy_of(&left) - nr / n * entropy_of(&right);
            let split = -(nl / n) * (nl / n).log2() - (nr / n) * (nr / n).log2();
            out.push((
                Candidate {
                    feature,
                    threshold,
                    gain,
                    ratio: gain / split,
                },
                left.len(),
                right.len(),
            ));
        }
    }
    out
}

/// Root split under the documented rule: admissible = both sides >= min_leaf
/// and gain > 1e-12; keep gain >= mean - 1e-12; maximise gain ratio; ties
/// (within 1e-12) go to the lowest feature, then the lowest threshold.
pub fn brute_force_root(rows: &[Row], arity: usize, min_leaf: usize) -> Option<Candidate> {
    if rows.len() < 2 * min_leaf || entropy_of(&rows.iter().map(|r| r.1).collect::<Vec<_>>()) == 0.0 {
        return None;
    }
    let admissible: Vec<Candidate> = all_candidates(rows, arity)
        .into_iter()
        .filter(|&(c, nl, nr)| nl >= min_leaf && nr >= min_leaf && c.gain > 1e-12)
        .map(|(c, ..)| c)
        .collect();
    if admissible.is_empty() {
        return None;
    }
    let mean = admissible.iter().map(|c| c.gain).sum::<f64>() / admissible.len() as f64;
    let pool: Vec<Candidate> = admissible.into_iter().filter(|c| c.gain >= mean - 1e-12).collect();
    let best_ratio = pool.iter().map(|c| c.ratio).fold(f64::NEG_INFINITY, f64::max);
    pool.into_iter()
        .filter(|c| c.ratio >= best_ratio - 1e-12)
        .min_by(|a, b| (a.feature, a.threshold).partial_cmp(&(b.feature, b.threshold)).unwrap())
}

pub fn random_rows(rng: &mut ChaCha8Rng, max_rows: usize, arity: usize, max_value: u32) -> Vec<Row> {
    let n = rng.gen_range(1..=max_rows);
    (0..n)
        .map(|_| {
            let features = (0..arity).map(|_| rng.gen_range(0..=max_value)).collect();
            (features, rng.gen_bool(0.5))
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_set(rows: &[Row], arity: usize) -> TrainingSet {
    TrainingSet {
        feature_names: (0..arity).map(|i| format!("F{i}")).collect(),
        rows: rows
            .iter()
            .map(|(f, y)| Example {
                features: f.clone(),
                label: if *y { Label::Yes } else { Label::No },
            })
            .collect(),
    }
}

/// No two rows share a feature vector with different labels.
pub fn is_consistent(rows: &[Row]) -> bool {
    let mut seen: HashMap<&Vec<u32>, bool> = HashMap::new();
    rows.iter().all(|(f, y)| *seen.entry(f).or_insert(*y) == *y)
}
