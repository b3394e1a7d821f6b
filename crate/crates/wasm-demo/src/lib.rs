//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns JSON text; the page parses it. The plain
//! Rust functions underneath (`grid_rows`, `train_report`, ...) carry the
//! logic and are what the native tests exercise.

use saris_core::access::{Activity, PermissionMatrix, Role};
use saris_core::c45::{
    choose_split, evaluate, parse_tree, train, write_tree, DecisionTree, Metrics, TrainConfig, TrainingSet,
};
use saris_core::dataset::parse_csv;
use saris_core::fixtures::SAMPLE_CSV;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridRow {
    pub caption: &'static str,
    pub student: bool,
    pub reviewer: bool,
    pub csc: bool,
}

pub fn grid_rows() -> Vec<GridRow> {
    let grid = PermissionMatrix;
    Activity::ALL
        .into_iter()
        .map(|a| GridRow {
            caption: a.caption(),
            student: grid.get(Role::Student, a),
            reviewer: grid.get(Role::Reviewer, a),
            csc: grid.get(Role::Csc, a),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub feature: String,
    pub threshold: f64,
    pub gain: f64,
    pub split_info: f64,
    pub gain_ratio: f64,
    /// Gain at or above the mean of all admissible candidates.
    pub eligible: bool,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub rows: usize,
    pub model: String,
    pub node_count: usize,
    pub leaf_count: usize,
    pub depth: usize,
    pub training: Metrics,
    pub mean_gain: Option<f64>,
    /// Admissible root splits, in feature then threshold order.
    pub root_candidates: Vec<Candidate>,
}

fn parse_set(csv: &str) -> Result<TrainingSet, String> {
    let rows = parse_csv(csv.as_bytes()).map_err(|e| e.to_string())?;
    Ok(TrainingSet::from_dataset(&rows))
}

pub fn train_report(csv: &str, config: &TrainConfig) -> Result<(DecisionTree, TrainReport), String> {
    config.check().map_err(|e| e.to_string())?;
    let set = parse_set(csv)?;
    let tree = train(&set, config).map_err(|e| e.to_string())?;
    let training = evaluate(&tree, &set).map_err(|e| e.to_string())?;
    let choice = choose_split(&set, config.min_leaf);
    let (mean_gain, root_candidates) = match &choice {
        None => (None, Vec::new()),
        Some(c) => {
            let mut all = c.admissible.clone();
            all.sort_by(|a, b| {
                (a.feature, a.threshold)
                    .partial_cmp(&(b.feature, b.threshold))
                    .expect("finite")
            });
            let rows = all
                .into_iter()
                .map(|s| Candidate {
                    feature: set.feature_names[s.feature].clone(),
                    threshold: s.threshold,
                    gain: s.gain,
                    split_info: s.split_info,
                    gain_ratio: s.gain_ratio,
                    eligible: s.gain >= c.mean_gain - saris_core::c45::TIE_EPSILON,
                    chosen: s.feature == c.best.feature && s.threshold == c.best.threshold,
                })
                .collect();
            (Some(c.mean_gain), rows)
        }
    };
    let report = TrainReport {
        rows: set.len(),
        model: write_tree(&tree),
        node_count: tree.node_count(),
        leaf_count: tree.leaf_count(),
        depth: tree.depth(),
        training,
        mean_gain,
        root_candidates,
    };
    Ok((tree, report))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub label: String,
    pub confidence: f64,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

/// The fourteen activity rows with one flag per role, as JSON.
#[wasm_bindgen(js_name = permissionGrid)]
pub fn permission_grid() -> String {
    to_json(&grid_rows())
}

/// The five-row sample dataset in export format.
#[wasm_bindgen(js_name = sampleDataset)]
pub fn sample_dataset() -> String {
    SAMPLE_CSV.to_string()
}

/// A trained tree held on the Rust side between calls.
#[wasm_bindgen]
pub struct Model {
    tree: DecisionTree,
    report: String,
}

#[wasm_bindgen]
impl Model {
    /// Trains on dataset CSV text; throws with a readable message on bad input.
    #[wasm_bindgen(constructor)]
    pub fn new(csv: &str, min_leaf: usize, confidence_factor: f64, pruning: bool) -> Result<Model, JsError> {
        let config = TrainConfig {
            min_leaf,
            confidence_factor,
            pruning,
        };
        let (tree, report) = train_report(csv, &config).map_err(|e| JsError::new(&e))?;
        Ok(Model {
            tree,
            report: to_json(&report),
        })
    }

    /// Loads a model file.
    #[wasm_bindgen(js_name = fromText)]
    pub fn from_text(text: &str) -> Result<Model, JsError> {
        let tree = parse_tree(text).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(Model {
            report: to_json(&serde_json::json!({ "model": write_tree(&tree) })),
            tree,
        })
    }

    /// Training summary as JSON (see `TrainReport`).
    pub fn report(&self) -> String {
        self.report.clone()
    }

    pub fn text(&self) -> String {
        write_tree(&self.tree)
    }

    pub fn predict(&self, subject_failed: u32, dismissal_punish: u32, rewards: u32) -> Result<String, JsError> {
        predict_json(&self.tree, &[subject_failed, dismissal_punish, rewards]).map_err(|e| JsError::new(&e))
    }
}

pub fn predict_json(tree: &DecisionTree, features: &[u32]) -> Result<String, String> {
    let p = tree.predict(features).map_err(|e| e.to_string())?;
    Ok(to_json(&PredictionReport {
        label: p.label.to_string(),
        confidence: p.confidence,
    }))
}
